#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "locksmith/netlist.hpp"

namespace locksmith {

// Scheme-agnostic locking request. `params` carries scheme-specific knobs as
// strings (documented per scheme below).
struct LockRecipe {
  std::string scheme;  // xor | mux | lut | sar | antisat | ble | unsail
  int key_width = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> params;
};

struct LockedCircuit {
  Netlist netlist;
  Key key;             // correct key + bit -> designated key gate
  std::string scheme;
  std::uint64_t seed = 0;
  std::string original_name;
  std::map<std::string, std::string> params;
};

// Dispatcher over the scheme field. Throws NetlistError on unknown scheme or
// unsatisfiable preconditions (not enough candidate wires/gates).
LockedCircuit lock(const Netlist& nl, const LockRecipe& recipe);

// XOR/XNOR key-gate insertion on `width` distinct gate-output wires. Gate
// kind is drawn per bit; an XOR gate hides a pass-through under key bit 0, an
// XNOR under key bit 1.
// params: exclude_po_drivers=1 skips output-driving wires; sites=a,b,c
// restricts candidates to the listed wires.
LockedCircuit lock_xor(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params = {});

// MUX re-routing: each locked wire is replaced by a key-selected choice
// between the real signal and a dummy signal chosen outside the wire's
// transitive fan-out (keeps the DAG acyclic). Correct bit = side carrying the
// real signal.
LockedCircuit lock_mux(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params = {});

// LUT replacement: width / 2^k gates of fan-in k are replaced by key-driven
// truth tables (one key bit per table row, realized as minterm AND gates
// summed by an OR that keeps the replaced gate's id). Correct bits = the
// replaced gate's truth table. params: lut_k (default 2).
LockedCircuit lock_lut(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params = {});

// Point-function flip: a comparator between `width` primary inputs and the
// key, masked by a hardwired comparison against the correct key, XORed into
// one gate-driven output. Every wrong key corrupts exactly the patterns whose
// compared bits equal it (ER = 2^-width).
LockedCircuit lock_sar(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params = {});

// Two half-width key blocks g(X xor Kl1) AND NOT g(X xor Kl2) with g an
// AND-tree, XORed into one gate-driven output. Correct keys are exactly the
// pairs with Kl1 = Kl2. width must be even.
LockedCircuit lock_antisat(const Netlist& nl, int width, std::uint64_t seed,
                           const std::map<std::string, std::string>& params = {});

// Simplified region encryption: a comparator AND-tree over all key bits
// against a hardwired correct key drives an XOR mask on every boundary output
// of a connected region that touches a primary output, so every wrong key
// complements those outputs on all patterns (identical, high ER for all wrong
// keys). Comparator literals draw their polarity from constant gadgets so the
// literal gate kind is independent of the key-bit value.
// params: region_size (default 8).
LockedCircuit lock_ble(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params = {});

// XOR locking followed by an XOR<->XNOR swap on a random half of the key
// gates with the induced inversion absorbed into each gate's fan-out. Key
// bits are unchanged, so gate kind carries no information about the bit.
LockedCircuit lock_unsail(const Netlist& nl, int width, std::uint64_t seed,
                          const std::map<std::string, std::string>& params = {});

// Directory persistence: locked.bench + key.json + meta.json.
void save_locked(const LockedCircuit& lc, const std::filesystem::path& dir);
LockedCircuit load_locked(const std::filesystem::path& dir);

// Key gates in key-bit order. Falls back to the first consumer (in node
// order) of each key input when provenance is absent; throws when neither
// identifies a gate.
std::vector<std::string> key_gates(const Netlist& nl, const Key& key);

}  // namespace locksmith
