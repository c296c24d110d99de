#pragma once

#include <cstdint>
#include <vector>

#include "locksmith/lock.hpp"
#include "locksmith/netlist.hpp"

namespace locksmith::resynth {

struct BubbleOptions {
  int passes = 3;
  double site_fraction = 0.4;  // chance each candidate rewrite is applied
};

// Seeded, function-preserving local rewrites: inverter folds (NOT over a
// binary gate becomes its dual), De-Morgan splits, double-negation and buffer
// elision, XOR/XNOR bubble migration. Key gates recorded in `lc.key.provenance`
// (when rewriting a locked circuit, pass them via `fenced`) keep their id,
// kind and role; everything around them may restructure.
Netlist bubble_push(const Netlist& nl, std::uint64_t seed, const BubbleOptions& opts = {},
                    const std::vector<std::string>& fenced = {});

LockedCircuit bubble_push(const LockedCircuit& lc, std::uint64_t seed,
                          const BubbleOptions& opts = {});

// Complements the correct key of an XOR/XNOR-locked circuit while preserving
// function: every key bit is flipped and the compensating inversion at each
// key gate's output is pushed into its fan-out (kind toggles on absorbing
// consumers, explicit NOT where nothing absorbs). Key gates driving a primary
// output have no fan-out slack; those toggle their own kind instead. A final
// deterministic pass elides the pass-through buffers the push leaves behind.
// Applying the transform twice restores the original key and function.
LockedCircuit xor_xnor_complement(const LockedCircuit& lc);

// 64-bit structural digest: two rounds of neighborhood label refinement over
// (kind, io-role, fan-in label multiset), independent of node names and node
// order, sensitive to gate-kind changes.
std::uint64_t topology_hash(const Netlist& nl, int rounds = 2);

}  // namespace locksmith::resynth
