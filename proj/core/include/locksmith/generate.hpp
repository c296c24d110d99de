#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "locksmith/netlist.hpp"

namespace locksmith::generate {

// Families of seeded synthetic circuits.
//
// Mixed    — random DAG over the usual gate mix; no designated lock sites.
// Motif    — like Mixed, but carries `sites` tagged fan-in-2 gates whose kind
//            is echoed by a same-kind consumer (the echo survives in-place
//            gate replacement, so the replaced kind stays readable nearby),
//            plus inverter/constant gadgets on primary inputs so such shapes
//            are ordinary in the corpus. Tagged gates are the lock sites.
// InvChain — per site: a 2-input XOR feeding a fan-out-free chain of three
//            inverters, masked by a fresh primary input at the output AND.
//            Corrupting k of the sites corrupts 1 - 2^-k of the patterns, so
//            error rates grade smoothly with the number of wrong bits.
enum class Family { Mixed, Motif, InvChain };

struct GenOptions {
  Family family = Family::Mixed;
  std::string name = "gen";
  int inputs = 8;
  int outputs = 4;
  int gates = 48;
  int sites = 4;  // tagged gates (Motif) or chains (InvChain)
  std::uint64_t seed = 1;
};

struct Generated {
  Netlist netlist;
  std::vector<std::string> lock_sites;  // suggested `sites=` list; empty for Mixed
};

Generated generate(const GenOptions& opts);

}  // namespace locksmith::generate
