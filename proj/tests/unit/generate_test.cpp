#include <doctest.h>

#include <cmath>
#include <set>

#include "../support.hpp"
#include "locksmith/generate.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/netlist.hpp"
#include "locksmith/sim.hpp"

using namespace locksmith;

TEST_CASE("mixed family meets the requested shape and is deterministic") {
  generate::GenOptions opts;
  opts.family = generate::Family::Mixed;
  opts.name = "m1";
  opts.inputs = 8;
  opts.outputs = 4;
  opts.gates = 40;
  opts.seed = 5;

  generate::Generated g = generate::generate(opts);
  CHECK(g.netlist.n() == 8);
  CHECK(g.netlist.m() == 4);
  CHECK(g.netlist.nodes.size() >= 8 + 40);
  CHECK(g.lock_sites.empty());

  generate::Generated same = generate::generate(opts);
  CHECK(serialize_bench(same.netlist) == serialize_bench(g.netlist));

  opts.seed = 6;
  generate::Generated other = generate::generate(opts);
  CHECK(serialize_bench(other.netlist) != serialize_bench(g.netlist));
}

TEST_CASE("motif family tags sites whose kind echoes in a consumer") {
  generate::GenOptions opts;
  opts.family = generate::Family::Motif;
  opts.inputs = 8;
  opts.outputs = 4;
  opts.gates = 36;
  opts.sites = 4;
  opts.seed = 11;

  generate::Generated g = generate::generate(opts);
  REQUIRE(g.lock_sites.size() == 4);
  const auto fo = g.netlist.fanouts();
  for (const std::string& site : g.lock_sites) {
    CAPTURE(site);
    const Node& nd = g.netlist.node(site);
    CHECK(nd.fanin.size() == 2);
    // At least one consumer repeats the tagged gate's kind, so the kind
    // stays readable nearby even after the gate itself is replaced.
    bool echoed = false;
    for (const std::string& c : fo[g.netlist.node_index(site)])
      echoed |= g.netlist.node(c).kind == nd.kind;
    CHECK(echoed);
  }
}

TEST_CASE("inv-chain family grades error rate with the number of wrong bits") {
  generate::GenOptions opts;
  opts.family = generate::Family::InvChain;
  opts.sites = 4;
  opts.seed = 2;

  generate::Generated g = generate::generate(opts);
  REQUIRE(g.lock_sites.size() == 4);
  CHECK(g.netlist.n() == 12);  // a, b and a mask input per site
  CHECK(g.netlist.m() == 4);

  std::string sites;
  for (const std::string& s : g.lock_sites) sites += (sites.empty() ? "" : ",") + s;
  LockedCircuit lc = lock_xor(g.netlist, 4, 7, {{"sites", sites}});

  sim::ErOptions ex;
  ex.method = sim::ErOptions::Method::Exhaustive;
  // Corrupting j chains corrupts exactly 1 - 2^-j of the patterns, so error
  // rate strictly increases with every additional wrong bit.
  for (int j = 0; j <= 4; ++j) {
    auto bits = lc.key.bits;
    for (int i = 0; i < j; ++i) bits[static_cast<std::size_t>(i)] ^= 1;
    const double expect = 1.0 - std::pow(2.0, -j);
    CHECK(sim::error_rate(g.netlist, lc.netlist, bits, ex).er == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("generated netlists always validate") {
  for (auto family : {generate::Family::Mixed, generate::Family::Motif,
                      generate::Family::InvChain}) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      generate::GenOptions opts;
      opts.family = family;
      opts.seed = seed;
      opts.gates = 30;
      generate::Generated g = generate::generate(opts);
      // validate() ran inside generate; re-running must not throw either.
      CHECK_NOTHROW(validate(g.netlist));
      CHECK(g.netlist.m() > 0);
    }
  }
}
