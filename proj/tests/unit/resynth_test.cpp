#include <doctest.h>

#include <set>

#include "../support.hpp"
#include "locksmith/generate.hpp"
#include "locksmith/graph.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/netlist.hpp"
#include "locksmith/resynth.hpp"
#include "locksmith/sim.hpp"

using namespace locksmith;

TEST_CASE("bubble_push preserves function on every fixture") {
  for (const char* name : {"c17.bench", "adder4.bench", "mux41.bench", "parity9.bench",
                           "cmp4.bench"}) {
    CAPTURE(name);
    Netlist nl = testsup::load_fixture(name);
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
      Netlist rw = resynth::bubble_push(nl, seed);
      auto r = sim::equivalence_check(nl, rw);
      CAPTURE(seed);
      REQUIRE(r.equivalent);
    }
  }
}

TEST_CASE("bubble_push keeps key gates intact and the key valid") {
  Netlist nl = testsup::load_fixture("cmp4.bench");
  LockedCircuit lc = lock_xor(nl, 5, 3);
  for (std::uint64_t seed : {7ULL, 8ULL}) {
    LockedCircuit rw = resynth::bubble_push(lc, seed);
    CAPTURE(seed);
    for (int i = 0; i < 5; ++i) {
      const std::string& g = lc.key.provenance.at(i);
      REQUIRE(rw.netlist.has_node(g));
      CHECK(rw.netlist.node(g).kind == lc.netlist.node(g).kind);
    }
    sim::ErOptions opts;
    opts.method = sim::ErOptions::Method::Exhaustive;
    CHECK(sim::error_rate(nl, rw.netlist, rw.key.bits, opts).er == 0.0);
  }
}

TEST_CASE("bubble_push rewrites change the topology digest") {
  Netlist nl = testsup::load_fixture("cmp4.bench");
  const std::uint64_t base = resynth::topology_hash(nl);
  int changed = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
    changed += resynth::topology_hash(resynth::bubble_push(nl, seed)) != base;
  CHECK(changed >= 9);
}

TEST_CASE("topology_hash ignores names and order but sees kinds") {
  Netlist nl = testsup::load_fixture("c17.bench");
  // Rename every signal; the digest must not move.
  Netlist renamed = nl;
  auto rename = [&](std::string& s) { s = "sig_" + s; };
  for (Node& nd : renamed.nodes) {
    rename(nd.id);
    for (auto& f : nd.fanin) rename(f);
  }
  for (auto& s : renamed.primary_inputs) rename(s);
  for (auto& s : renamed.outputs) rename(s);
  renamed.rebuild_index();
  CHECK(resynth::topology_hash(renamed) == resynth::topology_hash(nl));

  Netlist retyped = nl;
  retyped.node("G10").kind = GateKind::And;
  CHECK(resynth::topology_hash(retyped) != resynth::topology_hash(nl));
}

TEST_CASE("complementing the key preserves function and flips every bit") {
  Netlist nl = testsup::load_fixture("adder4.bench");
  LockedCircuit lc = lock_xor(nl, 6, 13);
  LockedCircuit flipped = resynth::xor_xnor_complement(lc);

  REQUIRE(flipped.key.width() == lc.key.width());
  for (std::size_t i = 0; i < lc.key.width(); ++i)
    CHECK(flipped.key.bits[i] == (lc.key.bits[i] ^ 1));

  sim::ErOptions opts;
  opts.method = sim::ErOptions::Method::Exhaustive;
  CHECK(sim::error_rate(nl, flipped.netlist, flipped.key.bits, opts).er == 0.0);

  // Twice restores the original key; the circuit stays equivalent throughout.
  LockedCircuit twice = resynth::xor_xnor_complement(flipped);
  CHECK(twice.key.bits == lc.key.bits);
  CHECK(sim::equivalence_check(twice.netlist, lc.netlist).equivalent);
}

TEST_CASE("complement falls back to a kind toggle at primary outputs") {
  Netlist nl = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(o)\no = AND(a, b)\n");
  LockedCircuit lc = lock_xor(nl, 1, 2, {{"sites", "o"}});
  const GateKind before = lc.netlist.node("o").kind;

  LockedCircuit flipped = resynth::xor_xnor_complement(lc);
  const GateKind after = flipped.netlist.node("o").kind;
  CHECK(after != before);
  CHECK((after == GateKind::Xor || after == GateKind::Xnor));

  sim::ErOptions opts;
  opts.method = sim::ErOptions::Method::Exhaustive;
  CHECK(sim::error_rate(nl, flipped.netlist, flipped.key.bits, opts).er == 0.0);
}

TEST_CASE("complement rejects non-xor key gates") {
  Netlist nl = testsup::load_fixture("c17.bench");
  LockedCircuit lc = lock_mux(nl, 2, 5);
  CHECK_THROWS_AS(resynth::xor_xnor_complement(lc), NetlistError);
}

TEST_CASE("complemented inverter chains shed one inverter per site") {
  generate::GenOptions opts;
  opts.family = generate::Family::InvChain;
  opts.sites = 4;
  opts.seed = 3;
  generate::Generated gen = generate::generate(opts);

  std::string sites;
  for (const std::string& s : gen.lock_sites) sites += (sites.empty() ? "" : ",") + s;
  LockedCircuit lc = lock_xor(gen.netlist, 4, 9, {{"sites", sites}});
  LockedCircuit flipped = resynth::xor_xnor_complement(lc);

  // Each site's first chain inverter absorbs the pushed inversion and the
  // resulting buffer is elided, so four nodes disappear.
  CHECK(flipped.netlist.nodes.size() + 4 == lc.netlist.nodes.size());

  // The two-hop neighborhoods around the key gates stay indistinguishable.
  graph::FeatureMap fmap = graph::FeatureMap::first_appearance({&lc.netlist, &flipped.netlist});
  for (const std::string& site : gen.lock_sites) {
    graph::CircuitGraph a = graph::extract_subgraph(lc.netlist, fmap, site, 2);
    graph::CircuitGraph b = graph::extract_subgraph(flipped.netlist, fmap, site, 2);
    CAPTURE(site);
    CHECK(graph::canonical_hash(a) == graph::canonical_hash(b));
  }
}
