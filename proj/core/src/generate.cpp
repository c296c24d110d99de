#include "locksmith/generate.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include "locksmith/rng.hpp"

namespace locksmith::generate {

namespace {

// Incremental builder: keeps the signal pool and consumption bookkeeping the
// families share.
struct Builder {
  Netlist nl;
  rng::Engine eng;
  std::vector<std::string> pool;                // drawable signals
  std::unordered_set<std::string> consumed;     // signals with >= 1 consumer
  std::unordered_set<std::string> output_veto;  // never promote to an output
  int gate_counter = 0;

  explicit Builder(const GenOptions& opts) : eng(opts.seed) { nl.name = opts.name; }

  void add_input(const std::string& id) {
    nl.nodes.push_back({id, GateKind::Input, {}, {}});
    nl.primary_inputs.push_back(id);
    pool.push_back(id);
  }

  void make_inputs(int count) {
    for (int i = 0; i < count; ++i) add_input("x" + std::to_string(i));
  }

  std::string add_gate(const std::string& id, GateKind kind, std::vector<std::string> fanin) {
    for (const std::string& f : fanin) consumed.insert(f);
    nl.nodes.push_back({id, kind, std::move(fanin), {}});
    pool.push_back(id);
    return id;
  }

  // Recent-biased draw keeps the DAG deep instead of star-shaped.
  std::string draw() {
    const std::size_t window = std::min<std::size_t>(pool.size(), 12);
    if (pool.size() > window && rng::unit(eng) < 0.7) {
      const std::size_t i = pool.size() - window + rng::below(eng, window);
      return pool[i];
    }
    return pool[rng::below(eng, pool.size())];
  }

  std::string draw_other(const std::string& a) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      std::string b = draw();
      if (b != a) return b;
    }
    return draw();
  }

  GateKind random_kind() {
    const std::uint64_t r = rng::below(eng, 100);
    if (r < 20) return GateKind::And;
    if (r < 35) return GateKind::Nand;
    if (r < 55) return GateKind::Or;
    if (r < 70) return GateKind::Nor;
    if (r < 80) return GateKind::Xor;
    if (r < 85) return GateKind::Xnor;
    if (r < 95) return GateKind::Not;
    return GateKind::Buf;
  }

  void random_gate(std::vector<std::string> forced = {}) {
    GateKind kind = random_kind();
    if (!forced.empty() && (kind == GateKind::Not || kind == GateKind::Buf))
      kind = GateKind::Or;  // forced feed-ins need a binary gate
    std::vector<std::string> fanin;
    if (kind == GateKind::Not || kind == GateKind::Buf) {
      fanin = {draw()};
    } else if (forced.empty()) {
      const std::string a = draw();
      fanin = {a, draw_other(a)};
    } else {
      fanin = {forced[0], draw_other(forced[0])};
    }
    add_gate("g" + std::to_string(gate_counter++), kind, std::move(fanin));
  }

  // Sinks first (deepest last), then recent gates as a fallback.
  void pick_outputs(int count) {
    std::vector<std::string> sinks;
    for (const Node& nd : nl.nodes)
      if (nd.kind != GateKind::Input && !consumed.count(nd.id) && !output_veto.count(nd.id))
        sinks.push_back(nd.id);

    std::set<std::string> chosen;
    // Every dead sink becomes an output: directly while slots remain, the
    // surplus folded into one parity tree that takes the last slot. XOR never
    // absorbs, so every folded sink stays observable at the tree's output
    // (the same reason test-point compactors are parity trees).
    if (static_cast<int>(sinks.size()) > count) {
      for (int i = 0; i < count - 1; ++i) {
        chosen.insert(sinks.back());
        sinks.pop_back();
      }
      while (sinks.size() > 1) {
        const std::string id = "fold" + std::to_string(gate_counter++);
        const std::string a = sinks.back();
        sinks.pop_back();
        const std::string b = sinks.back();
        sinks.pop_back();
        add_gate(id, GateKind::Xor, {a, b});
        sinks.push_back(id);
      }
    }
    chosen.insert(sinks.begin(), sinks.end());
    for (auto it = nl.nodes.rbegin(); it != nl.nodes.rend() && static_cast<int>(chosen.size()) < count; ++it)
      if (it->kind != GateKind::Input && !output_veto.count(it->id)) chosen.insert(it->id);
    nl.outputs.assign(chosen.begin(), chosen.end());
  }
};

Generated build_mixed(const GenOptions& opts) {
  Builder b(opts);
  b.make_inputs(std::max(2, opts.inputs));
  for (int i = 0; i < std::max(4, opts.gates); ++i) b.random_gate();
  b.pick_outputs(std::max(1, opts.outputs));
  validate(b.nl);
  return {std::move(b.nl), {}};
}

Generated build_motif(const GenOptions& opts) {
  Builder b(opts);
  b.make_inputs(std::max(2, opts.inputs));

  const int gates = std::max(4, opts.gates);
  const int sites = std::max(1, opts.sites);
  const int feeders = std::max(2, gates / 3);
  for (int i = 0; i < feeders; ++i) b.random_gate();

  static constexpr GateKind kTagKinds[] = {GateKind::And, GateKind::Or,  GateKind::Nand,
                                           GateKind::Nor, GateKind::Xor, GateKind::Xnor};
  std::vector<std::string> lock_sites;
  for (int s = 0; s < sites; ++s) {
    const GateKind kind = kTagKinds[static_cast<std::size_t>(s) % std::size(kTagKinds)];
    const std::string a = b.draw();
    const std::string tag =
        b.add_gate("t" + std::to_string(s), kind, {a, b.draw_other(a)});
    // Same-kind echo: the tag's kind stays readable from its consumer even
    // after the tag itself is replaced by other logic.
    b.add_gate("m" + std::to_string(s), kind, {tag, b.draw_other(tag)});
    lock_sites.push_back(tag);
    b.output_veto.insert(tag);

    // Inverter/constant gadget on a primary input, fed into the next gate.
    const std::string pi =
        b.nl.primary_inputs[rng::below(b.eng, b.nl.primary_inputs.size())];
    const std::string np = b.add_gate("np" + std::to_string(s), GateKind::Not, {pi});
    const std::string cg = b.add_gate(
        "cg" + std::to_string(s), rng::coin(b.eng) ? GateKind::And : GateKind::Or, {pi, np});
    b.random_gate({cg});
  }

  const int used = feeders + sites;  // random gates spent so far (one per gadget)
  for (int i = used; i < gates; ++i) b.random_gate();
  b.pick_outputs(std::max(1, opts.outputs));
  validate(b.nl);
  return {std::move(b.nl), std::move(lock_sites)};
}

Generated build_inv_chain(const GenOptions& opts) {
  Builder b(opts);
  const int sites = std::max(1, opts.sites);
  std::vector<std::string> lock_sites;
  for (int s = 0; s < sites; ++s) {
    const std::string a = "a" + std::to_string(s);
    const std::string c = "b" + std::to_string(s);
    const std::string m = "m" + std::to_string(s);
    b.add_input(a);
    b.add_input(c);
    b.add_input(m);
    const std::string site = b.add_gate("s" + std::to_string(s), GateKind::Xor, {a, c});
    std::string prev = site;
    for (int d = 1; d <= 3; ++d)
      prev = b.add_gate("n" + std::to_string(s) + "_" + std::to_string(d), GateKind::Not, {prev});
    const std::string out = b.add_gate("o" + std::to_string(s), GateKind::And, {prev, m});
    b.nl.outputs.push_back(out);
    lock_sites.push_back(site);
  }
  validate(b.nl);
  return {std::move(b.nl), std::move(lock_sites)};
}

}  // namespace

Generated generate(const GenOptions& opts) {
  switch (opts.family) {
    case Family::Mixed:
      return build_mixed(opts);
    case Family::Motif:
      return build_motif(opts);
    case Family::InvChain:
      return build_inv_chain(opts);
  }
  throw NetlistError("unknown generator family");
}

}  // namespace locksmith::generate
