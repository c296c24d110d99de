#include "locksmith/resynth.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "edit.hpp"
#include "locksmith/rng.hpp"

namespace locksmith {
namespace edit {

namespace {

GateKind parity_toggle(GateKind k) {
  return k == GateKind::Xor ? GateKind::Xnor : GateKind::Xor;
}

}  // namespace

void push_inversion(Workspace& ws, const std::string& sig, const std::set<std::string>& fence) {
  if (ws.is_output(sig))
    throw NetlistError("cannot push an inversion across primary output '" + sig + "'");

  // Snapshot distinct consumers; the loop below adds and rewires nodes.
  std::vector<std::string> consumers;
  for (const std::string& c : ws.consumers(sig))
    if (std::find(consumers.begin(), consumers.end(), c) == consumers.end())
      consumers.push_back(c);

  std::string not_id;
  auto shared_not = [&]() -> const std::string& {
    if (not_id.empty()) {
      not_id = ws.fresh(sig + "_n");
      ws.add(not_id, GateKind::Not, {sig});
    }
    return not_id;
  };

  for (const std::string& c : consumers) {
    Node& nd = ws.node(c);
    std::vector<std::size_t> occ;
    for (std::size_t j = 0; j < nd.fanin.size(); ++j)
      if (nd.fanin[j] == sig) occ.push_back(j);
    if (occ.empty()) continue;

    std::vector<std::size_t> rewire;  // occurrences that need the explicit NOT
    if (fence.count(c)) {
      rewire = occ;
    } else {
      switch (nd.kind) {
        case GateKind::Xor:
        case GateKind::Xnor:
          // Each inverted occurrence flips the parity once.
          if (occ.size() % 2 == 1) nd.kind = parity_toggle(nd.kind);
          break;
        case GateKind::Not:
          nd.kind = GateKind::Buf;
          break;
        case GateKind::Buf:
        case GateKind::OutputTap:
          nd.kind = GateKind::Not;
          break;
        case GateKind::Lut:
          // Inverting data input j mirrors the table along that axis.
          for (std::size_t j : occ) {
            const std::size_t mask = std::size_t{1} << (nd.fanin.size() - 1 - j);
            std::vector<std::uint8_t> next(nd.lut_table.size());
            for (std::size_t t = 0; t < next.size(); ++t) next[t] = nd.lut_table[t ^ mask];
            nd.lut_table = std::move(next);
          }
          break;
        case GateKind::Mux2:
          // An inverted selector swaps the data legs; inverted data legs
          // cannot be absorbed.
          if (occ.front() == 0) std::swap(nd.fanin[1], nd.fanin[2]);
          for (std::size_t j : {std::size_t{1}, std::size_t{2}})
            if (nd.fanin[j] == sig) rewire.push_back(j);
          break;
        default:
          rewire = occ;
          break;
      }
    }

    if (!rewire.empty()) {
      std::vector<std::string> fanin = nd.fanin;
      for (std::size_t j : rewire) fanin[j] = shared_not();
      ws.set_fanin(c, std::move(fanin));
    }
  }
}

}  // namespace edit

namespace resynth {

namespace {

using edit::Workspace;

GateKind dual(GateKind k) {
  switch (k) {
    case GateKind::And:
      return GateKind::Nand;
    case GateKind::Nand:
      return GateKind::And;
    case GateKind::Or:
      return GateKind::Nor;
    case GateKind::Nor:
      return GateKind::Or;
    case GateKind::Xor:
      return GateKind::Xnor;
    case GateKind::Xnor:
      return GateKind::Xor;
    default:
      throw NetlistError("gate kind has no dual");
  }
}

// De-Morgan image: the kind computing the same function over negated fan-ins.
GateKind demorgan(GateKind k) {
  switch (k) {
    case GateKind::And:
      return GateKind::Nor;
    case GateKind::Nor:
      return GateKind::And;
    case GateKind::Or:
      return GateKind::Nand;
    case GateKind::Nand:
      return GateKind::Or;
    default:
      throw NetlistError("gate kind has no De-Morgan image");
  }
}

bool foldable(GateKind k) {
  switch (k) {
    case GateKind::And:
    case GateKind::Nand:
    case GateKind::Or:
    case GateKind::Nor:
    case GateKind::Xor:
    case GateKind::Xnor:
      return true;
    default:
      return false;
  }
}

enum class Rule { DropDoubleNot, FoldNot, DropBuf, XorPull, DeMorgan, XorPush };

std::vector<Rule> applicable(const Workspace& ws, const std::string& id,
                             const std::set<std::string>& fence) {
  std::vector<Rule> out;
  const Node& nd = ws.node(id);
  if (fence.count(id)) return out;
  switch (nd.kind) {
    case GateKind::Not: {
      const Node& u = ws.node(nd.fanin[0]);
      if (u.kind == GateKind::Not) out.push_back(Rule::DropDoubleNot);
      if (foldable(u.kind) && !fence.count(u.id) && !ws.is_output(u.id) &&
          ws.consumers(u.id).size() == 1)
        out.push_back(Rule::FoldNot);
      break;
    }
    case GateKind::Buf:
    case GateKind::OutputTap:
      if (!ws.is_output(id)) out.push_back(Rule::DropBuf);
      break;
    case GateKind::And:
    case GateKind::Nand:
    case GateKind::Or:
    case GateKind::Nor:
      out.push_back(Rule::DeMorgan);
      break;
    case GateKind::Xor:
    case GateKind::Xnor: {
      for (const std::string& src : nd.fanin)
        if (ws.node(src).kind == GateKind::Not) {
          out.push_back(Rule::XorPull);
          break;
        }
      out.push_back(Rule::XorPush);
      break;
    }
    default:
      break;
  }
  return out;
}

void apply_rule(Workspace& ws, const std::string& id, Rule rule, rng::Engine& eng) {
  Node& nd = ws.node(id);
  switch (rule) {
    case Rule::DropDoubleNot: {
      const std::string x = ws.node(nd.fanin[0]).fanin[0];
      if (ws.is_output(id)) {
        nd.kind = GateKind::Buf;
        ws.set_fanin(id, {x});
      } else {
        ws.repoint_all(id, x);
        ws.erase(id);
      }
      break;
    }
    case Rule::FoldNot: {
      Node& u = ws.node(nd.fanin[0]);
      u.kind = dual(u.kind);
      nd.kind = GateKind::Buf;
      break;
    }
    case Rule::DropBuf: {
      const std::string src = nd.fanin[0];
      ws.repoint_all(id, src);
      ws.erase(id);
      break;
    }
    case Rule::XorPull: {
      std::vector<std::string> fanin = nd.fanin;
      for (std::size_t j = 0; j < fanin.size(); ++j) {
        const Node& u = ws.node(fanin[j]);
        if (u.kind == GateKind::Not) {
          fanin[j] = u.fanin[0];
          break;
        }
      }
      ws.set_fanin(id, std::move(fanin));
      ws.node(id).kind = dual(ws.node(id).kind);
      break;
    }
    case Rule::DeMorgan: {
      std::map<std::string, std::string> negated;
      std::vector<std::string> fanin = nd.fanin;
      for (std::string& src : fanin) {
        auto it = negated.find(src);
        if (it == negated.end()) {
          const std::string nid = ws.fresh(src + "_n");
          ws.add(nid, GateKind::Not, {src});
          it = negated.emplace(src, nid).first;
        }
        src = it->second;
      }
      const GateKind next = demorgan(nd.kind);
      ws.set_fanin(id, std::move(fanin));
      ws.node(id).kind = next;
      break;
    }
    case Rule::XorPush: {
      std::vector<std::string> fanin = nd.fanin;
      const std::size_t j = static_cast<std::size_t>(rng::below(eng, fanin.size()));
      const std::string nid = ws.fresh(fanin[j] + "_n");
      ws.add(nid, GateKind::Not, {fanin[j]});
      fanin[j] = nid;
      ws.set_fanin(id, std::move(fanin));
      ws.node(id).kind = dual(ws.node(id).kind);
      break;
    }
  }
}

}  // namespace

Netlist bubble_push(const Netlist& nl, std::uint64_t seed, const BubbleOptions& opts,
                    const std::vector<std::string>& fenced) {
  std::set<std::string> fence(fenced.begin(), fenced.end());
  for (const std::string& f : fence)
    if (!nl.has_node(f)) throw NetlistError("fenced gate '" + f + "' is not in the netlist");

  rng::Engine eng(seed);
  Workspace ws(nl);
  for (int pass = 0; pass < opts.passes; ++pass) {
    std::vector<std::string> ids;
    for (const std::string& id : ws.ids())
      if (ws.node(id).kind != GateKind::Input) ids.push_back(id);
    rng::shuffle(eng, ids);
    for (const std::string& id : ids) {
      if (!ws.has(id)) continue;  // consumed by an earlier rewrite this pass
      std::vector<Rule> rules = applicable(ws, id, fence);
      if (rules.empty()) continue;
      if (rng::unit(eng) >= opts.site_fraction) continue;
      apply_rule(ws, id, rules[static_cast<std::size_t>(rng::below(eng, rules.size()))], eng);
    }
    ws.sweep_dead(fence);
  }
  return ws.build();
}

LockedCircuit bubble_push(const LockedCircuit& lc, std::uint64_t seed, const BubbleOptions& opts) {
  LockedCircuit out = lc;
  out.netlist = bubble_push(lc.netlist, seed, opts, key_gates(lc.netlist, lc.key));
  return out;
}

namespace {

// Deterministic cleanup after inversion pushing: elide the pass-through
// buffers absorption leaves behind, until nothing changes.  Deliberately no
// NOT-over-NOT collapsing — that would restructure beyond the immediate
// fan-out of the pushed gates and make the rewrite's footprint visible from
// far away.  Primary outputs and fenced nodes keep their ids.
void normalize_inverters(edit::Workspace& ws, const std::set<std::string>& fence) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const std::string& id : ws.ids()) {
      if (!ws.has(id) || fence.count(id)) continue;
      Node& nd = ws.node(id);
      if (nd.kind == GateKind::Buf && !ws.is_output(id)) {
        ws.repoint_all(id, nd.fanin[0]);
        ws.erase(id);
        changed = true;
      }
    }
  }
}

}  // namespace

LockedCircuit xor_xnor_complement(const LockedCircuit& lc) {
  const std::vector<std::string> gates = key_gates(lc.netlist, lc.key);
  if (gates.size() != lc.key.width())
    throw NetlistError("key gate list does not cover every key bit");
  const std::set<std::string> fence(gates.begin(), gates.end());

  LockedCircuit out = lc;
  edit::Workspace ws(lc.netlist);
  for (std::size_t i = 0; i < gates.size(); ++i) {
    const GateKind kind = ws.node(gates[i]).kind;
    if (kind != GateKind::Xor && kind != GateKind::Xnor)
      throw NetlistError("key gate '" + gates[i] + "' is not an XOR/XNOR gate");
    out.key.bits[i] ^= 1;
    if (ws.is_output(gates[i])) {
      // No fan-out slack at a primary output: compensate at the gate itself.
      ws.node(gates[i]).kind = kind == GateKind::Xor ? GateKind::Xnor : GateKind::Xor;
    } else {
      // Complemented bit inverts the gate's output; push the compensating
      // inversion into the fan-out so the gate keeps its kind.
      edit::push_inversion(ws, gates[i], fence);
    }
  }
  normalize_inverters(ws, fence);
  ws.sweep_dead(fence);
  out.netlist = ws.build();
  return out;
}

std::uint64_t topology_hash(const Netlist& nl, int rounds) {
  auto mix = [](std::uint64_t h, std::uint64_t x) { return rng::splitmix64(h ^ x); };

  std::set<std::string> pis(nl.primary_inputs.begin(), nl.primary_inputs.end());
  std::set<std::string> kis(nl.key_inputs.begin(), nl.key_inputs.end());
  std::set<std::string> outs(nl.outputs.begin(), nl.outputs.end());

  std::unordered_map<std::string, std::uint64_t> label;
  label.reserve(nl.nodes.size());
  for (const Node& nd : nl.nodes) {
    std::uint64_t role = 0;
    if (pis.count(nd.id)) role |= 1;
    if (kis.count(nd.id)) role |= 2;
    if (outs.count(nd.id)) role |= 4;
    std::uint64_t h = mix(0x6c62272e07bb0142ULL, static_cast<std::uint64_t>(nd.kind));
    h = mix(h, role);
    for (std::uint8_t b : nd.lut_table) h = mix(h, b + 1);
    label[nd.id] = h;
  }

  for (int r = 0; r < rounds; ++r) {
    std::unordered_map<std::string, std::uint64_t> next;
    next.reserve(label.size());
    for (const Node& nd : nl.nodes) {
      std::vector<std::uint64_t> in;
      in.reserve(nd.fanin.size());
      for (const std::string& src : nd.fanin) in.push_back(label.at(src));
      std::sort(in.begin(), in.end());
      std::uint64_t h = mix(label.at(nd.id), in.size());
      for (std::uint64_t l : in) h = mix(h, l);
      next[nd.id] = h;
    }
    label = std::move(next);
  }

  std::uint64_t acc = 0;
  for (const auto& [id, l] : label) acc += rng::splitmix64(l);  // order-free sum
  return rng::splitmix64(acc ^ static_cast<std::uint64_t>(nl.nodes.size()));
}

}  // namespace resynth
}  // namespace locksmith
