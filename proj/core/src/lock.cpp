#include "locksmith/lock.hpp"

#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "edit.hpp"
#include "locksmith/rng.hpp"

namespace locksmith {

namespace {

using edit::Workspace;
using nlohmann::json;

int param_int(const std::map<std::string, std::string>& params, const std::string& name,
              int fallback) {
  auto it = params.find(name);
  if (it == params.end()) return fallback;
  try {
    return std::stoi(it->second);
  } catch (const std::exception&) {
    throw NetlistError("parameter '" + name + "' is not an integer: " + it->second);
  }
}

bool param_flag(const std::map<std::string, std::string>& params, const std::string& name) {
  auto it = params.find(name);
  return it != params.end() && it->second != "0" && it->second != "false";
}

void require_keyfree(const Netlist& nl) {
  if (nl.p() != 0) throw NetlistError("netlist already carries key inputs");
}

std::string key_name(const Netlist& nl, std::size_t index) {
  return nl.key_prefix + std::to_string(index);
}

// Wires eligible for locking: gate outputs, optionally restricted by params
// (sites=a,b,c) and filtered (exclude_po_drivers=1).
std::vector<std::string> gate_candidates(const Netlist& nl,
                                         const std::map<std::string, std::string>& params) {
  std::vector<std::string> out;
  auto it = params.find("sites");
  if (it != params.end()) {
    std::stringstream ss(it->second);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      if (!nl.has_node(tok)) throw NetlistError("site '" + tok + "' is not in the netlist");
      if (nl.node(tok).kind == GateKind::Input)
        throw NetlistError("site '" + tok + "' is an input, not a gate");
      out.push_back(tok);
    }
  } else {
    for (const Node& nd : nl.nodes)
      if (nd.kind != GateKind::Input) out.push_back(nd.id);
  }
  if (param_flag(params, "exclude_po_drivers")) {
    std::set<std::string> outs(nl.outputs.begin(), nl.outputs.end());
    std::erase_if(out, [&](const std::string& id) { return outs.count(id) != 0; });
  }
  return out;
}

// Moves the logic driving `w` onto a fresh id and returns it; `w` keeps its
// name (and output role) so the caller can retype it in place.
std::string detach_driver(Workspace& ws, const std::string& w) {
  const Node nd = ws.node(w);
  const std::string cut = ws.fresh(w + "_pre");
  ws.add(cut, nd.kind, nd.fanin);
  ws.node(cut).lut_table = nd.lut_table;
  return cut;
}

void retype(Workspace& ws, const std::string& id, GateKind kind, std::vector<std::string> fanin) {
  ws.set_fanin(id, std::move(fanin));
  Node& nd = ws.node(id);
  nd.kind = kind;
  nd.lut_table.clear();
}

std::string add_key_input(Workspace& ws, const Netlist& nl, std::size_t index) {
  const std::string kid = key_name(nl, index);
  if (ws.has(kid)) throw NetlistError("key input name '" + kid + "' collides with a signal");
  ws.add(kid, GateKind::Input, {});
  return kid;
}

// Single AND over the group, or the signal itself when the group is a singleton.
std::string and_group(Workspace& ws, const std::vector<std::string>& sigs,
                      const std::string& base) {
  if (sigs.size() == 1) return sigs.front();
  const std::string id = ws.fresh(base);
  ws.add(id, GateKind::And, sigs);
  return id;
}

// Outputs driven by a gate (retypable in place).
std::vector<std::string> gate_driven_outputs(const Netlist& nl) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const std::string& o : nl.outputs)
    if (nl.node(o).kind != GateKind::Input && seen.insert(o).second) out.push_back(o);
  return out;
}

LockedCircuit finish(Workspace& ws, Key key, const Netlist& src, std::string scheme,
                     std::uint64_t seed, std::map<std::string, std::string> params) {
  LockedCircuit lc;
  lc.netlist = ws.build();
  lc.key = std::move(key);
  lc.scheme = std::move(scheme);
  lc.seed = seed;
  lc.params = std::move(params);
  lc.original_name = src.name;
  if (lc.netlist.p() != lc.key.width())
    throw NetlistError("internal: key input count does not match key width");
  return lc;
}

constexpr std::uint64_t kUnsailSalt = 0x1b5336f0c9d2a47bULL;

}  // namespace

LockedCircuit lock_xor(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params) {
  if (width < 1) throw NetlistError("key width must be positive");
  require_keyfree(nl);
  const std::vector<std::string> candidates = gate_candidates(nl, params);
  if (static_cast<int>(candidates.size()) < width)
    throw NetlistError("not enough lockable wires for the requested key width");

  rng::Engine eng(seed);
  const std::vector<std::size_t> picks = rng::sample_distinct(eng, candidates.size(),
                                                              static_cast<std::size_t>(width));
  Workspace ws(nl);
  Key key;
  for (int i = 0; i < width; ++i) {
    const std::string& w = candidates[picks[static_cast<std::size_t>(i)]];
    const std::uint8_t bit = rng::coin(eng) ? 1 : 0;
    const std::string kid = add_key_input(ws, nl, static_cast<std::size_t>(i));
    const std::string cut = detach_driver(ws, w);
    // XOR passes the wire through under bit 0, XNOR under bit 1.
    retype(ws, w, bit ? GateKind::Xnor : GateKind::Xor, {cut, kid});
    key.bits.push_back(bit);
    key.provenance[i] = w;
  }
  return finish(ws, std::move(key), nl, "xor", seed, params);
}

LockedCircuit lock_mux(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params) {
  if (width < 1) throw NetlistError("key width must be positive");
  require_keyfree(nl);
  const std::vector<std::string> candidates = gate_candidates(nl, params);
  if (static_cast<int>(candidates.size()) < width)
    throw NetlistError("not enough lockable wires for the requested key width");

  rng::Engine eng(seed);
  const std::vector<std::size_t> picks = rng::sample_distinct(eng, candidates.size(),
                                                              static_cast<std::size_t>(width));
  std::vector<std::string> originals;
  for (const Node& nd : nl.nodes) originals.push_back(nd.id);

  Workspace ws(nl);
  Key key;
  for (int i = 0; i < width; ++i) {
    const std::string& w = candidates[picks[static_cast<std::size_t>(i)]];

    // Transitive fan-out of w in the current graph; a dummy inside it would
    // close a combinational loop through the multiplexer.
    std::set<std::string> tfo{w};
    std::queue<std::string> bfs;
    bfs.push(w);
    while (!bfs.empty()) {
      const std::string cur = bfs.front();
      bfs.pop();
      for (const std::string& c : ws.consumers(cur))
        if (tfo.insert(c).second) bfs.push(c);
    }

    // Dummies are gate outputs that keep their existing readers, so the true
    // wire is the mux data leg whose driver has exactly one consumer. Small
    // circuits can run out of gate outputs (every gate ends up downstream of
    // w once earlier muxes borrow it as a dummy); then an already-read
    // primary input serves, which preserves the same single-consumer rule.
    std::vector<std::string> dummies;
    for (const std::string& d : originals)
      if (!tfo.count(d) && ws.has(d) && ws.node(d).kind != GateKind::Input &&
          !ws.consumers(d).empty())
        dummies.push_back(d);
    if (dummies.empty())
      for (const std::string& d : originals)
        if (!tfo.count(d) && ws.has(d) && ws.node(d).kind == GateKind::Input &&
            !ws.consumers(d).empty())
          dummies.push_back(d);
    if (dummies.empty())
      throw NetlistError("no acyclic dummy wire available for locked wire '" + w + "'");
    const std::string& d = dummies[rng::below(eng, dummies.size())];

    const std::uint8_t bit = rng::coin(eng) ? 1 : 0;
    const std::string kid = add_key_input(ws, nl, static_cast<std::size_t>(i));
    const std::string cut = detach_driver(ws, w);
    // Mux2 fan-in is [selector, d0, d1] with the true wire always on d0, the
    // leg a zero selector picks. A key bit of 1 routes the key input through
    // an inverter instead of swapping the data legs: leg order would vanish
    // in the unordered graph view, whereas the selector inverter is the kind
    // of polarity structure synthesis leaves behind.
    std::string sel = kid;
    if (bit) {
      sel = ws.fresh(kid + "_n");
      ws.add(sel, GateKind::Not, {kid});
    }
    retype(ws, w, GateKind::Mux2, {sel, cut, d});
    key.bits.push_back(bit);
    key.provenance[i] = w;
  }
  return finish(ws, std::move(key), nl, "mux", seed, params);
}

LockedCircuit lock_lut(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params) {
  if (width < 1) throw NetlistError("key width must be positive");
  require_keyfree(nl);
  const int k = param_int(params, "lut_k", 2);
  if (k < 1 || k > 6) throw NetlistError("lut_k must be in [1, 6]");
  const int per = 1 << k;
  if (width % per != 0)
    throw NetlistError("key width must be a multiple of 2^lut_k (" + std::to_string(per) + ")");
  const int ngates = width / per;

  std::vector<std::string> candidates;
  for (const std::string& c : gate_candidates(nl, params))
    if (nl.node(c).fanin.size() == static_cast<std::size_t>(k)) candidates.push_back(c);
  if (static_cast<int>(candidates.size()) < ngates)
    throw NetlistError("not enough fan-in-" + std::to_string(k) + " gates to replace");

  rng::Engine eng(seed);
  const std::vector<std::size_t> picks = rng::sample_distinct(eng, candidates.size(),
                                                              static_cast<std::size_t>(ngates));
  Workspace ws(nl);
  Key key;
  key.bits.resize(static_cast<std::size_t>(width));
  for (int q = 0; q < ngates; ++q) {
    const std::string g = candidates[picks[static_cast<std::size_t>(q)]];
    const Node orig = ws.node(g);

    std::vector<std::string> negated(orig.fanin.size());
    for (std::size_t j = 0; j < orig.fanin.size(); ++j) {
      negated[j] = ws.fresh(orig.fanin[j] + "_n");
      ws.add(negated[j], GateKind::Not, {orig.fanin[j]});
    }

    // One key bit per table row; the correct nibble is the replaced gate's
    // truth table. Row t reads fan-in j as bit (k-1-j) of t.
    std::vector<std::string> selects;
    for (int t = 0; t < per; ++t) {
      std::vector<bool> inputs(static_cast<std::size_t>(k));
      std::vector<std::string> literals(static_cast<std::size_t>(k));
      for (int j = 0; j < k; ++j) {
        const bool bit = (t >> (k - 1 - j)) & 1;
        inputs[static_cast<std::size_t>(j)] = bit;
        literals[static_cast<std::size_t>(j)] =
            bit ? orig.fanin[static_cast<std::size_t>(j)] : negated[static_cast<std::size_t>(j)];
      }
      const int bit_index = q * per + t;
      const std::string kid = add_key_input(ws, nl, static_cast<std::size_t>(bit_index));

      std::string minterm;
      if (k == 1) {
        minterm = literals[0];
      } else {
        minterm = ws.fresh(g + "_m" + std::to_string(t));
        ws.add(minterm, GateKind::And, literals);
      }
      const std::string select = ws.fresh(g + "_s" + std::to_string(t));
      ws.add(select, GateKind::And, {minterm, kid});
      selects.push_back(select);

      key.bits[static_cast<std::size_t>(bit_index)] = gate_eval(orig, inputs) ? 1 : 0;
      key.provenance[bit_index] = select;
    }
    retype(ws, g, GateKind::Or, selects);
  }
  return finish(ws, std::move(key), nl, "lut", seed, params);
}

LockedCircuit lock_sar(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params) {
  if (width < 1) throw NetlistError("key width must be positive");
  require_keyfree(nl);
  if (nl.n() < static_cast<std::size_t>(width))
    throw NetlistError("key width exceeds the primary input count");

  rng::Engine eng(seed);
  const std::vector<std::size_t> xsel =
      rng::sample_distinct(eng, nl.n(), static_cast<std::size_t>(width));
  std::vector<std::uint8_t> kstar(static_cast<std::size_t>(width));
  for (auto& b : kstar) b = rng::coin(eng) ? 1 : 0;

  const std::vector<std::string> targets = gate_driven_outputs(nl);
  if (targets.empty()) throw NetlistError("no gate-driven output to protect");
  const std::string out = targets[rng::below(eng, targets.size())];

  Workspace ws(nl);
  Key key;
  std::vector<std::string> eqs, lits;
  for (int i = 0; i < width; ++i) {
    const std::string& x = nl.primary_inputs[xsel[static_cast<std::size_t>(i)]];
    const std::string kid = add_key_input(ws, nl, static_cast<std::size_t>(i));
    const std::string eq = ws.fresh("sareq" + std::to_string(i));
    ws.add(eq, GateKind::Xnor, {x, kid});
    eqs.push_back(eq);
    // Mask literal: pass the key input through when the correct bit is 1,
    // invert it when 0, so the mask fires only on the correct key.
    if (kstar[static_cast<std::size_t>(i)]) {
      lits.push_back(kid);
    } else {
      const std::string ml = ws.fresh("sarml" + std::to_string(i));
      ws.add(ml, GateKind::Not, {kid});
      lits.push_back(ml);
    }
    key.bits.push_back(kstar[static_cast<std::size_t>(i)]);
    key.provenance[i] = eq;
  }
  const std::string cmp = and_group(ws, eqs, "sarcmp");
  const std::string msk = and_group(ws, lits, "sarmsk");
  const std::string nmsk = ws.fresh("sarnm");
  ws.add(nmsk, GateKind::Not, {msk});
  const std::string flip = ws.fresh("sarflip");
  ws.add(flip, GateKind::And, {cmp, nmsk});

  const std::string cut = detach_driver(ws, out);
  retype(ws, out, GateKind::Xor, {cut, flip});
  return finish(ws, std::move(key), nl, "sar", seed, params);
}

LockedCircuit lock_antisat(const Netlist& nl, int width, std::uint64_t seed,
                           const std::map<std::string, std::string>& params) {
  if (width < 2 || width % 2 != 0) throw NetlistError("key width must be even and at least 2");
  require_keyfree(nl);
  const int half = width / 2;
  if (nl.n() < static_cast<std::size_t>(half))
    throw NetlistError("half key width exceeds the primary input count");

  rng::Engine eng(seed);
  const std::vector<std::size_t> xsel =
      rng::sample_distinct(eng, nl.n(), static_cast<std::size_t>(half));
  std::vector<std::uint8_t> r(static_cast<std::size_t>(half));
  for (auto& b : r) b = rng::coin(eng) ? 1 : 0;

  const std::vector<std::string> targets = gate_driven_outputs(nl);
  if (targets.empty()) throw NetlistError("no gate-driven output to protect");
  const std::string out = targets[rng::below(eng, targets.size())];

  Workspace ws(nl);
  Key key;
  key.bits.resize(static_cast<std::size_t>(width));
  std::vector<std::string> as, bs;
  for (int i = 0; i < half; ++i) {
    const std::string& x = nl.primary_inputs[xsel[static_cast<std::size_t>(i)]];
    const std::string ka = add_key_input(ws, nl, static_cast<std::size_t>(i));
    const std::string a = ws.fresh("asata" + std::to_string(i));
    ws.add(a, GateKind::Xor, {x, ka});
    as.push_back(a);
    key.bits[static_cast<std::size_t>(i)] = r[static_cast<std::size_t>(i)];
    key.provenance[i] = a;
  }
  for (int i = 0; i < half; ++i) {
    const std::string& x = nl.primary_inputs[xsel[static_cast<std::size_t>(i)]];
    const std::string kb = add_key_input(ws, nl, static_cast<std::size_t>(half + i));
    const std::string b = ws.fresh("asatb" + std::to_string(i));
    ws.add(b, GateKind::Xor, {x, kb});
    bs.push_back(b);
    key.bits[static_cast<std::size_t>(half + i)] = r[static_cast<std::size_t>(i)];
    key.provenance[half + i] = b;
  }
  // blk = g(X^Kl1) AND NOT g(X^Kl2); identically 0 exactly when Kl1 = Kl2.
  const std::string g1 = and_group(ws, as, "asatg1");
  const std::string g2 = and_group(ws, bs, "asatg2");
  const std::string ng2 = ws.fresh("asatn");
  ws.add(ng2, GateKind::Not, {g2});
  const std::string blk = ws.fresh("asatblk");
  ws.add(blk, GateKind::And, {g1, ng2});

  const std::string cut = detach_driver(ws, out);
  retype(ws, out, GateKind::Xor, {cut, blk});
  return finish(ws, std::move(key), nl, "antisat", seed, params);
}

LockedCircuit lock_ble(const Netlist& nl, int width, std::uint64_t seed,
                       const std::map<std::string, std::string>& params) {
  if (width < 1) throw NetlistError("key width must be positive");
  require_keyfree(nl);
  if (nl.n() == 0) throw NetlistError("scheme needs at least one primary input");
  const int region_size = param_int(params, "region_size", 8);
  if (region_size < 1) throw NetlistError("region_size must be positive");

  rng::Engine eng(seed);
  std::vector<std::uint8_t> kstar(static_cast<std::size_t>(width));
  for (auto& b : kstar) b = rng::coin(eng) ? 1 : 0;

  const std::vector<std::string> targets = gate_driven_outputs(nl);
  if (targets.empty()) throw NetlistError("no gate-driven output to protect");
  const std::string start = targets[rng::below(eng, targets.size())];

  // Connected gate region grown from a primary-output driver over fan-in and
  // fan-out edges.
  const std::vector<std::vector<std::string>> fanouts = nl.fanouts();
  std::set<std::string> region{start};
  std::vector<std::string> region_order{start};
  std::queue<std::string> bfs;
  bfs.push(start);
  while (!bfs.empty() && static_cast<int>(region.size()) < region_size) {
    const std::string cur = bfs.front();
    bfs.pop();
    std::vector<std::string> neighbors;
    for (const std::string& src : nl.node(cur).fanin)
      if (nl.node(src).kind != GateKind::Input) neighbors.push_back(src);
    for (const std::string& c : fanouts[nl.node_index(cur)]) neighbors.push_back(c);
    for (const std::string& nb : neighbors) {
      if (static_cast<int>(region.size()) >= region_size) break;
      if (region.insert(nb).second) {
        region_order.push_back(nb);
        bfs.push(nb);
      }
    }
  }

  Workspace ws(nl);
  Key key;
  std::vector<std::string> eqs;
  for (int i = 0; i < width; ++i) {
    const std::string kid = add_key_input(ws, nl, static_cast<std::size_t>(i));
    // Constant gadget: a chain of inverters and buffers over a random
    // primary input, closed by an XNOR of the chain's two ends. The
    // constant's value is the parity of the inverter count, so no
    // fixed-radius neighborhood of the comparator determines it — the local
    // structure around the key gate carries no information about the bit.
    const std::string& pi = nl.primary_inputs[rng::below(eng, nl.n())];
    constexpr int kChainLen = 6;
    std::string prev = pi;
    int inversions = 0;
    for (int j = 0; j < kChainLen; ++j) {
      const bool invert = rng::coin(eng);
      const std::string link = ws.fresh("blep" + std::to_string(i));
      ws.add(link, invert ? GateKind::Not : GateKind::Buf, {prev});
      inversions += invert ? 1 : 0;
      prev = link;
    }
    const std::string cg = ws.fresh("blec" + std::to_string(i));
    ws.add(cg, GateKind::Xnor, {prev, pi});
    const std::uint8_t cval = inversions % 2 == 0 ? 1 : 0;
    const GateKind eq_kind =
        cval == kstar[static_cast<std::size_t>(i)] ? GateKind::Xnor : GateKind::Xor;
    const std::string eq = ws.fresh("bleq" + std::to_string(i));
    ws.add(eq, eq_kind, {kid, cg});
    eqs.push_back(eq);
    key.bits.push_back(kstar[static_cast<std::size_t>(i)]);
    key.provenance[i] = eq;
  }
  const std::string eqall = and_group(ws, eqs, "bleqall");
  const std::string wrong = ws.fresh("blewrong");
  ws.add(wrong, GateKind::Not, {eqall});

  // Mask every region boundary signal: readers inside the region keep the
  // clean value, everything downstream (including the primary output that
  // seeded the region) sees the XOR with the wrong-key flag.
  for (const std::string& r : region_order) {
    bool boundary = false;
    for (const std::string& o : nl.outputs) boundary |= (o == r);
    for (const std::string& c : fanouts[nl.node_index(r)]) boundary |= !region.count(c);
    if (!boundary) continue;
    const std::string cut = detach_driver(ws, r);
    for (const std::string& c : std::vector<std::string>(ws.consumers(r)))
      if (region.count(c)) ws.repoint(c, r, cut);
    retype(ws, r, GateKind::Xor, {cut, wrong});
  }
  return finish(ws, std::move(key), nl, "ble", seed, params);
}

LockedCircuit lock_unsail(const Netlist& nl, int width, std::uint64_t seed,
                          const std::map<std::string, std::string>& params) {
  LockedCircuit lc = lock_xor(nl, width, seed, params);
  lc.scheme = "unsail";

  const std::vector<std::string> gates = key_gates(lc.netlist, lc.key);
  const std::set<std::string> fence(gates.begin(), gates.end());
  std::set<std::string> po(lc.netlist.outputs.begin(), lc.netlist.outputs.end());
  std::vector<std::size_t> absorbable;
  for (std::size_t i = 0; i < gates.size(); ++i)
    if (!po.count(gates[i])) absorbable.push_back(i);

  // Swap the kind on half the key gates and absorb the induced inversion into
  // the fan-out; the key bits stay put, so kind no longer encodes the bit.
  rng::Engine eng(rng::splitmix64(seed ^ kUnsailSalt));
  const std::vector<std::size_t> chosen =
      rng::sample_distinct(eng, absorbable.size(), absorbable.size() / 2);
  edit::Workspace ws(lc.netlist);
  for (std::size_t idx : chosen) {
    const std::string& g = gates[absorbable[idx]];
    Node& nd = ws.node(g);
    nd.kind = nd.kind == GateKind::Xor ? GateKind::Xnor : GateKind::Xor;
    edit::push_inversion(ws, g, fence);
  }
  ws.sweep_dead(fence);
  lc.netlist = ws.build();
  return lc;
}

LockedCircuit lock(const Netlist& nl, const LockRecipe& recipe) {
  if (recipe.scheme == "xor") return lock_xor(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "mux") return lock_mux(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "lut") return lock_lut(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "sar") return lock_sar(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "antisat")
    return lock_antisat(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "ble") return lock_ble(nl, recipe.key_width, recipe.seed, recipe.params);
  if (recipe.scheme == "unsail")
    return lock_unsail(nl, recipe.key_width, recipe.seed, recipe.params);
  throw NetlistError("unknown locking scheme '" + recipe.scheme + "'");
}

namespace {

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NetlistError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw NetlistError("failed writing '" + path.string() + "'");
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetlistError("cannot open '" + path.string() + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw NetlistError("invalid JSON in '" + path.string() + "': " + e.what());
  }
  return j;
}

}  // namespace

void save_locked(const LockedCircuit& lc, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_bench_file(lc.netlist, dir / "locked.bench");

  json k;
  k["scheme"] = lc.scheme;
  k["seed"] = lc.seed;
  k["width"] = lc.key.width();
  k["bits"] = lc.key.bit_string();
  k["original_name"] = lc.original_name;
  k["params"] = json::object();
  for (const auto& [name, value] : lc.params) k["params"][name] = value;
  k["provenance"] = json::object();
  for (const auto& [bit, gate] : lc.key.provenance) k["provenance"][std::to_string(bit)] = gate;
  write_text_file(dir / "key.json", k.dump(2) + "\n");

  json m;
  m["name"] = lc.netlist.name;
  m["original_name"] = lc.original_name;
  m["scheme"] = lc.scheme;
  m["seed"] = lc.seed;
  m["key_width"] = lc.key.width();
  m["primary_inputs"] = lc.netlist.n();
  m["outputs"] = lc.netlist.m();
  std::size_t gates = 0;
  for (const Node& nd : lc.netlist.nodes)
    if (nd.kind != GateKind::Input) ++gates;
  m["gates"] = gates;
  write_text_file(dir / "meta.json", m.dump(2) + "\n");
}

LockedCircuit load_locked(const std::filesystem::path& dir) {
  LockedCircuit lc;
  lc.netlist = parse_bench_file(dir / "locked.bench");
  const json k = read_json_file(dir / "key.json");
  try {
    lc.scheme = k.at("scheme").get<std::string>();
    lc.seed = k.at("seed").get<std::uint64_t>();
    lc.key.bits = Key::bits_from_string(k.at("bits").get<std::string>());
    lc.original_name = k.value("original_name", "");
    if (k.contains("params"))
      for (const auto& [name, value] : k.at("params").items())
        lc.params[name] = value.get<std::string>();
    if (k.contains("provenance"))
      for (const auto& [bit, gate] : k.at("provenance").items())
        lc.key.provenance[std::stoi(bit)] = gate.get<std::string>();
  } catch (const json::exception& e) {
    throw NetlistError("malformed key.json: " + std::string(e.what()));
  }
  if (lc.key.width() != lc.netlist.p())
    throw NetlistError("key width in key.json does not match the netlist's key inputs");
  for (const auto& [bit, gate] : lc.key.provenance)
    if (bit < 0 || static_cast<std::size_t>(bit) >= lc.key.width() || !lc.netlist.has_node(gate))
      throw NetlistError("provenance entry out of range or naming a missing gate");
  return lc;
}

std::vector<std::string> key_gates(const Netlist& nl, const Key& key) {
  const std::size_t width = key.bits.empty() ? nl.p() : key.width();
  if (width > nl.p()) throw NetlistError("key is wider than the netlist's key inputs");
  std::vector<std::string> out(width);
  for (std::size_t i = 0; i < width; ++i) {
    auto it = key.provenance.find(static_cast<int>(i));
    if (it != key.provenance.end() && nl.has_node(it->second)) {
      out[i] = it->second;
      continue;
    }
    const std::string& kid = nl.key_inputs[i];
    bool found = false;
    for (const Node& nd : nl.nodes) {
      for (const std::string& src : nd.fanin)
        if (src == kid) {
          out[i] = nd.id;
          found = true;
          break;
        }
      if (found) break;
    }
    if (!found) throw NetlistError("key input '" + kid + "' drives no gate");
  }
  return out;
}

}  // namespace locksmith
