#include "locksmith/netlist.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

namespace locksmith {

namespace {

constexpr std::string_view kKindNames[kGateKindCount] = {
    "INPUT", "OUTPUT_TAP", "AND", "NAND", "OR", "NOR",
    "XOR",   "XNOR",       "NOT", "BUFF", "MUX", "LUT"};

std::string upper(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

// Numeric suffix after the key prefix, or -1 when the id is not a key input.
long key_suffix(std::string_view id, std::string_view prefix) {
  if (id.size() <= prefix.size() || id.substr(0, prefix.size()) != prefix) return -1;
  long value = 0;
  for (char c : id.substr(prefix.size())) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return -1;
    value = value * 10 + (c - '0');
    if (value > 1'000'000'000L) return -1;
  }
  return value;
}

}  // namespace

std::string_view to_string(GateKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<GateKind> gate_kind_from(std::string_view name) {
  const std::string u = upper(name);
  if (u == "BUF" || u == "BUFF") return GateKind::Buf;
  if (u == "MUX" || u == "MUX2") return GateKind::Mux2;
  for (int i = 0; i < kGateKindCount; ++i) {
    if (u == kKindNames[i]) return static_cast<GateKind>(i);
  }
  return std::nullopt;
}

std::pair<int, int> arity_range(GateKind kind) {
  switch (kind) {
    case GateKind::Input: return {0, 0};
    case GateKind::OutputTap:
    case GateKind::Not:
    case GateKind::Buf: return {1, 1};
    case GateKind::Mux2: return {3, 3};
    case GateKind::Lut: return {1, 10};
    default: return {2, -1};
  }
}

bool gate_eval(const Node& node, const std::vector<bool>& in) {
  switch (node.kind) {
    case GateKind::Input:
      throw NetlistError("gate_eval: input node '" + node.id + "' has no gate function");
    case GateKind::OutputTap:
    case GateKind::Buf: return in[0];
    case GateKind::Not: return !in[0];
    case GateKind::And: {
      for (bool b : in) if (!b) return false;
      return true;
    }
    case GateKind::Nand: {
      for (bool b : in) if (!b) return true;
      return false;
    }
    case GateKind::Or: {
      for (bool b : in) if (b) return true;
      return false;
    }
    case GateKind::Nor: {
      for (bool b : in) if (b) return false;
      return true;
    }
    case GateKind::Xor: {  // n-ary parity
      bool acc = false;
      for (bool b : in) acc ^= b;
      return acc;
    }
    case GateKind::Xnor: {
      bool acc = true;
      for (bool b : in) acc ^= b;
      return acc;
    }
    case GateKind::Mux2: return in[0] ? in[2] : in[1];
    case GateKind::Lut: {
      std::size_t t = 0;
      for (bool b : in) t = (t << 1) | (b ? 1u : 0u);
      return node.lut_table[t] != 0;
    }
  }
  return false;
}

bool Netlist::has_node(std::string_view id) const {
  if (!index_valid_) rebuild_index();
  return index_.count(std::string(id)) != 0;
}

std::size_t Netlist::node_index(std::string_view id) const {
  if (!index_valid_) rebuild_index();
  auto it = index_.find(std::string(id));
  if (it == index_.end()) throw NetlistError("unknown signal '" + std::string(id) + "'");
  return it->second;
}

const Node& Netlist::node(std::string_view id) const { return nodes[node_index(id)]; }
Node& Netlist::node(std::string_view id) {
  return nodes[static_cast<const Netlist*>(this)->node_index(id)];
}

void Netlist::rebuild_index() const {
  index_.clear();
  index_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) index_.emplace(nodes[i].id, i);
  index_valid_ = true;
}

std::vector<std::vector<std::string>> Netlist::fanouts() const {
  std::vector<std::vector<std::string>> out(nodes.size());
  for (const Node& nd : nodes) {
    for (const std::string& src : nd.fanin) out[node_index(src)].push_back(nd.id);
  }
  return out;
}

Netlist parse_bench(std::string_view text, const ParseOptions& opts) {
  Netlist nl;
  nl.key_prefix = opts.key_prefix;
  std::set<std::string> defined;
  std::vector<std::string> inputs_in_order;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    std::string_view raw = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos
                                                                          : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string line(raw);
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    // trim
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    std::size_t b = 0, e = line.size();
    while (b < e && is_space(line[b])) ++b;
    while (e > b && is_space(line[e - 1])) --e;
    line = line.substr(b, e - b);
    if (line.empty()) continue;

    auto syntax_error = [&](const std::string& msg, int col) -> NetlistError {
      std::ostringstream os;
      os << "syntax error at line " << line_no << ", col " << col << ": " << msg;
      return NetlistError(os.str(), line_no, col);
    };

    const std::size_t eq = line.find('=');
    const std::size_t lparen = line.find('(');
    if (eq == std::string::npos || (lparen != std::string::npos && lparen < eq)) {
      // INPUT(x) or OUTPUT(y)
      if (lparen == std::string::npos || line.back() != ')')
        throw syntax_error("expected INPUT(..), OUTPUT(..) or '<id> = GATE(..)'", 1);
      std::string head = line.substr(0, lparen);
      while (!head.empty() && is_space(head.back())) head.pop_back();
      std::string arg = line.substr(lparen + 1, line.size() - lparen - 2);
      std::size_t ab = 0, ae = arg.size();
      while (ab < ae && is_space(arg[ab])) ++ab;
      while (ae > ab && is_space(arg[ae - 1])) --ae;
      arg = arg.substr(ab, ae - ab);
      if (arg.empty()) throw syntax_error("empty signal name", static_cast<int>(lparen) + 2);
      const std::string keyword = upper(head);
      if (keyword == "INPUT") {
        if (defined.count(arg))
          throw syntax_error("duplicate definition of '" + arg + "'", 1);
        defined.insert(arg);
        inputs_in_order.push_back(arg);
        nl.nodes.push_back(Node{arg, GateKind::Input, {}, {}});
      } else if (keyword == "OUTPUT") {
        if (std::find(nl.outputs.begin(), nl.outputs.end(), arg) != nl.outputs.end())
          throw syntax_error("duplicate output declaration '" + arg + "'", 1);
        nl.outputs.push_back(arg);
      } else {
        throw syntax_error("unknown directive '" + head + "'", 1);
      }
      continue;
    }

    // <id> = KIND(a, b, ...)
    std::string lhs = line.substr(0, eq);
    while (!lhs.empty() && is_space(lhs.back())) lhs.pop_back();
    if (lhs.empty()) throw syntax_error("missing signal name before '='", 1);
    std::string rhs = line.substr(eq + 1);
    std::size_t rb = 0;
    while (rb < rhs.size() && is_space(rhs[rb])) ++rb;
    rhs = rhs.substr(rb);
    const std::size_t rl = rhs.find('(');
    if (rl == std::string::npos || rhs.back() != ')')
      throw syntax_error("expected '<id> = GATE(a, ...)'", static_cast<int>(eq) + 2);
    std::string gate_name = rhs.substr(0, rl);
    while (!gate_name.empty() && is_space(gate_name.back())) gate_name.pop_back();
    const auto kind = gate_kind_from(gate_name);
    if (!kind || *kind == GateKind::Input || *kind == GateKind::Lut ||
        *kind == GateKind::OutputTap)
      throw syntax_error("unknown gate '" + gate_name + "'", static_cast<int>(eq) + 2);

    std::vector<std::string> fanin;
    std::string args = rhs.substr(rl + 1, rhs.size() - rl - 2);
    std::size_t start = 0;
    while (start <= args.size()) {
      std::size_t comma = args.find(',', start);
      std::string tok = args.substr(start, comma == std::string::npos ? std::string::npos
                                                                      : comma - start);
      std::size_t tb = 0, te = tok.size();
      while (tb < te && is_space(tok[tb])) ++tb;
      while (te > tb && is_space(tok[te - 1])) --te;
      tok = tok.substr(tb, te - tb);
      if (tok.empty()) {
        if (comma != std::string::npos || !fanin.empty())
          throw syntax_error("empty fan-in entry", static_cast<int>(rl) + 2);
      } else {
        fanin.push_back(tok);
      }
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    if (defined.count(lhs)) throw syntax_error("duplicate definition of '" + lhs + "'", 1);
    defined.insert(lhs);
    nl.nodes.push_back(Node{lhs, *kind, std::move(fanin), {}});
  }

  // Split inputs into primary and key inputs by name.
  for (const std::string& id : inputs_in_order) {
    if (key_suffix(id, nl.key_prefix) >= 0)
      nl.key_inputs.push_back(id);
    else
      nl.primary_inputs.push_back(id);
  }
  nl.rebuild_index();
  validate(nl);
  return nl;
}

Netlist parse_bench_file(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetlistError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  Netlist nl = parse_bench(ss.str(), opts);
  nl.name = path.stem().string();
  return nl;
}

std::vector<std::string> topological_order(const Netlist& nl) {
  std::unordered_map<std::string, int> missing;
  std::unordered_map<std::string, std::vector<std::string>> consumers;
  missing.reserve(nl.nodes.size());
  for (const Node& nd : nl.nodes) {
    missing[nd.id] = static_cast<int>(nd.fanin.size());
    for (const std::string& src : nd.fanin) consumers[src].push_back(nd.id);
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const Node& nd : nl.nodes)
    if (nd.fanin.empty()) ready.push(nd.id);

  std::vector<std::string> order;
  order.reserve(nl.nodes.size());
  while (!ready.empty()) {
    std::string id = ready.top();
    ready.pop();
    order.push_back(id);
    auto it = consumers.find(id);
    if (it == consumers.end()) continue;
    for (const std::string& next : it->second) {
      if (--missing[next] == 0) ready.push(next);
    }
  }
  if (order.size() != nl.nodes.size()) {
    for (const Node& nd : nl.nodes) {
      if (missing[nd.id] > 0) throw NetlistError("cycle through signal '" + nd.id + "'");
    }
  }
  return order;
}

void validate(Netlist& nl) {
  std::set<std::string> seen;
  for (const Node& nd : nl.nodes) {
    if (nd.id.empty()) throw NetlistError("empty signal id");
    if (!seen.insert(nd.id).second)
      throw NetlistError("duplicate definition of '" + nd.id + "'");
  }
  nl.rebuild_index();

  for (const Node& nd : nl.nodes) {
    const auto [lo, hi] = arity_range(nd.kind);
    const int a = static_cast<int>(nd.fanin.size());
    if (a < lo || (hi >= 0 && a > hi)) {
      std::ostringstream os;
      os << "gate '" << nd.id << "' (" << to_string(nd.kind) << ") has arity " << a;
      throw NetlistError(os.str());
    }
    if (nd.kind == GateKind::Lut) {
      const std::size_t want = std::size_t{1} << nd.fanin.size();
      if (nd.lut_table.size() != want)
        throw NetlistError("LUT '" + nd.id + "' table size mismatch");
    }
    for (const std::string& src : nd.fanin) {
      if (!nl.has_node(src))
        throw NetlistError("undefined signal '" + src + "' in fan-in of '" + nd.id + "'");
    }
  }

  // Input bookkeeping: every Input node appears in exactly one of the two
  // lists, and the split follows the key-prefix naming rule.
  std::set<std::string> declared;
  for (const std::string& id : nl.primary_inputs) declared.insert(id);
  for (const std::string& id : nl.key_inputs) {
    if (!declared.insert(id).second)
      throw NetlistError("input '" + id + "' listed twice");
  }
  std::vector<std::pair<long, std::string>> keys;
  std::vector<std::string> primaries;
  for (const Node& nd : nl.nodes) {
    if (nd.kind == GateKind::Input) {
      if (!declared.count(nd.id))
        throw NetlistError("input '" + nd.id + "' missing from input lists");
      long suffix = key_suffix(nd.id, nl.key_prefix);
      if (suffix >= 0)
        keys.emplace_back(suffix, nd.id);
      else
        primaries.push_back(nd.id);
    } else if (declared.count(nd.id)) {
      throw NetlistError("signal '" + nd.id + "' is both a gate and an input");
    }
  }
  if (declared.size() != keys.size() + primaries.size())
    throw NetlistError("input list names a signal that is not an INPUT node");
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (keys[i].first == keys[i - 1].first)
      throw NetlistError("duplicate key input index " + std::to_string(keys[i].first));
  }
  // Preserve the original relative order of primary inputs.
  std::vector<std::string> primary_ordered;
  for (const std::string& id : nl.primary_inputs)
    if (key_suffix(id, nl.key_prefix) < 0) primary_ordered.push_back(id);
  for (const std::string& id : nl.key_inputs)
    if (key_suffix(id, nl.key_prefix) < 0) primary_ordered.push_back(id);
  if (primary_ordered.size() != primaries.size()) {
    primary_ordered = primaries;  // lists disagreed with node kinds; rebuild
  }
  nl.primary_inputs = primary_ordered;
  nl.key_inputs.clear();
  for (auto& [suffix, id] : keys) nl.key_inputs.push_back(id);

  for (const std::string& out : nl.outputs) {
    if (!nl.has_node(out)) throw NetlistError("undeclared output signal '" + out + "'");
  }

  // Topological normalization; throws on cycles.
  const std::vector<std::string> order = topological_order(nl);
  std::vector<Node> ordered;
  ordered.reserve(nl.nodes.size());
  for (const std::string& id : order) ordered.push_back(std::move(nl.node(id)));
  nl.nodes = std::move(ordered);
  nl.rebuild_index();
}

namespace {

std::string fresh_id(const std::string& base, std::set<std::string>& used) {
  std::string candidate = base;
  int i = 0;
  while (used.count(candidate)) candidate = base + "_" + std::to_string(++i);
  used.insert(candidate);
  return candidate;
}

void emit_gate(std::ostream& os, const std::string& id, std::string_view kind,
               const std::vector<std::string>& fanin) {
  os << id << " = " << kind << "(";
  for (std::size_t i = 0; i < fanin.size(); ++i) {
    if (i) os << ", ";
    os << fanin[i];
  }
  os << ")\n";
}

// Lowers a LUT to product terms over shared input literals. Returns the
// definition of `id` via emitted gates.
void emit_lut(std::ostream& os, const Node& nd, std::set<std::string>& used) {
  const std::size_t k = nd.fanin.size();
  std::vector<std::string> neg(k);
  auto negated = [&](std::size_t i) {
    if (neg[i].empty()) {
      neg[i] = fresh_id(nd.id + "_n" + std::to_string(i), used);
      emit_gate(os, neg[i], "NOT", {nd.fanin[i]});
    }
    return neg[i];
  };

  std::vector<std::size_t> minterms;
  for (std::size_t t = 0; t < nd.lut_table.size(); ++t)
    if (nd.lut_table[t]) minterms.push_back(t);

  if (minterms.empty()) {  // constant 0
    emit_gate(os, nd.id, "AND", {nd.fanin[0], negated(0)});
    return;
  }
  if (minterms.size() == nd.lut_table.size()) {  // constant 1
    emit_gate(os, nd.id, "OR", {nd.fanin[0], negated(0)});
    return;
  }

  std::vector<std::string> terms;
  for (std::size_t t : minterms) {
    std::vector<std::string> lits;
    for (std::size_t i = 0; i < k; ++i) {
      const bool hi = ((t >> (k - 1 - i)) & 1) != 0;
      lits.push_back(hi ? nd.fanin[i] : negated(i));
    }
    if (lits.size() == 1) {
      terms.push_back(lits[0]);
    } else {
      std::string tid = minterms.size() == 1
                            ? nd.id
                            : fresh_id(nd.id + "_t" + std::to_string(t), used);
      emit_gate(os, tid, "AND", lits);
      terms.push_back(tid);
    }
  }
  if (minterms.size() == 1) {
    if (terms[0] != nd.id) emit_gate(os, nd.id, "BUFF", {terms[0]});
    return;
  }
  emit_gate(os, nd.id, "OR", terms);
}

}  // namespace

std::string serialize_bench(const Netlist& nl) {
  std::ostringstream os;
  std::set<std::string> used;
  for (const Node& nd : nl.nodes) used.insert(nd.id);

  for (const std::string& id : nl.primary_inputs) os << "INPUT(" << id << ")\n";
  for (const std::string& id : nl.key_inputs) os << "INPUT(" << id << ")\n";
  for (const std::string& id : nl.outputs) os << "OUTPUT(" << id << ")\n";

  for (const Node& nd : nl.nodes) {
    switch (nd.kind) {
      case GateKind::Input: break;
      case GateKind::OutputTap:
        emit_gate(os, nd.id, "BUFF", nd.fanin);
        break;
      case GateKind::Mux2: {
        const std::string ns = fresh_id(nd.id + "_ns", used);
        const std::string a0 = fresh_id(nd.id + "_a0", used);
        const std::string a1 = fresh_id(nd.id + "_a1", used);
        emit_gate(os, ns, "NOT", {nd.fanin[0]});
        emit_gate(os, a0, "AND", {ns, nd.fanin[1]});
        emit_gate(os, a1, "AND", {nd.fanin[0], nd.fanin[2]});
        emit_gate(os, nd.id, "OR", {a0, a1});
        break;
      }
      case GateKind::Lut:
        emit_lut(os, nd, used);
        break;
      default:
        emit_gate(os, nd.id, to_string(nd.kind), nd.fanin);
        break;
    }
  }
  return os.str();
}

void write_bench_file(const Netlist& nl, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NetlistError("cannot write '" + path.string() + "'");
  out << serialize_bench(nl);
}

std::string Key::bit_string() const {
  std::string s;
  s.reserve(bits.size());
  for (std::uint8_t b : bits) s.push_back(b ? '1' : '0');
  return s;
}

std::vector<std::uint8_t> Key::bits_from_string(std::string_view s) {
  std::vector<std::uint8_t> bits;
  bits.reserve(s.size());
  for (char c : s) {
    if (c != '0' && c != '1') throw NetlistError("key bit string must be 0/1");
    bits.push_back(c == '1' ? 1 : 0);
  }
  return bits;
}

}  // namespace locksmith
