#include "locksmith/graph.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "bytes.hpp"
#include "locksmith/rng.hpp"

namespace locksmith::graph {

namespace {

std::uint64_t mix(std::uint64_t h, std::uint64_t x) { return rng::splitmix64(h ^ x); }

constexpr std::uint64_t kHashSeed = 0x6c62272e07bb0142ULL;
constexpr std::uint64_t kCenterTag = 0x9e3779b97f4a7c15ULL;

}  // namespace

int FeatureMap::column_of(GateKind kind) const {
  const int c = column[static_cast<std::size_t>(kind)];
  if (c < 0)
    throw NetlistError("gate kind '" + std::string(to_string(kind)) +
                       "' has no feature column in this map");
  return c;
}

bool FeatureMap::covers(const Netlist& nl) const {
  for (const Node& nd : nl.nodes)
    if (column[static_cast<std::size_t>(nd.kind)] < 0) return false;
  return true;
}

FeatureMap FeatureMap::first_appearance(const std::vector<const Netlist*>& corpus) {
  FeatureMap fm;
  fm.policy = "first_appearance";
  int next = 0;
  for (const Netlist* nl : corpus)
    for (const Node& nd : nl->nodes) {
      int& c = fm.column[static_cast<std::size_t>(nd.kind)];
      if (c < 0) c = next++;
    }
  for (int k = 0; k < kGateKindCount; ++k)
    if (fm.column[static_cast<std::size_t>(k)] < 0) fm.column[static_cast<std::size_t>(k)] = next++;
  return fm;
}

FeatureMap FeatureMap::random_assignment(std::uint64_t seed) {
  FeatureMap fm;
  fm.policy = "random";
  std::vector<int> cols(kGateKindCount);
  for (int k = 0; k < kGateKindCount; ++k) cols[static_cast<std::size_t>(k)] = k;
  rng::Engine eng(seed);
  rng::shuffle(eng, cols);
  for (int k = 0; k < kGateKindCount; ++k) fm.column[static_cast<std::size_t>(k)] = cols[static_cast<std::size_t>(k)];
  return fm;
}

FeatureMap FeatureMap::by_gate_count_desc(const std::vector<const Netlist*>& corpus) {
  FeatureMap fm;
  fm.policy = "by_gate_count_desc";
  std::array<std::size_t, kGateKindCount> count{};
  for (const Netlist* nl : corpus)
    for (const Node& nd : nl->nodes) ++count[static_cast<std::size_t>(nd.kind)];
  std::vector<int> order(kGateKindCount);
  for (int k = 0; k < kGateKindCount; ++k) order[static_cast<std::size_t>(k)] = k;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (count[static_cast<std::size_t>(a)] != count[static_cast<std::size_t>(b)])
      return count[static_cast<std::size_t>(a)] > count[static_cast<std::size_t>(b)];
    return a < b;
  });
  for (int pos = 0; pos < kGateKindCount; ++pos)
    fm.column[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] = pos;
  return fm;
}

std::vector<std::vector<std::int32_t>> CircuitGraph::neighbors() const {
  std::vector<std::vector<std::int32_t>> adj(node_count());
  for (const auto& [a, b] : edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

namespace {

void finalize_edges(std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
}

// Fills one feature row. The key-value column is written separately.
void write_row(CircuitGraph& g, std::size_t row, const Node& nd, const FeatureMap& fmap,
               bool is_pi, bool is_ki, bool is_out) {
  g.at(row, fmap.column_of(nd.kind)) = 1.0;
  g.at(row, kColPrimaryInput) = is_pi ? 1.0 : 0.0;
  g.at(row, kColKeyInput) = is_ki ? 1.0 : 0.0;
  g.at(row, kColOutput) = is_out ? 1.0 : 0.0;
  g.at(row, kColKeyValue) = kUnassignedKeyValue;
}

}  // namespace

CircuitGraph to_graph(const Netlist& nl, const FeatureMap& fmap, const std::optional<Key>& key) {
  if (key && key->bits.size() != nl.p())
    throw NetlistError("key width " + std::to_string(key->bits.size()) +
                       " does not match the netlist's " + std::to_string(nl.p()) + " key inputs");

  CircuitGraph g;
  g.name = nl.name;
  g.ids.reserve(nl.nodes.size());
  for (const Node& nd : nl.nodes) g.ids.push_back(nd.id);
  g.x.assign(g.ids.size() * kFeatureDim, 0.0);

  const std::unordered_set<std::string> pis(nl.primary_inputs.begin(), nl.primary_inputs.end());
  const std::unordered_set<std::string> outs(nl.outputs.begin(), nl.outputs.end());
  std::unordered_map<std::string, int> key_pos;
  for (std::size_t i = 0; i < nl.key_inputs.size(); ++i)
    key_pos.emplace(nl.key_inputs[i], static_cast<int>(i));

  for (std::size_t r = 0; r < nl.nodes.size(); ++r) {
    const Node& nd = nl.nodes[r];
    const auto ki = key_pos.find(nd.id);
    write_row(g, r, nd, fmap, pis.count(nd.id) > 0, ki != key_pos.end(), outs.count(nd.id) > 0);
    if (ki != key_pos.end() && key)
      g.at(r, kColKeyValue) = key->bits[static_cast<std::size_t>(ki->second)] ? 1.0 : 0.0;
    for (const std::string& f : nd.fanin) {
      const auto a = static_cast<std::int32_t>(nl.node_index(f));
      const auto b = static_cast<std::int32_t>(r);
      g.edges.emplace_back(std::min(a, b), std::max(a, b));
    }
  }
  finalize_edges(g.edges);
  if (key) g.key_bits = key->bits;
  return g;
}

CircuitGraph extract_subgraph(const Netlist& nl, const FeatureMap& fmap,
                              const std::string& key_gate, int hops,
                              const std::optional<Key>& key) {
  if (hops < 0) throw NetlistError("hop count must be non-negative");
  if (!nl.has_node(key_gate)) throw NetlistError("no node '" + key_gate + "'");
  if (key && key->bits.size() != nl.p())
    throw NetlistError("key width does not match the netlist's key inputs");

  std::unordered_map<std::string, int> key_pos;
  for (std::size_t i = 0; i < nl.key_inputs.size(); ++i)
    key_pos.emplace(nl.key_inputs[i], static_cast<int>(i));

  // A key gate reads its key input either directly or through a one-input
  // buffer/inverter (a multiplexer's selector polarity lives there).
  const Node& gate = nl.node(key_gate);
  int bit = -1;
  for (const std::string& f : gate.fanin) {
    const auto it = key_pos.find(f);
    if (it != key_pos.end()) {
      bit = it->second;
      break;
    }
    const Node& fn = nl.node(f);
    if (fn.fanin.size() == 1) {
      const auto through = key_pos.find(fn.fanin[0]);
      if (through != key_pos.end()) {
        bit = through->second;
        break;
      }
    }
  }
  if (bit < 0)
    throw NetlistError("node '" + key_gate + "' is not a key gate (consumes no key input)");

  // Undirected adjacency over full-netlist row indices.
  std::vector<std::vector<std::size_t>> adj(nl.nodes.size());
  for (std::size_t r = 0; r < nl.nodes.size(); ++r)
    for (const std::string& f : nl.nodes[r].fanin) {
      const std::size_t u = nl.node_index(f);
      adj[u].push_back(r);
      adj[r].push_back(u);
    }

  std::vector<int> dist(nl.nodes.size(), -1);
  std::queue<std::size_t> frontier;
  const std::size_t start = nl.node_index(key_gate);
  dist[start] = 0;
  frontier.push(start);
  while (!frontier.empty()) {
    const std::size_t v = frontier.front();
    frontier.pop();
    if (dist[v] >= hops) continue;
    for (const std::size_t u : adj[v])
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        frontier.push(u);
      }
  }

  std::vector<std::size_t> rows;
  std::vector<std::int32_t> new_index(nl.nodes.size(), -1);
  for (std::size_t r = 0; r < nl.nodes.size(); ++r)
    if (dist[r] >= 0) {
      new_index[r] = static_cast<std::int32_t>(rows.size());
      rows.push_back(r);
    }

  CircuitGraph g;
  g.name = nl.name + "#" + key_gate;
  g.ids.reserve(rows.size());
  for (const std::size_t r : rows) g.ids.push_back(nl.nodes[r].id);
  g.x.assign(rows.size() * kFeatureDim, 0.0);

  const std::unordered_set<std::string> pis(nl.primary_inputs.begin(), nl.primary_inputs.end());
  const std::unordered_set<std::string> outs(nl.outputs.begin(), nl.outputs.end());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Node& nd = nl.nodes[rows[i]];
    write_row(g, i, nd, fmap, pis.count(nd.id) > 0, key_pos.count(nd.id) > 0,
              outs.count(nd.id) > 0);
    for (const std::string& f : nd.fanin) {
      const std::int32_t u = new_index[nl.node_index(f)];
      if (u < 0) continue;  // fan-in outside the hop radius
      const auto v = static_cast<std::int32_t>(i);
      g.edges.emplace_back(std::min(u, v), std::max(u, v));
    }
  }
  finalize_edges(g.edges);
  g.center = new_index[start];
  if (key) g.center_bit = key->bits[static_cast<std::size_t>(bit)] ? 1 : 0;
  return g;
}

std::uint64_t canonical_hash(const CircuitGraph& g, int rounds) {
  const std::size_t n = g.node_count();
  std::vector<std::uint64_t> label(n, kHashSeed);
  for (std::size_t v = 0; v < n; ++v) {
    for (int c = 0; c < kFeatureDim; ++c)
      label[v] = mix(label[v], std::bit_cast<std::uint64_t>(g.at(v, c)));
    if (static_cast<std::int32_t>(v) == g.center) label[v] = mix(label[v], kCenterTag);
  }

  const auto adj = g.neighbors();
  std::vector<std::uint64_t> next(n);
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t v = 0; v < n; ++v) {
      std::vector<std::uint64_t> nb;
      nb.reserve(adj[v].size());
      for (const std::int32_t u : adj[v]) nb.push_back(label[static_cast<std::size_t>(u)]);
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = mix(label[v], 0x100000001b3ULL + static_cast<std::uint64_t>(nb.size()));
      for (const std::uint64_t x : nb) h = mix(h, x);
      next[v] = h;
    }
    label.swap(next);
  }

  std::uint64_t acc = rng::splitmix64(static_cast<std::uint64_t>(n)) ^
                      rng::splitmix64(static_cast<std::uint64_t>(g.edges.size()) + 0x517cc1b7ULL);
  for (std::size_t v = 0; v < n; ++v) acc += rng::splitmix64(label[v]);
  if (g.center >= 0) acc = mix(acc, label[static_cast<std::size_t>(g.center)]);
  return rng::splitmix64(acc);
}

std::vector<int> center_edge_indices(const CircuitGraph& g) {
  if (g.center < 0) throw NetlistError("graph has no center node");
  std::vector<int> out;
  for (std::size_t i = 0; i < g.edges.size(); ++i)
    if (g.edges[i].first == g.center || g.edges[i].second == g.center)
      out.push_back(static_cast<int>(i));
  return out;
}

std::string graph_to_json(const CircuitGraph& g) {
  nlohmann::json j;
  j["name"] = g.name;
  j["scheme"] = g.scheme;
  j["n"] = g.node_count();
  j["f"] = kFeatureDim;
  j["center"] = g.center;
  j["ids"] = g.ids;
  j["x"] = g.x;
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  if (g.er) j["er"] = *g.er;
  if (g.center_bit) j["center_bit"] = *g.center_bit;
  if (g.key_bits) {
    std::string bits;
    for (const std::uint8_t b : *g.key_bits) bits.push_back(b ? '1' : '0');
    j["key_bits"] = bits;
  }
  return j.dump();
}

CircuitGraph graph_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw NetlistError(std::string("bad graph JSON: ") + e.what());
  }
  CircuitGraph g;
  try {
    g.name = j.at("name").get<std::string>();
    g.scheme = j.value("scheme", std::string());
    if (j.at("f").get<int>() != kFeatureDim)
      throw NetlistError("graph JSON has feature dim " + j.at("f").dump() + ", expected " +
                         std::to_string(kFeatureDim));
    g.ids = j.at("ids").get<std::vector<std::string>>();
    g.x = j.at("x").get<std::vector<double>>();
    g.center = j.at("center").get<std::int32_t>();
    for (const auto& e : j.at("edges"))
      g.edges.emplace_back(e.at(0).get<std::int32_t>(), e.at(1).get<std::int32_t>());
    if (j.contains("er")) g.er = j["er"].get<double>();
    if (j.contains("center_bit")) g.center_bit = j["center_bit"].get<int>();
    if (j.contains("key_bits")) g.key_bits = Key::bits_from_string(j["key_bits"].get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw NetlistError(std::string("bad graph JSON: ") + e.what());
  }
  if (g.x.size() != g.ids.size() * kFeatureDim)
    throw NetlistError("graph JSON feature matrix has wrong size");
  if (j.at("n").get<std::size_t>() != g.ids.size())
    throw NetlistError("graph JSON node count disagrees with ids");
  for (const auto& [a, b] : g.edges)
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= g.ids.size() ||
        static_cast<std::size_t>(b) >= g.ids.size())
      throw NetlistError("graph JSON edge index out of range");
  return g;
}

namespace {

constexpr char kMagic[4] = {'L', 'S', 'G', 'R'};
constexpr std::uint32_t kVersion = 1;

using bytes::put_f64;
using bytes::put_str;
using bytes::put_u32;

}  // namespace

void save_graph(const CircuitGraph& g, const std::filesystem::path& path) {
  std::string out;
  out.append(kMagic, sizeof kMagic);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(g.node_count()));
  put_u32(out, static_cast<std::uint32_t>(kFeatureDim));
  put_u32(out, static_cast<std::uint32_t>(g.center));
  std::uint8_t flags = 0;
  if (g.er) flags |= 1;
  if (g.center_bit) flags |= 2;
  if (g.key_bits) flags |= 4;
  out.push_back(static_cast<char>(flags));
  if (g.er) put_f64(out, *g.er);
  if (g.center_bit) put_u32(out, static_cast<std::uint32_t>(*g.center_bit));
  put_str(out, g.name);
  put_str(out, g.scheme);
  for (const std::string& id : g.ids) put_str(out, id);
  for (const double v : g.x) put_f64(out, v);
  put_u32(out, static_cast<std::uint32_t>(g.edges.size()));
  for (const auto& [a, b] : g.edges) {
    put_u32(out, static_cast<std::uint32_t>(a));
    put_u32(out, static_cast<std::uint32_t>(b));
  }
  if (g.key_bits) {
    put_u32(out, static_cast<std::uint32_t>(g.key_bits->size()));
    for (const std::uint8_t b : *g.key_bits) out.push_back(static_cast<char>(b));
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw NetlistError("cannot write '" + path.string() + "'");
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw NetlistError("write failed for '" + path.string() + "'");
}

CircuitGraph load_graph(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw NetlistError("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  const std::string buf = ss.str();

  bytes::Reader r{buf, "graph file"};
  r.need(sizeof kMagic);
  if (std::memcmp(buf.data(), kMagic, sizeof kMagic) != 0)
    throw NetlistError("'" + path.string() + "' is not a graph file");
  r.pos = sizeof kMagic;
  if (r.u32() != kVersion) throw NetlistError("unsupported graph file version");

  CircuitGraph g;
  const std::uint32_t n = r.u32();
  const std::uint32_t fdim = r.u32();
  if (fdim != static_cast<std::uint32_t>(kFeatureDim))
    throw NetlistError("graph file has feature dim " + std::to_string(fdim) + ", expected " +
                       std::to_string(kFeatureDim));
  g.center = static_cast<std::int32_t>(r.u32());
  const std::uint8_t flags = r.u8();
  if (flags & 1) g.er = r.f64();
  if (flags & 2) g.center_bit = static_cast<int>(r.u32());
  g.name = r.str();
  g.scheme = r.str();
  g.ids.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) g.ids.push_back(r.str());
  g.x.resize(static_cast<std::size_t>(n) * kFeatureDim);
  for (double& v : g.x) v = r.f64();
  const std::uint32_t ecount = r.u32();
  g.edges.reserve(ecount);
  for (std::uint32_t i = 0; i < ecount; ++i) {
    const auto a = static_cast<std::int32_t>(r.u32());
    const auto b = static_cast<std::int32_t>(r.u32());
    if (a < 0 || b < 0 || static_cast<std::uint32_t>(a) >= n || static_cast<std::uint32_t>(b) >= n)
      throw NetlistError("graph file edge index out of range");
    g.edges.emplace_back(a, b);
  }
  if (flags & 4) {
    const std::uint32_t len = r.u32();
    std::vector<std::uint8_t> bits;
    bits.reserve(len);
    for (std::uint32_t i = 0; i < len; ++i) bits.push_back(r.u8());
    g.key_bits = std::move(bits);
  }
  return g;
}

}  // namespace locksmith::graph
