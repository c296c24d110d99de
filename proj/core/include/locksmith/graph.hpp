#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "locksmith/netlist.hpp"

namespace locksmith::graph {

// Node feature layout: one column per gate kind (placement decided by the
// FeatureMap), then three role flags, then the applied key-bit value.
inline constexpr int kFeatureDim = kGateKindCount + 4;
inline constexpr int kColPrimaryInput = kGateKindCount;
inline constexpr int kColKeyInput = kGateKindCount + 1;
inline constexpr int kColOutput = kGateKindCount + 2;
inline constexpr int kColKeyValue = kGateKindCount + 3;
// Key-value column when no assignment is attached (and for non-key rows).
inline constexpr double kUnassignedKeyValue = 0.5;

// Assignment of gate kinds to one-hot columns. -1 marks an unmapped kind;
// encoding a netlist that contains an unmapped kind is an error, so partial
// maps stay representable but unusable by accident.
struct FeatureMap {
  std::array<int, kGateKindCount> column{};
  std::string policy;

  FeatureMap() { column.fill(-1); }

  // Column of `kind`; throws NetlistError when the kind is unmapped.
  int column_of(GateKind kind) const;
  bool covers(const Netlist& nl) const;

  // Kinds are numbered in order of first appearance over the corpus (node
  // order within each netlist); kinds never seen fill the tail columns.
  static FeatureMap first_appearance(const std::vector<const Netlist*>& corpus);
  // Seeded random permutation of all kinds.
  static FeatureMap random_assignment(std::uint64_t seed);
  // Most frequent kind over the corpus gets column 0, ties by kind number;
  // absent kinds fill the tail.
  static FeatureMap by_gate_count_desc(const std::vector<const Netlist*>& corpus);
};

// Undirected featureless encoding of a netlist. Rows follow the netlist's
// node order; edges are deduplicated fan-in relations stored once with
// row indices (a < b). `center` marks the focal key gate of a subgraph
// (-1 for whole-graph encodings). Labels travel with the graph when known.
struct CircuitGraph {
  std::string name;
  std::vector<std::string> ids;
  std::vector<double> x;  // row-major, ids.size() x kFeatureDim
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  std::int32_t center = -1;

  std::string scheme;
  std::optional<int> center_bit;
  std::optional<double> er;
  std::optional<std::vector<std::uint8_t>> key_bits;

  std::size_t node_count() const { return ids.size(); }
  double& at(std::size_t row, int col) { return x[row * kFeatureDim + static_cast<std::size_t>(col)]; }
  double at(std::size_t row, int col) const { return x[row * kFeatureDim + static_cast<std::size_t>(col)]; }
  // Adjacency lists (both directions), each sorted ascending.
  std::vector<std::vector<std::int32_t>> neighbors() const;
};

// Whole-netlist encoding. When `key` is given its width must match the
// netlist's key inputs; bit i lands in the key-value column of key input i
// and in `key_bits`. Without a key every key-value cell holds the
// unassigned marker.
CircuitGraph to_graph(const Netlist& nl, const FeatureMap& fmap,
                      const std::optional<Key>& key = std::nullopt);

// Induced subgraph of everything within `hops` undirected steps of
// `key_gate`, which must consume a key input (throws otherwise). Features
// never carry key values here — the controlling bit, when `key` is given,
// goes into the `center_bit` label only.
CircuitGraph extract_subgraph(const Netlist& nl, const FeatureMap& fmap,
                              const std::string& key_gate, int hops = 2,
                              const std::optional<Key>& key = std::nullopt);

// 64-bit digest invariant under node renaming and row reordering:
// neighborhood label refinement seeded from the feature rows, folded
// order-free, with the center's final label mixed in.
std::uint64_t canonical_hash(const CircuitGraph& g, int rounds = 3);

// Edges incident to the center node, ascending edge index. This is the
// ground-truth region an explanation of a key-gate subgraph is scored
// against. Throws when the graph has no center.
std::vector<int> center_edge_indices(const CircuitGraph& g);

std::string graph_to_json(const CircuitGraph& g);
CircuitGraph graph_from_json(const std::string& text);

// Flat binary snapshot, explicitly little-endian:
//   "LSGR", u32 version=1, u32 nodes, u32 feature_dim, i32 center,
//   u8 flag bits (0: er, 1: center_bit, 2: key_bits),
//   f64 er?, i32 center_bit?,
//   str name, str scheme            (str = u32 length + bytes)
//   ids: str per node,
//   features: nodes*feature_dim f64,
//   u32 edge_count, (u32, u32) per edge,
//   key_bits?: u32 length + u8 per bit.
void save_graph(const CircuitGraph& g, const std::filesystem::path& path);
CircuitGraph load_graph(const std::filesystem::path& path);

}  // namespace locksmith::graph
