#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace locksmith {

// Gate-kind vocabulary is fixed at 12 entries; the graph feature map depends
// on this count staying stable.
enum class GateKind : std::uint8_t {
  Input,
  OutputTap,  // identity pass-through; no parser path produces it
  And,
  Nand,
  Or,
  Nor,
  Xor,
  Xnor,
  Not,
  Buf,
  Mux2,  // fanin = [selector, d0, d1]; selects d0 when selector = 0
  Lut,   // fanin = data inputs; lut_table holds 2^k bits, first fanin is the
         // most significant minterm digit
};
inline constexpr int kGateKindCount = 12;

std::string_view to_string(GateKind kind);
std::optional<GateKind> gate_kind_from(std::string_view name);  // case-insensitive

struct Node {
  std::string id;
  GateKind kind = GateKind::And;
  std::vector<std::string> fanin;
  std::vector<std::uint8_t> lut_table;  // Lut only; size 2^fanin.size()
};

class NetlistError : public std::runtime_error {
 public:
  explicit NetlistError(const std::string& what, int line = -1, int col = -1)
      : std::runtime_error(what), line_(line), col_(col) {}
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  int line_;
  int col_;
};

// Combinational netlist. After validate()/parse the node list is in canonical
// topological order (Kahn with lexicographic-min tie break). Signal ids are
// case-sensitive; key inputs are the inputs named <key_prefix><number>,
// ordered by numeric suffix, and are excluded from primary_inputs.
struct Netlist {
  std::string name;
  std::vector<Node> nodes;
  std::vector<std::string> primary_inputs;
  std::vector<std::string> key_inputs;
  std::vector<std::string> outputs;
  std::string key_prefix = "keyinput";

  std::size_t n() const { return primary_inputs.size(); }
  std::size_t m() const { return outputs.size(); }
  std::size_t p() const { return key_inputs.size(); }

  bool has_node(std::string_view id) const;
  const Node& node(std::string_view id) const;
  Node& node(std::string_view id);
  std::size_t node_index(std::string_view id) const;
  void rebuild_index() const;

  // Consumers of each signal, in node order. Built on demand by callers that
  // mutate; invalidated by any structural edit.
  std::vector<std::vector<std::string>> fanouts() const;

 private:
  mutable std::unordered_map<std::string, std::size_t> index_;
  mutable bool index_valid_ = false;
};

struct ParseOptions {
  std::string key_prefix = "keyinput";
};

Netlist parse_bench(std::string_view text, const ParseOptions& opts = {});
Netlist parse_bench_file(const std::filesystem::path& path, const ParseOptions& opts = {});

// Serializes to BENCH. Mux2 and Lut nodes are lowered to AND/OR/NOT nets with
// fresh internal ids; the root keeps the node's id so interfaces and
// provenance survive. OutputTap serializes as BUFF.
std::string serialize_bench(const Netlist& nl);
void write_bench_file(const Netlist& nl, const std::filesystem::path& path);

// Checks duplicate ids, dangling references, arity, LUT table sizes, output
// declarations and acyclicity; normalizes node order to the canonical
// topological order and sorts key inputs by numeric suffix. Throws
// NetlistError on violation.
void validate(Netlist& nl);

// Canonical topological order of all node ids (inputs included).
std::vector<std::string> topological_order(const Netlist& nl);

// Expected fan-in arity: {min, max} (max = -1 means unbounded).
std::pair<int, int> arity_range(GateKind kind);

// Truth-table bit of a primitive gate for the given input minterm; `inputs`
// bit i corresponds to fanin i. Lut nodes use their stored table.
bool gate_eval(const Node& node, const std::vector<bool>& inputs);

// Key material attached to a locked netlist. bits[i] belongs to key input i
// (numeric-suffix order); provenance maps bit index -> designated key gate.
struct Key {
  std::vector<std::uint8_t> bits;
  std::map<int, std::string> provenance;

  std::size_t width() const { return bits.size(); }
  std::string bit_string() const;
  static std::vector<std::uint8_t> bits_from_string(std::string_view s);
};

}  // namespace locksmith
