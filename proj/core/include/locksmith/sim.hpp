#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "locksmith/netlist.hpp"

namespace locksmith::sim {

// Fraction of input patterns on which two circuits disagree on at least one
// output bit. Counts are exact; er = mismatching / total.
struct ErReport {
  double er = 0.0;
  std::string method;  // "exhaustive" or "monte_carlo"
  std::uint64_t mismatching = 0;
  std::uint64_t total = 0;
  std::optional<std::uint64_t> samples;
  std::optional<std::uint64_t> seed;

  std::string to_json() const;
  static ErReport from_json(const std::string& text);
};

struct ErOptions {
  enum class Method { Auto, Exhaustive, MonteCarlo };
  Method method = Method::Auto;
  int exhaustive_cap = 20;  // Auto switches to Monte-Carlo above this input count
  std::uint64_t samples = 10000;
  std::optional<std::uint64_t> seed;  // mandatory for Monte-Carlo
  int threads = 1;
};

// Word-parallel evaluator (64 patterns per pass) bound to one netlist. The
// scalar path is kept separate as a cross-check oracle.
class Simulator {
 public:
  explicit Simulator(const Netlist& nl);

  const Netlist& netlist() const { return *nl_; }

  // Scalar single-pattern evaluation. `primary` follows primary_inputs order,
  // `key` follows key_inputs order (empty allowed only when p() == 0).
  std::vector<bool> evaluate_scalar(const std::vector<bool>& primary,
                                    const std::vector<std::uint8_t>& key = {}) const;

  // 64 patterns at once. input_words follows primary_inputs then key_inputs
  // order; returns one word per output.
  std::vector<std::uint64_t> evaluate_words(const std::vector<std::uint64_t>& input_words) const;

 private:
  const Netlist* nl_;
  struct Op {
    GateKind kind;
    std::vector<std::uint32_t> fanin;
    const std::vector<std::uint8_t>* lut = nullptr;
  };
  std::vector<Op> ops_;                  // node-order aligned
  std::vector<std::uint32_t> inputs_;    // node index of primary then key inputs
  std::vector<std::uint32_t> outputs_;   // node index per output
  friend struct WordRun;
};

// Default-engine evaluation (word-parallel under the hood for bulk paths;
// single call sites use the scalar path for clarity).
std::vector<bool> evaluate(const Netlist& nl, const std::vector<bool>& primary,
                           const std::vector<std::uint8_t>& key = {});

// Key error rate of `locked` under `key` against the key-free `original`.
// Signature orientation is enforced: the first argument must be key-free.
ErReport error_rate(const Netlist& original, const Netlist& locked,
                    const std::vector<std::uint8_t>& key, const ErOptions& opts = {});

struct EquivResult {
  bool equivalent = true;
  std::string method;
  // First mismatching assignment over primary inputs then key inputs of `a`.
  std::vector<bool> counterexample;
};

// Functional equivalence over all shared inputs (key inputs are treated as
// free variables; both netlists must expose identical input/output name sets).
EquivResult equivalence_check(const Netlist& a, const Netlist& b, const ErOptions& opts = {});

}  // namespace locksmith::sim
