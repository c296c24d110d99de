#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "locksmith/lock.hpp"
#include "locksmith/netlist.hpp"
#include "locksmith/resynth.hpp"
#include "locksmith/rng.hpp"
#include "locksmith/sim.hpp"

namespace locksmith::dataset {

// One scored (circuit variant, key assignment) pair.
struct Row {
  std::string circuit;   // "<original>_<scheme>"
  std::string original;  // source circuit name
  int variant = 0;       // 0 = as locked, >0 = function-preserving rewrite
  std::string scheme;
  std::string key_bits;
  bool is_correct = false;
  double er = 0.0;
  std::string split;  // "", "train" or "validation"
  std::string path;   // bench file, relative to the dataset root
};

struct BuildOptions {
  int wrong_keys = 10;
  int variants = 10;  // per locked circuit, counting the unrewritten variant 0
  std::uint64_t seed = 1;
  bool stratified_wrong_keys = false;  // spread wrong keys across Hamming distances
  sim::ErOptions er;                   // Monte-Carlo row seeds are derived from `seed`
  resynth::BubbleOptions bubble;
};

struct Manifest {
  std::vector<Row> rows;
  std::vector<std::string> originals;
  std::vector<std::string> schemes;
  int wrong_keys = 0;
  int variants = 0;
  std::uint64_t seed = 0;
  std::string er_method;
};

// Locks every original with every recipe, persists each locked circuit with
// its rewritten variants under `dir` (one directory per locked circuit,
// variant_<i>.bench inside), and scores every (variant, key) pair against
// the original. Row count is exactly
// |originals| * |schemes| * (wrong_keys + 1) * variants, rows ordered by
// (original, scheme, key, variant) with the correct key first. The same
// wrong keys are reused across a circuit's variants.
Manifest build_dataset(const std::vector<Netlist>& originals,
                       const std::vector<LockRecipe>& schemes, const BuildOptions& opts,
                       const std::filesystem::path& dir);

struct SplitPolicy {
  std::string kind;                          // by_circuit | by_scheme | random
  double fraction = 0.2;                     // by_circuit, random
  std::uint64_t seed = 1;                    // by_circuit, random
  std::vector<std::string> holdout_schemes;  // by_scheme
};

// Assigns every row to train or validation. by_circuit holds out whole
// originals (no variant of a held-out circuit lands in train); by_scheme
// holds out whole schemes; random assigns per row. Throws when a split side
// ends up empty or a holdout scheme is absent.
void split_dataset(Manifest& m, const SplitPolicy& policy);

// dataset.jsonl (one row per line, build order) + manifest.json (generation
// parameters and seeds).
void write_manifest(const Manifest& m, const std::filesystem::path& dir);
Manifest read_manifest(const std::filesystem::path& dir);

// `count` distinct keys of the same width as `correct`, none equal to it.
// Stratified sampling spreads the keys across Hamming distances from
// `correct` instead of drawing uniformly. Throws when the width cannot
// supply that many distinct wrong keys.
std::vector<std::vector<std::uint8_t>> sample_wrong_keys(const std::vector<std::uint8_t>& correct,
                                                         int count, rng::Engine& eng,
                                                         bool stratified = false);

}  // namespace locksmith::dataset
