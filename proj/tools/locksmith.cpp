// Command-line front end over the locksmith core: generate, lock, dataset,
// train, attack, explain, eval. Every command takes --seed, --config
// (key=value file, explicit flags win), --json and --threads, and exits 0 on
// success, 1 on runtime failure, 2 on usage errors.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "locksmith/dataset.hpp"
#include "locksmith/explain.hpp"
#include "locksmith/generate.hpp"
#include "locksmith/gnn.hpp"
#include "locksmith/graph.hpp"
#include "locksmith/lock.hpp"
#include "locksmith/metrics.hpp"
#include "locksmith/netlist.hpp"
#include "locksmith/resynth.hpp"
#include "locksmith/sim.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using namespace locksmith;

// Usage-class failure: prints the message plus the offending command's help
// and exits 2, distinct from runtime errors (exit 1).
struct UsageError {
  std::string message;
  std::string help;
};

const std::set<std::string>& known_schemes() {
  static const std::set<std::string> s{"xor", "mux", "lut", "sar", "antisat", "ble", "unsail"};
  return s;
}

std::map<std::string, std::string> parse_params(const std::vector<std::string>& kvs,
                                                const std::string& help) {
  std::map<std::string, std::string> out;
  for (const std::string& kv : kvs) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw UsageError{"--param expects key=value, got '" + kv + "'", help};
    out[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  return out;
}

sim::ErOptions make_er_options(const std::string& method, std::uint64_t samples,
                               std::uint64_t seed, int threads, const std::string& help) {
  sim::ErOptions opts;
  if (method == "auto")
    opts.method = sim::ErOptions::Method::Auto;
  else if (method == "exhaustive")
    opts.method = sim::ErOptions::Method::Exhaustive;
  else if (method == "monte_carlo")
    opts.method = sim::ErOptions::Method::MonteCarlo;
  else
    throw UsageError{"unknown --er-method '" + method + "'", help};
  opts.samples = samples;
  opts.seed = seed;
  opts.threads = threads;
  return opts;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NetlistError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NetlistError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Reported keys come either from attack output ({"key": "0101"}) or from a
// locked-circuit directory ({"bits": "0101"}).
std::vector<std::uint8_t> key_bits_from_json_file(const fs::path& path) {
  const json j = json::parse(read_text(path));
  if (j.contains("key")) return Key::bits_from_string(j.at("key").get<std::string>());
  if (j.contains("bits")) return Key::bits_from_string(j.at("bits").get<std::string>());
  throw NetlistError(path.string() + " has neither 'key' nor 'bits'");
}

graph::FeatureMap fit_feature_map(const std::string& policy,
                                  const std::vector<const Netlist*>& corpus, std::uint64_t seed,
                                  const std::string& help) {
  if (policy == "first_appearance") return graph::FeatureMap::first_appearance(corpus);
  if (policy == "random") return graph::FeatureMap::random_assignment(seed);
  if (policy == "by_gate_count_desc") return graph::FeatureMap::by_gate_count_desc(corpus);
  throw UsageError{"unknown --fmap policy '" + policy + "'", help};
}

// ---------------------------------------------------------------------------
// gen

struct GenArgs {
  std::string family = "mixed";
  std::string name = "gen";
  int inputs = 8, outputs = 4, gates = 48, sites = 4;
  std::uint64_t seed = 1;
  std::string out;
  bool json_out = false;
};

void run_gen(const GenArgs& a, const std::string& help) {
  generate::GenOptions opts;
  if (a.family == "mixed")
    opts.family = generate::Family::Mixed;
  else if (a.family == "motif")
    opts.family = generate::Family::Motif;
  else if (a.family == "invchain")
    opts.family = generate::Family::InvChain;
  else
    throw UsageError{"unknown --family '" + a.family + "'", help};
  opts.name = a.name;
  opts.inputs = a.inputs;
  opts.outputs = a.outputs;
  opts.gates = a.gates;
  opts.sites = a.sites;
  opts.seed = a.seed;

  const generate::Generated g = generate::generate(opts);
  const fs::path out = a.out.empty() ? fs::path(a.name + ".bench") : fs::path(a.out);
  write_text(out, serialize_bench(g.netlist));

  if (a.json_out) {
    json j;
    j["out"] = out.string();
    j["inputs"] = g.netlist.n();
    j["outputs"] = g.netlist.m();
    j["nodes"] = g.netlist.nodes.size();
    j["lock_sites"] = g.lock_sites;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "wrote " << out.string() << " (" << g.netlist.nodes.size() << " nodes)\n";
    if (!g.lock_sites.empty()) {
      std::cout << "lock sites:";
      for (const std::string& s : g.lock_sites) std::cout << " " << s;
      std::cout << "\n";
    }
  }
}

// ---------------------------------------------------------------------------
// lock

struct LockArgs {
  std::string input;
  std::string scheme;
  int key_width = 4;
  std::uint64_t seed = 1;
  std::vector<std::string> params;
  std::string out = "locked";
  bool json_out = false;
};

void run_lock(const LockArgs& a, const std::string& help) {
  if (!known_schemes().count(a.scheme))
    throw UsageError{"unknown scheme '" + a.scheme + "'", help};

  LockRecipe recipe;
  recipe.scheme = a.scheme;
  recipe.key_width = a.key_width;
  recipe.seed = a.seed;
  recipe.params = parse_params(a.params, help);

  const Netlist nl = parse_bench_file(a.input);
  const LockedCircuit lc = lock(nl, recipe);
  save_locked(lc, a.out);

  if (a.json_out) {
    json j;
    j["out"] = a.out;
    j["scheme"] = lc.scheme;
    j["width"] = lc.key.width();
    j["key"] = lc.key.bit_string();
    j["gates"] = key_gates(lc.netlist, lc.key);
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "locked " << a.input << " with " << lc.scheme << " width " << lc.key.width()
              << " -> " << a.out << "\n";
  }
}

// ---------------------------------------------------------------------------
// dataset

struct DatasetArgs {
  std::vector<std::string> benches;
  std::vector<std::string> schemes;
  int key_width = 4;
  int wrong_keys = 10;
  int variants = 10;
  bool stratified = false;
  std::string er_method = "auto";
  std::uint64_t samples = 10000;
  std::vector<std::string> params;
  std::string split_kind;
  std::vector<std::string> holdout;
  double fraction = 0.2;
  std::uint64_t seed = 1;
  int threads = 1;
  std::string out = "dataset";
  bool json_out = false;
};

void run_dataset(const DatasetArgs& a, const std::string& help) {
  std::vector<Netlist> originals;
  for (const std::string& path : a.benches) {
    Netlist nl = parse_bench_file(path);
    if (nl.name.empty()) nl.name = fs::path(path).stem().string();
    originals.push_back(std::move(nl));
  }

  std::vector<std::string> scheme_names = a.schemes;
  if (scheme_names.empty())
    scheme_names.assign(known_schemes().begin(), known_schemes().end());
  std::vector<LockRecipe> recipes;
  for (std::size_t i = 0; i < scheme_names.size(); ++i) {
    if (!known_schemes().count(scheme_names[i]))
      throw UsageError{"unknown scheme '" + scheme_names[i] + "'", help};
    LockRecipe r;
    r.scheme = scheme_names[i];
    r.key_width = a.key_width;
    r.seed = a.seed + 1000 * (i + 1);
    r.params = parse_params(a.params, help);
    recipes.push_back(std::move(r));
  }

  dataset::BuildOptions opts;
  opts.wrong_keys = a.wrong_keys;
  opts.variants = a.variants;
  opts.seed = a.seed;
  opts.stratified_wrong_keys = a.stratified;
  opts.er = make_er_options(a.er_method, a.samples, a.seed, a.threads, help);

  dataset::Manifest m = dataset::build_dataset(originals, recipes, opts, a.out);
  if (!a.split_kind.empty()) {
    dataset::SplitPolicy policy;
    policy.kind = a.split_kind;
    policy.fraction = a.fraction;
    policy.seed = a.seed;
    policy.holdout_schemes = a.holdout;
    dataset::split_dataset(m, policy);
  }
  dataset::write_manifest(m, a.out);

  if (a.json_out) {
    json j;
    j["out"] = a.out;
    j["rows"] = m.rows.size();
    j["originals"] = m.originals;
    j["schemes"] = m.schemes;
    j["er_method"] = m.er_method;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "built " << m.rows.size() << " rows under " << a.out << "\n";
  }
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string dataset_dir;
  std::string out = "model.bin";
  std::string history_csv;
  int hops = 2;
  std::string fmap = "first_appearance";
  int hidden = 32, layers = 3;
  bool concat = false;
  std::string readout = "mean";
  int epochs = 200, batch = 8, patience = 5;
  double loss_ceiling = 1.0, key_weight = 1.0, er_weight = 1.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool json_out = false;
};

// Assembles the two sample kinds the model trains on: a whole-graph
// corruptibility sample per manifest row, and a per-key-gate subgraph bit
// sample for every correct-key row.
struct SampleSets {
  std::vector<gnn::TrainSample> train, validation;
};

SampleSets samples_from_manifest(const dataset::Manifest& m, const fs::path& dir,
                                 const graph::FeatureMap& fmap, int hops,
                                 std::map<std::string, Netlist>& cache) {
  SampleSets sets;
  for (const dataset::Row& row : m.rows) {
    auto it = cache.find(row.path);
    if (it == cache.end()) it = cache.emplace(row.path, parse_bench_file(dir / row.path)).first;
    const Netlist& nl = it->second;

    Key key;
    key.bits = Key::bits_from_string(row.key_bits);
    std::vector<gnn::TrainSample>& into =
        row.split == "validation" ? sets.validation : sets.train;

    gnn::TrainSample er_sample;
    er_sample.graph = graph::to_graph(nl, fmap, key);
    er_sample.graph.name = row.circuit + "_v" + std::to_string(row.variant);
    er_sample.graph.scheme = row.scheme;
    er_sample.er = row.er;
    into.push_back(std::move(er_sample));

    if (row.is_correct) {
      const std::vector<std::string> gates = key_gates(nl, key);
      for (std::size_t bit = 0; bit < gates.size(); ++bit) {
        gnn::TrainSample s;
        s.graph = graph::extract_subgraph(nl, fmap, gates[bit], hops, key);
        s.graph.scheme = row.scheme;
        s.bit = key.bits[bit];
        into.push_back(std::move(s));
      }
    }
  }
  return sets;
}

void run_train(const TrainArgs& a, const std::string& help) {
  const fs::path dir(a.dataset_dir);
  const dataset::Manifest m = dataset::read_manifest(dir);

  std::map<std::string, Netlist> cache;
  // Fit the feature map on the training-side variants only (row order, one
  // entry per distinct file).
  std::vector<const Netlist*> corpus;
  {
    std::set<std::string> seen;
    for (const dataset::Row& row : m.rows) {
      if (row.split == "validation" || !seen.insert(row.path).second) continue;
      auto it = cache.find(row.path);
      if (it == cache.end()) it = cache.emplace(row.path, parse_bench_file(dir / row.path)).first;
      corpus.push_back(&it->second);
    }
  }
  const graph::FeatureMap fmap = fit_feature_map(a.fmap, corpus, a.seed, help);

  const SampleSets sets = samples_from_manifest(m, dir, fmap, a.hops, cache);

  gnn::GinHyper hyper;
  hyper.hidden_dim = a.hidden;
  hyper.num_layers = a.layers;
  hyper.concat_layers = a.concat;
  hyper.readout = a.readout;
  hyper.seed = a.seed;
  gnn::GinModel model = gnn::GinModel::init(hyper);

  gnn::TrainConfig config;
  config.max_epochs = a.epochs;
  config.batch_size = a.batch;
  config.patience = a.patience;
  config.loss_ceiling = a.loss_ceiling;
  config.weights.key = a.key_weight;
  config.weights.er = a.er_weight;
  config.seed = a.seed;
  config.threads = a.threads;

  const gnn::TrainResult r = gnn::train(model, sets.train, sets.validation, config);
  gnn::save_model(model, fmap, a.out);
  if (!a.history_csv.empty()) write_text(a.history_csv, gnn::history_to_csv(r.history));

  if (a.json_out) {
    for (const gnn::EpochStats& e : r.history) {
      json j;
      j["epoch"] = e.epoch;
      j["lr"] = e.lr;
      j["loss"] = e.loss;
      j["key_acc"] = e.key_acc;
      j["er_mse"] = e.er_mse;
      std::cout << j.dump() << "\n";
    }
    json done;
    done["stopped_epoch"] = r.stopped_epoch;
    done["stop_reason"] = r.stop_reason;
    done["train_samples"] = sets.train.size();
    done["validation_samples"] = sets.validation.size();
    done["model"] = a.out;
    std::cout << done.dump() << "\n";
  } else {
    for (const gnn::EpochStats& e : r.history) {
      std::ostringstream line;
      line << "epoch " << e.epoch << " lr " << e.lr << " loss " << e.loss << " key_acc "
           << e.key_acc << " er_mse " << e.er_mse;
      std::cout << line.str() << "\n";
    }
    std::cout << "stopped at epoch " << r.stopped_epoch << " (" << r.stop_reason << "), model -> "
              << a.out << "\n";
  }
}

// ---------------------------------------------------------------------------
// attack

struct AttackArgs {
  std::string model;
  std::string bench;
  std::string locked_dir;
  std::string mode = "structure";
  int hops = 2, sweeps = 2;
  std::vector<std::string> gates;
  std::string out;
  std::uint64_t seed = 1;
  int threads = 1;
  bool json_out = false;
};

void run_attack(const AttackArgs& a, const std::string& help) {
  if (a.bench.empty() == a.locked_dir.empty())
    throw UsageError{"give exactly one of --bench or --locked-dir", help};

  auto [model, fmap] = gnn::load_model(a.model);

  Netlist locked;
  gnn::AttackOptions opts;
  opts.hops = a.hops;
  opts.sweeps = a.sweeps;
  opts.gates = a.gates;
  if (a.mode == "structure")
    opts.mode = gnn::AttackMode::StructureOnly;
  else if (a.mode == "refined")
    opts.mode = gnn::AttackMode::CorruptibilityRefined;
  else
    throw UsageError{"unknown --mode '" + a.mode + "'", help};

  if (!a.locked_dir.empty()) {
    const LockedCircuit lc = load_locked(a.locked_dir);
    locked = lc.netlist;
    if (opts.gates.empty()) opts.gates = key_gates(lc.netlist, lc.key);
  } else {
    locked = parse_bench_file(a.bench);
  }

  const gnn::AttackResult r = gnn::attack(model, fmap, locked, opts);

  Key reported;
  reported.bits = r.key.bits;
  if (!a.out.empty()) {
    json j;
    j["key"] = reported.bit_string();
    j["gates"] = r.gates;
    j["confidence"] = r.confidence;
    j["flips"] = r.flips;
    j["mode"] = a.mode;
    write_text(a.out, j.dump(2) + "\n");
  }

  if (a.json_out) {
    json j;
    j["key"] = reported.bit_string();
    j["gates"] = r.gates;
    j["confidence"] = r.confidence;
    j["flips"] = r.flips;
    std::cout << j.dump() << "\n";
  } else {
    std::cout << "key " << reported.bit_string() << " (flips " << r.flips << ")\n";
  }
}

// ---------------------------------------------------------------------------
// explain

struct ExplainArgs {
  std::string model;
  std::string bench;
  std::string locked_dir;
  std::vector<std::string> gates;
  int hops = 2;
  int budget = 5, steps = 300;
  double lambda = 0.05, lr = 0.01;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 1;
  bool json_out = false;
};

void run_explain(const ExplainArgs& a, const std::string& help) {
  if (a.bench.empty() == a.locked_dir.empty())
    throw UsageError{"give exactly one of --bench or --locked-dir", help};

  auto [model, fmap] = gnn::load_model(a.model);

  Netlist locked;
  std::vector<std::string> gates = a.gates;
  if (!a.locked_dir.empty()) {
    const LockedCircuit lc = load_locked(a.locked_dir);
    locked = lc.netlist;
    if (gates.empty()) gates = key_gates(lc.netlist, lc.key);
  } else {
    locked = parse_bench_file(a.bench);
    if (gates.empty()) {
      Key stub;
      stub.bits.assign(locked.key_inputs.size(), 0);
      gates = key_gates(locked, stub);
    }
  }

  explain::ExplainOptions opts;
  opts.budget_k = a.budget;
  opts.steps = a.steps;
  opts.lambda = a.lambda;
  opts.lr = a.lr;
  opts.seed = a.seed;

  bool first = true;
  for (const std::string& gate : gates) {
    const graph::CircuitGraph g = graph::extract_subgraph(locked, fmap, gate, a.hops);
    // Sparse neighborhoods can hold fewer edges than the requested budget.
    explain::ExplainOptions gate_opts = opts;
    gate_opts.budget_k = std::min<int>(opts.budget_k, static_cast<int>(g.edges.size()));
    explain::Explanation e = explain::explain_graph(model, g, gate_opts);
    e.graph_ref = gate;

    if (!a.out_dir.empty()) {
      fs::create_directories(a.out_dir);
      write_text(fs::path(a.out_dir) / (gate + ".json"), explain::explanation_to_json(e, g));
      write_text(fs::path(a.out_dir) / (gate + ".dot"), explain::explanation_to_dot(e, g));
    }
    if (a.json_out) {
      std::cout << explain::explanation_to_json(e, g) << "\n";
    } else {
      if (!first) std::cout << "\n";
      std::cout << gate << " label " << e.predicted_label << " mask " << e.mask_total << "\n";
      for (int idx : e.top_k) {
        const auto& [u, v] = g.edges[static_cast<std::size_t>(idx)];
        std::cout << "  " << g.ids[static_cast<std::size_t>(u)] << " -- "
                  << g.ids[static_cast<std::size_t>(v)] << "  "
                  << e.edge_scores[static_cast<std::size_t>(idx)] << "\n";
      }
    }
    first = false;
  }
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string original;
  std::string locked;
  std::string locked_dir;
  std::string key;
  std::string key_file;
  std::string correct_key;
  std::string er_method = "auto";
  std::uint64_t samples = 10000;
  std::vector<std::string> asserts;
  std::uint64_t seed = 1;
  int threads = 1;
  bool json_out = false;
};

// assert grammar: "<metric><op><number>" with metric in {er, key-precision,
// prediction-accuracy, hamming} and op in {>=, <=, >, <, ==, !=}.
bool check_assert(const std::string& expr, const std::map<std::string, double>& metrics,
                  std::string& message, const std::string& help) {
  static const std::regex re(R"(^\s*([a-z][a-z_-]*)\s*(>=|<=|==|!=|>|<)\s*(-?[0-9.]+)\s*$)");
  std::smatch m;
  if (!std::regex_match(expr, m, re))
    throw UsageError{"cannot parse --assert '" + expr + "'", help};
  const std::string name = m[1];
  const std::string op = m[2];
  const double want = std::stod(m[3]);
  auto it = metrics.find(name);
  if (it == metrics.end()) {
    std::string names;
    for (const auto& entry : metrics) names += (names.empty() ? "" : ", ") + entry.first;
    throw UsageError{"--assert metric '" + name + "' unknown (have: " + names + ")", help};
  }
  const double have = it->second;
  bool ok = false;
  if (op == ">=") ok = have >= want;
  else if (op == "<=") ok = have <= want;
  else if (op == ">") ok = have > want;
  else if (op == "<") ok = have < want;
  else if (op == "==") ok = have == want;
  else ok = have != want;
  if (!ok) {
    std::ostringstream ss;
    ss << "assert failed: " << name << " is " << have << ", wanted " << op << " " << want;
    message = ss.str();
  }
  return ok;
}

void run_eval(const EvalArgs& a, const std::string& help) {
  if (a.locked.empty() == a.locked_dir.empty())
    throw UsageError{"give exactly one of --locked or --locked-dir", help};
  if (a.key.empty() == a.key_file.empty())
    throw UsageError{"give exactly one of --key or --key-file", help};

  const Netlist original = parse_bench_file(a.original);

  Netlist locked;
  std::optional<Key> correct;
  if (!a.locked_dir.empty()) {
    const LockedCircuit lc = load_locked(a.locked_dir);
    locked = lc.netlist;
    correct = lc.key;
  } else {
    locked = parse_bench_file(a.locked);
  }
  if (!a.correct_key.empty()) {
    Key k;
    k.bits = Key::bits_from_string(a.correct_key);
    correct = k;
  }

  Key reported;
  reported.bits = a.key_file.empty() ? Key::bits_from_string(a.key)
                                     : key_bits_from_json_file(a.key_file);

  const sim::ErOptions er_opts =
      make_er_options(a.er_method, a.samples, a.seed, a.threads, help);
  const sim::ErReport er = sim::error_rate(original, locked, reported.bits, er_opts);

  std::map<std::string, double> scores;
  scores["er"] = er.er;
  scores["key-precision"] = 100.0 * (1.0 - er.er);
  if (correct) {
    scores["hamming"] = metrics::hamming_distance(reported, *correct);
    scores["prediction-accuracy"] = metrics::prediction_accuracy(reported, *correct);
  }

  if (a.json_out) {
    json j;
    j["key"] = reported.bit_string();
    j["er"] = er.er;
    j["er_method"] = er.method;
    j["key_precision"] = scores["key-precision"];
    if (correct) {
      j["hamming"] = scores["hamming"];
      j["prediction_accuracy"] = scores["prediction-accuracy"];
    }
    std::cout << j.dump() << "\n";
  } else {
    for (const auto& [name, value] : scores) std::cout << name << " " << value << "\n";
  }

  bool all_ok = true;
  for (const std::string& expr : a.asserts) {
    std::string message;
    if (!check_assert(expr, scores, message, help)) {
      std::cerr << message << "\n";
      all_ok = false;
    }
  }
  if (!all_ok) throw NetlistError("assertions failed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"logic-locking workbench: lock circuits, build datasets, train and run the "
               "graph-network attack, explain predictions, score keys"};
  app.require_subcommand(1);

  auto add_common = [](CLI::App* sc, std::uint64_t* seed, int* threads, bool* json_out) {
    if (seed) sc->add_option("--seed", *seed, "deterministic seed");
    if (threads) sc->add_option("--threads", *threads, "parallelism cap");
    if (json_out) sc->add_flag("--json", *json_out, "machine-readable stdout");
    sc->set_config("--config", "", "key=value config file; explicit flags win");
  };

  GenArgs gen;
  CLI::App* sc_gen = app.add_subcommand("gen", "generate a synthetic benchmark circuit");
  sc_gen->add_option("--family", gen.family, "mixed | motif | invchain");
  sc_gen->add_option("--name", gen.name, "circuit name");
  sc_gen->add_option("--inputs", gen.inputs, "primary input count");
  sc_gen->add_option("--outputs", gen.outputs, "primary output count");
  sc_gen->add_option("--gates", gen.gates, "approximate gate budget");
  sc_gen->add_option("--sites", gen.sites, "tagged lock sites (motif/invchain)");
  sc_gen->add_option("--out", gen.out, "output bench path")->envname("LOCKSMITH_OUT");
  add_common(sc_gen, &gen.seed, nullptr, &gen.json_out);

  LockArgs lock_args;
  CLI::App* sc_lock = app.add_subcommand("lock", "insert key gates into a bench circuit");
  sc_lock->add_option("input", lock_args.input, "bench file")->required();
  sc_lock->add_option("--scheme", lock_args.scheme, "xor | mux | lut | sar | antisat | ble | unsail")
      ->required();
  sc_lock->add_option("--key-width", lock_args.key_width, "key bit count");
  sc_lock->add_option("--param", lock_args.params, "scheme parameter key=value (repeatable)");
  sc_lock->add_option("--out", lock_args.out, "output directory")->envname("LOCKSMITH_OUT");
  add_common(sc_lock, &lock_args.seed, nullptr, &lock_args.json_out);

  DatasetArgs ds;
  CLI::App* sc_ds = app.add_subcommand("dataset", "lock + rewrite + score a labeled corpus");
  sc_ds->add_option("--bench", ds.benches, "original bench file (repeatable)")->required();
  sc_ds->add_option("--scheme", ds.schemes, "locking scheme (repeatable; default all)");
  sc_ds->add_option("--key-width", ds.key_width, "key bit count");
  sc_ds->add_option("--wrong-keys", ds.wrong_keys, "wrong keys per locked circuit");
  sc_ds->add_option("--variants", ds.variants, "structural variants per locked circuit");
  sc_ds->add_flag("--stratified", ds.stratified, "spread wrong keys across Hamming distances");
  sc_ds->add_option("--er-method", ds.er_method, "auto | exhaustive | monte_carlo");
  sc_ds->add_option("--samples", ds.samples, "Monte-Carlo sample count");
  sc_ds->add_option("--param", ds.params, "scheme parameter key=value (repeatable)");
  sc_ds->add_option("--split", ds.split_kind, "by_circuit | by_scheme | random");
  sc_ds->add_option("--holdout", ds.holdout, "scheme held out by --split by_scheme (repeatable)");
  sc_ds->add_option("--fraction", ds.fraction, "validation fraction for by_circuit/random");
  sc_ds->add_option("--out", ds.out, "dataset directory")->envname("LOCKSMITH_OUT");
  add_common(sc_ds, &ds.seed, &ds.threads, &ds.json_out);

  TrainArgs tr;
  CLI::App* sc_tr = app.add_subcommand("train", "train the two-headed graph network on a dataset");
  sc_tr->add_option("--dataset", tr.dataset_dir, "dataset directory")->required();
  sc_tr->add_option("--out", tr.out, "model checkpoint path")->envname("LOCKSMITH_OUT");
  sc_tr->add_option("--history", tr.history_csv, "write epoch history CSV here");
  sc_tr->add_option("--hops", tr.hops, "subgraph radius around key gates");
  sc_tr->add_option("--fmap", tr.fmap, "first_appearance | random | by_gate_count_desc");
  sc_tr->add_option("--hidden", tr.hidden, "hidden width");
  sc_tr->add_option("--layers", tr.layers, "aggregation layers");
  sc_tr->add_flag("--concat", tr.concat, "heads read all layer embeddings");
  sc_tr->add_option("--readout", tr.readout, "mean | sum");
  sc_tr->add_option("--epochs", tr.epochs, "epoch cap");
  sc_tr->add_option("--batch", tr.batch, "minibatch size");
  sc_tr->add_option("--patience", tr.patience, "non-improving epochs before stopping");
  sc_tr->add_option("--loss-ceiling", tr.loss_ceiling, "stop when mean loss reaches this");
  sc_tr->add_option("--key-weight", tr.key_weight, "key-bit loss weight");
  sc_tr->add_option("--er-weight", tr.er_weight, "corruptibility loss weight");
  add_common(sc_tr, &tr.seed, &tr.threads, &tr.json_out);

  AttackArgs at;
  CLI::App* sc_at = app.add_subcommand("attack", "recover a key from a locked netlist");
  sc_at->add_option("--model", at.model, "model checkpoint")->required();
  sc_at->add_option("--bench", at.bench, "locked bench file");
  sc_at->add_option("--locked-dir", at.locked_dir, "locked-circuit directory");
  sc_at->add_option("--mode", at.mode, "structure | refined");
  sc_at->add_option("--hops", at.hops, "subgraph radius");
  sc_at->add_option("--sweeps", at.sweeps, "refinement passes");
  sc_at->add_option("--gates", at.gates, "key gate per bit (repeatable)");
  sc_at->add_option("--out", at.out, "write reported key JSON here")->envname("LOCKSMITH_OUT");
  add_common(sc_at, &at.seed, &at.threads, &at.json_out);

  ExplainArgs ex;
  CLI::App* sc_ex = app.add_subcommand("explain", "edge-mask explanations around key gates");
  sc_ex->add_option("--model", ex.model, "model checkpoint")->required();
  sc_ex->add_option("--bench", ex.bench, "locked bench file");
  sc_ex->add_option("--locked-dir", ex.locked_dir, "locked-circuit directory");
  sc_ex->add_option("--gate", ex.gates, "key gate to explain (repeatable; default all)");
  sc_ex->add_option("--hops", ex.hops, "subgraph radius");
  sc_ex->add_option("--budget", ex.budget, "edges reported per explanation");
  sc_ex->add_option("--steps", ex.steps, "mask optimization steps");
  sc_ex->add_option("--lambda", ex.lambda, "sparsity pressure");
  sc_ex->add_option("--lr", ex.lr, "mask learning rate");
  sc_ex->add_option("--out-dir", ex.out_dir, "write per-gate JSON + DOT here")
      ->envname("LOCKSMITH_OUT");
  add_common(sc_ex, &ex.seed, &ex.threads, &ex.json_out);

  EvalArgs ev;
  CLI::App* sc_ev = app.add_subcommand("eval", "score a reported key against the original");
  sc_ev->add_option("--original", ev.original, "key-free original bench")->required();
  sc_ev->add_option("--locked", ev.locked, "locked bench file");
  sc_ev->add_option("--locked-dir", ev.locked_dir, "locked-circuit directory");
  sc_ev->add_option("--key", ev.key, "reported key bits, e.g. 0101");
  sc_ev->add_option("--key-file", ev.key_file, "JSON file carrying the reported key");
  sc_ev->add_option("--correct-key", ev.correct_key, "correct key bits (else from --locked-dir)");
  sc_ev->add_option("--er-method", ev.er_method, "auto | exhaustive | monte_carlo");
  sc_ev->add_option("--samples", ev.samples, "Monte-Carlo sample count");
  sc_ev->add_option("--assert", ev.asserts,
                    "metric check like 'key-precision>=70' (repeatable; failure exits 1)");
  add_common(sc_ev, &ev.seed, &ev.threads, &ev.json_out);

  try {
    app.parse(argc, argv);
    if (sc_gen->parsed()) run_gen(gen, sc_gen->help());
    if (sc_lock->parsed()) run_lock(lock_args, sc_lock->help());
    if (sc_ds->parsed()) run_dataset(ds, sc_ds->help());
    if (sc_tr->parsed()) run_train(tr, sc_tr->help());
    if (sc_at->parsed()) run_attack(at, sc_at->help());
    if (sc_ex->parsed()) run_explain(ex, sc_ex->help());
    if (sc_ev->parsed()) run_eval(ev, sc_ev->help());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n" << app.help() << "\n";
    return 2;
  } catch (const UsageError& e) {
    std::cerr << e.message << "\n" << e.help << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
