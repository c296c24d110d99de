#include "locksmith/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace locksmith::dataset {

namespace {

// Independent deterministic streams off the build seed.
std::uint64_t stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t a, std::uint64_t b) {
  return rng::splitmix64(rng::splitmix64(seed ^ tag) ^ (a * 0x9e3779b97f4a7c15ULL + b));
}

std::string bits_to_string(const std::vector<std::uint8_t>& bits) {
  std::string s;
  s.reserve(bits.size());
  for (const std::uint8_t b : bits) s.push_back(b ? '1' : '0');
  return s;
}

}  // namespace

std::vector<std::vector<std::uint8_t>> sample_wrong_keys(const std::vector<std::uint8_t>& correct,
                                                         int count, rng::Engine& eng,
                                                         bool stratified) {
  const std::size_t width = correct.size();
  if (count < 0) throw NetlistError("wrong-key count must be non-negative");
  if (count == 0) return {};
  if (width == 0) throw NetlistError("cannot sample wrong keys for a zero-width key");
  if (width < 32 && static_cast<std::uint64_t>(count) > (1ULL << width) - 1)
    throw NetlistError("width " + std::to_string(width) + " cannot supply " +
                       std::to_string(count) + " distinct wrong keys");

  std::set<std::vector<std::uint8_t>> seen;
  seen.insert(correct);
  std::vector<std::vector<std::uint8_t>> out;

  if (width <= 16) {
    // Small spaces: enumerate, drop the correct key, shuffle, take a prefix.
    std::vector<std::vector<std::uint8_t>> all;
    for (std::uint64_t v = 0; v < (1ULL << width); ++v) {
      std::vector<std::uint8_t> k(width);
      for (std::size_t i = 0; i < width; ++i) k[i] = (v >> i) & 1;
      if (k != correct) all.push_back(std::move(k));
    }
    if (stratified)
      std::sort(all.begin(), all.end(),
                [&](const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
                  int ha = 0, hb = 0;
                  for (std::size_t i = 0; i < width; ++i) {
                    ha += a[i] != correct[i];
                    hb += b[i] != correct[i];
                  }
                  return ha != hb ? ha < hb : a < b;
                });
    else
      rng::shuffle(eng, all);
    if (stratified) {
      // One key per evenly spaced rank across the distance-sorted space.
      for (int j = 0; j < count; ++j) {
        const std::size_t idx = (static_cast<std::size_t>(j) * all.size()) / static_cast<std::size_t>(count);
        out.push_back(all[idx]);
      }
      // Evenly spaced ranks are distinct because count <= all.size().
      return out;
    }
    out.assign(all.begin(), all.begin() + count);
    return out;
  }

  while (static_cast<int>(out.size()) < count) {
    std::vector<std::uint8_t> k(width);
    if (stratified) {
      const std::size_t hd =
          1 + rng::below(eng, width);  // uniform target distance, then uniform positions
      k = correct;
      for (const std::size_t pos : rng::sample_distinct(eng, width, hd)) k[pos] ^= 1;
    } else {
      for (std::size_t i = 0; i < width; ++i) k[i] = rng::coin(eng) ? 1 : 0;
    }
    if (seen.insert(k).second) out.push_back(std::move(k));
  }
  return out;
}

Manifest build_dataset(const std::vector<Netlist>& originals,
                       const std::vector<LockRecipe>& schemes, const BuildOptions& opts,
                       const std::filesystem::path& dir) {
  if (originals.empty()) throw NetlistError("dataset build needs at least one original circuit");
  if (schemes.empty()) throw NetlistError("dataset build needs at least one lock recipe");
  if (opts.wrong_keys < 0) throw NetlistError("wrong_keys must be non-negative");
  if (opts.variants < 1) throw NetlistError("variants must be at least 1");

  std::unordered_set<std::string> names;
  for (const Netlist& nl : originals) {
    if (nl.name.empty()) throw NetlistError("original circuits need names");
    if (!names.insert(nl.name).second)
      throw NetlistError("duplicate original circuit name '" + nl.name + "'");
    if (nl.p() != 0)
      throw NetlistError("original circuit '" + nl.name + "' already carries key inputs");
  }

  std::filesystem::create_directories(dir);

  Manifest m;
  m.wrong_keys = opts.wrong_keys;
  m.variants = opts.variants;
  m.seed = opts.seed;
  switch (opts.er.method) {
    case sim::ErOptions::Method::Exhaustive: m.er_method = "exhaustive"; break;
    case sim::ErOptions::Method::MonteCarlo: m.er_method = "monte_carlo"; break;
    case sim::ErOptions::Method::Auto: m.er_method = "auto"; break;
  }
  for (const Netlist& nl : originals) m.originals.push_back(nl.name);
  std::unordered_set<std::string> circuit_ids;
  for (const LockRecipe& r : schemes) m.schemes.push_back(r.scheme);

  std::uint64_t row_counter = 0;
  for (std::size_t oi = 0; oi < originals.size(); ++oi) {
    const Netlist& orig = originals[oi];
    for (std::size_t si = 0; si < schemes.size(); ++si) {
      LockRecipe recipe = schemes[si];
      recipe.seed = stream(opts.seed, 0x10c0, oi, si) ^ recipe.seed;
      const LockedCircuit lc = lock(orig, recipe);

      const std::string circuit_id = orig.name + "_" + recipe.scheme;
      if (!circuit_ids.insert(circuit_id).second)
        throw NetlistError("recipe schemes must be distinct: '" + recipe.scheme +
                           "' repeats for '" + orig.name + "'");
      const std::filesystem::path cdir = dir / circuit_id;
      save_locked(lc, cdir);

      std::vector<Netlist> variants;
      variants.reserve(static_cast<std::size_t>(opts.variants));
      variants.push_back(lc.netlist);
      for (int v = 1; v < opts.variants; ++v)
        variants.push_back(
            resynth::bubble_push(lc, stream(opts.seed, 0x7a12, oi * 64 + si, static_cast<std::uint64_t>(v)), opts.bubble)
                .netlist);
      for (int v = 0; v < opts.variants; ++v)
        write_bench_file(variants[static_cast<std::size_t>(v)],
                         cdir / ("variant_" + std::to_string(v) + ".bench"));

      rng::Engine keng(stream(opts.seed, 0x4e75, oi, si));
      std::vector<std::vector<std::uint8_t>> keys;
      keys.push_back(lc.key.bits);
      for (auto& w : sample_wrong_keys(lc.key.bits, opts.wrong_keys, keng,
                                       opts.stratified_wrong_keys))
        keys.push_back(std::move(w));

      for (std::size_t ki = 0; ki < keys.size(); ++ki) {
        for (int v = 0; v < opts.variants; ++v) {
          sim::ErOptions eo = opts.er;
          if (!eo.seed) eo.seed = stream(opts.seed, 0x0e77, row_counter, 0);
          ++row_counter;
          Row row;
          row.circuit = circuit_id;
          row.original = orig.name;
          row.variant = v;
          row.scheme = recipe.scheme;
          row.key_bits = bits_to_string(keys[ki]);
          row.is_correct = ki == 0;
          row.er = sim::error_rate(orig, variants[static_cast<std::size_t>(v)], keys[ki], eo).er;
          row.path = circuit_id + "/variant_" + std::to_string(v) + ".bench";
          m.rows.push_back(std::move(row));
        }
      }
    }
  }

  const std::size_t expected = originals.size() * schemes.size() *
                               static_cast<std::size_t>(opts.wrong_keys + 1) *
                               static_cast<std::size_t>(opts.variants);
  if (m.rows.size() != expected)
    throw NetlistError("dataset row count " + std::to_string(m.rows.size()) +
                       " does not match the expected " + std::to_string(expected));
  return m;
}

void split_dataset(Manifest& m, const SplitPolicy& policy) {
  if (m.rows.empty()) throw NetlistError("cannot split an empty dataset");

  if (policy.kind == "by_circuit") {
    std::vector<std::string> order = m.originals;
    rng::Engine eng(policy.seed);
    rng::shuffle(eng, order);
    const auto holdout_count = static_cast<std::size_t>(
        std::max(1.0, policy.fraction * static_cast<double>(order.size()) + 0.5));
    if (holdout_count >= order.size())
      throw NetlistError("by_circuit split would leave no training circuits");
    const std::set<std::string> holdout(order.begin(),
                                        order.begin() + static_cast<std::ptrdiff_t>(holdout_count));
    for (Row& r : m.rows) r.split = holdout.count(r.original) ? "validation" : "train";
  } else if (policy.kind == "by_scheme") {
    if (policy.holdout_schemes.empty())
      throw NetlistError("by_scheme split needs at least one holdout scheme");
    const std::set<std::string> holdout(policy.holdout_schemes.begin(),
                                        policy.holdout_schemes.end());
    std::set<std::string> present;
    for (const Row& r : m.rows) present.insert(r.scheme);
    for (const std::string& s : holdout)
      if (!present.count(s))
        throw NetlistError("holdout scheme '" + s + "' does not occur in the dataset");
    if (present.size() == holdout.size())
      throw NetlistError("by_scheme split would leave no training schemes");
    for (Row& r : m.rows) r.split = holdout.count(r.scheme) ? "validation" : "train";
  } else if (policy.kind == "random") {
    if (!(policy.fraction > 0.0) || !(policy.fraction < 1.0))
      throw NetlistError("random split fraction must lie strictly between 0 and 1");
    rng::Engine eng(policy.seed);
    std::size_t validation = 0;
    for (Row& r : m.rows) {
      const bool hold = rng::unit(eng) < policy.fraction;
      r.split = hold ? "validation" : "train";
      validation += hold;
    }
    if (validation == 0 || validation == m.rows.size())
      throw NetlistError("random split produced an empty side; adjust fraction or seed");
  } else {
    throw NetlistError("unknown split policy '" + policy.kind + "'");
  }
}

void write_manifest(const Manifest& m, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  {
    std::ofstream jl(dir / "dataset.jsonl", std::ios::binary);
    if (!jl) throw NetlistError("cannot write dataset.jsonl");
    for (const Row& r : m.rows) {
      nlohmann::json j;
      j["circuit"] = r.circuit;
      j["original"] = r.original;
      j["variant"] = r.variant;
      j["scheme"] = r.scheme;
      j["key_bits"] = r.key_bits;
      j["is_correct"] = r.is_correct;
      j["er"] = r.er;
      j["split"] = r.split;
      j["path"] = r.path;
      jl << j.dump() << '\n';
    }
  }

  nlohmann::json j;
  j["originals"] = m.originals;
  j["schemes"] = m.schemes;
  j["wrong_keys"] = m.wrong_keys;
  j["variants"] = m.variants;
  j["seed"] = m.seed;
  j["er_method"] = m.er_method;
  j["rows"] = m.rows.size();
  std::ofstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw NetlistError("cannot write manifest.json");
  mf << j.dump(2) << '\n';
}

Manifest read_manifest(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json", std::ios::binary);
  if (!mf) throw NetlistError("cannot read " + (dir / "manifest.json").string());
  nlohmann::json j;
  try {
    mf >> j;
  } catch (const nlohmann::json::exception& e) {
    throw NetlistError(std::string("bad manifest.json: ") + e.what());
  }

  Manifest m;
  try {
    m.originals = j.at("originals").get<std::vector<std::string>>();
    m.schemes = j.at("schemes").get<std::vector<std::string>>();
    m.wrong_keys = j.at("wrong_keys").get<int>();
    m.variants = j.at("variants").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.er_method = j.value("er_method", std::string());
  } catch (const nlohmann::json::exception& e) {
    throw NetlistError(std::string("bad manifest.json: ") + e.what());
  }

  std::ifstream jl(dir / "dataset.jsonl", std::ios::binary);
  if (!jl) throw NetlistError("cannot read " + (dir / "dataset.jsonl").string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(jl, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json rj;
    try {
      rj = nlohmann::json::parse(line);
      Row r;
      r.circuit = rj.at("circuit").get<std::string>();
      r.original = rj.at("original").get<std::string>();
      r.variant = rj.at("variant").get<int>();
      r.scheme = rj.at("scheme").get<std::string>();
      r.key_bits = rj.at("key_bits").get<std::string>();
      r.is_correct = rj.at("is_correct").get<bool>();
      r.er = rj.at("er").get<double>();
      r.split = rj.at("split").get<std::string>();
      r.path = rj.at("path").get<std::string>();
      m.rows.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw NetlistError("bad dataset.jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  const std::size_t expected = j.value("rows", m.rows.size());
  if (m.rows.size() != expected)
    throw NetlistError("dataset.jsonl has " + std::to_string(m.rows.size()) +
                       " rows, manifest.json expects " + std::to_string(expected));
  return m;
}

}  // namespace locksmith::dataset
