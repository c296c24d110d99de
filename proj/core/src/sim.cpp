#include "locksmith/sim.hpp"

#include <algorithm>
#include <bit>
#include <thread>

#include "locksmith/rng.hpp"
#include "json.hpp"

namespace locksmith::sim {

namespace {

struct IoMap {
  // For each input word slot of `b` (primary then key), the matching slot of
  // the combined enumeration order defined by `a`.
  std::vector<std::size_t> b_inputs;
  std::vector<std::size_t> a_out, b_out;  // output node order match
  std::size_t n_primary = 0, n_key = 0;
};

// Matches inputs/outputs of b against a by name. `a` defines ordering.
IoMap map_interfaces(const Netlist& a, const Netlist& b, bool allow_keys) {
  IoMap map;
  map.n_primary = a.primary_inputs.size();
  map.n_key = a.key_inputs.size();
  if (!allow_keys && !a.key_inputs.empty())
    throw NetlistError("first netlist must be key-free");
  if (a.primary_inputs.size() != b.primary_inputs.size() || a.m() != b.m())
    throw NetlistError("interface mismatch: input/output counts differ");
  auto position = [](const std::vector<std::string>& v, const std::string& id) {
    auto it = std::find(v.begin(), v.end(), id);
    if (it == v.end()) throw NetlistError("interface mismatch: signal '" + id + "' missing");
    return static_cast<std::size_t>(it - v.begin());
  };
  map.b_inputs.resize(b.primary_inputs.size() + b.key_inputs.size());
  for (std::size_t i = 0; i < b.primary_inputs.size(); ++i)
    map.b_inputs[i] = position(a.primary_inputs, b.primary_inputs[i]);
  for (std::size_t i = 0; i < b.key_inputs.size(); ++i) {
    if (allow_keys && a.key_inputs.size() == b.key_inputs.size()) {
      map.b_inputs[b.primary_inputs.size() + i] =
          map.n_primary + position(a.key_inputs, b.key_inputs[i]);
    } else {
      map.b_inputs[b.primary_inputs.size() + i] = map.n_primary + i;
    }
  }
  for (std::size_t i = 0; i < a.outputs.size(); ++i) {
    map.a_out.push_back(i);
    map.b_out.push_back(position(b.outputs, a.outputs[i]));
  }
  return map;
}

// Deterministic, shard-independent random bit for Monte-Carlo pattern
// `sample` and input slot `slot`.
inline std::uint64_t mc_word(std::uint64_t seed, std::uint64_t sample, std::size_t slot) {
  return rng::splitmix64(rng::splitmix64(seed ^ (sample + 1)) ^ (0x51ed2701ULL + slot));
}

}  // namespace

Simulator::Simulator(const Netlist& nl) : nl_(&nl) {
  ops_.reserve(nl.nodes.size());
  for (const Node& nd : nl.nodes) {
    Op op;
    op.kind = nd.kind;
    op.fanin.reserve(nd.fanin.size());
    for (const std::string& src : nd.fanin)
      op.fanin.push_back(static_cast<std::uint32_t>(nl.node_index(src)));
    if (nd.kind == GateKind::Lut) op.lut = &nd.lut_table;
    ops_.push_back(std::move(op));
  }
  for (const std::string& id : nl.primary_inputs)
    inputs_.push_back(static_cast<std::uint32_t>(nl.node_index(id)));
  for (const std::string& id : nl.key_inputs)
    inputs_.push_back(static_cast<std::uint32_t>(nl.node_index(id)));
  for (const std::string& id : nl.outputs)
    outputs_.push_back(static_cast<std::uint32_t>(nl.node_index(id)));
}

std::vector<std::uint64_t> Simulator::evaluate_words(
    const std::vector<std::uint64_t>& input_words) const {
  if (input_words.size() != inputs_.size())
    throw NetlistError("evaluate_words: expected " + std::to_string(inputs_.size()) +
                       " input words");
  std::vector<std::uint64_t> value(ops_.size(), 0);
  for (std::size_t i = 0; i < inputs_.size(); ++i) value[inputs_[i]] = input_words[i];

  for (std::size_t i = 0; i < ops_.size(); ++i) {
    const Op& op = ops_[i];
    switch (op.kind) {
      case GateKind::Input: break;
      case GateKind::OutputTap:
      case GateKind::Buf: value[i] = value[op.fanin[0]]; break;
      case GateKind::Not: value[i] = ~value[op.fanin[0]]; break;
      case GateKind::And: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc &= value[op.fanin[j]];
        value[i] = acc;
        break;
      }
      case GateKind::Nand: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc &= value[op.fanin[j]];
        value[i] = ~acc;
        break;
      }
      case GateKind::Or: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc |= value[op.fanin[j]];
        value[i] = acc;
        break;
      }
      case GateKind::Nor: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc |= value[op.fanin[j]];
        value[i] = ~acc;
        break;
      }
      case GateKind::Xor: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc ^= value[op.fanin[j]];
        value[i] = acc;
        break;
      }
      case GateKind::Xnor: {
        std::uint64_t acc = value[op.fanin[0]];
        for (std::size_t j = 1; j < op.fanin.size(); ++j) acc ^= value[op.fanin[j]];
        value[i] = ~acc;
        break;
      }
      case GateKind::Mux2: {
        const std::uint64_t s = value[op.fanin[0]];
        value[i] = (~s & value[op.fanin[1]]) | (s & value[op.fanin[2]]);
        break;
      }
      case GateKind::Lut: {
        std::uint64_t acc = 0;
        const std::size_t k = op.fanin.size();
        for (std::size_t t = 0; t < op.lut->size(); ++t) {
          if (!(*op.lut)[t]) continue;
          std::uint64_t term = ~std::uint64_t{0};
          for (std::size_t j = 0; j < k; ++j) {
            const std::uint64_t v = value[op.fanin[j]];
            term &= ((t >> (k - 1 - j)) & 1) ? v : ~v;
          }
          acc |= term;
        }
        value[i] = acc;
        break;
      }
    }
  }

  std::vector<std::uint64_t> out(outputs_.size());
  for (std::size_t i = 0; i < outputs_.size(); ++i) out[i] = value[outputs_[i]];
  return out;
}

std::vector<bool> Simulator::evaluate_scalar(const std::vector<bool>& primary,
                                             const std::vector<std::uint8_t>& key) const {
  const Netlist& nl = *nl_;
  if (primary.size() != nl.n())
    throw NetlistError("evaluate: expected " + std::to_string(nl.n()) + " primary inputs");
  if (key.size() != nl.p())
    throw NetlistError("evaluate: expected " + std::to_string(nl.p()) + " key bits");

  std::vector<bool> value(nl.nodes.size(), false);
  for (std::size_t i = 0; i < primary.size(); ++i)
    value[nl.node_index(nl.primary_inputs[i])] = primary[i];
  for (std::size_t i = 0; i < key.size(); ++i)
    value[nl.node_index(nl.key_inputs[i])] = key[i] != 0;

  std::vector<bool> fan;
  for (std::size_t i = 0; i < nl.nodes.size(); ++i) {
    const Node& nd = nl.nodes[i];
    if (nd.kind == GateKind::Input) continue;
    fan.clear();
    for (const std::string& src : nd.fanin) fan.push_back(value[nl.node_index(src)]);
    value[i] = gate_eval(nd, fan);
  }
  std::vector<bool> out;
  out.reserve(nl.outputs.size());
  for (const std::string& id : nl.outputs) out.push_back(value[nl.node_index(id)]);
  return out;
}

std::vector<bool> evaluate(const Netlist& nl, const std::vector<bool>& primary,
                           const std::vector<std::uint8_t>& key) {
  return Simulator(nl).evaluate_scalar(primary, key);
}

namespace {

// Shared block walker for exhaustive/sampled comparison. Enumerates pattern
// blocks of 64, fills input words for both circuits and reports mismatch
// masks through `on_block`; returns early when on_block returns false.
struct BlockCompare {
  const Simulator& sa;
  const Simulator& sb;
  const IoMap& map;
  std::size_t free_bits;            // enumerated inputs (primary [+ keys])
  const std::vector<std::uint8_t>* key = nullptr;  // locked-key constants for b

  // Fills `wa` (slot-ordered for a) for pattern indices base..base+63.
  void fill_exhaustive(std::uint64_t base, std::vector<std::uint64_t>& wa) const {
    for (std::size_t i = 0; i < free_bits; ++i) {
      std::uint64_t w = 0;
      const unsigned shift = static_cast<unsigned>(free_bits - 1 - i);
      for (unsigned lane = 0; lane < 64; ++lane)
        w |= (((base + lane) >> shift) & 1ULL) << lane;
      wa[i] = w;
    }
  }

  void fill_monte_carlo(std::uint64_t seed, std::uint64_t block,
                        std::vector<std::uint64_t>& wa) const {
    for (std::size_t i = 0; i < free_bits; ++i) wa[i] = mc_word(seed, block, i);
  }

  std::uint64_t mismatch_mask(const std::vector<std::uint64_t>& wa) const {
    std::vector<std::uint64_t> full_a(wa);
    if (key) {
      // `a` is key-free; append key constants for b's slots.
      full_a.resize(free_bits + key->size());
      for (std::size_t i = 0; i < key->size(); ++i)
        full_a[free_bits + i] = (*key)[i] ? ~std::uint64_t{0} : 0;
    }
    std::vector<std::uint64_t> wb(map.b_inputs.size());
    for (std::size_t i = 0; i < wb.size(); ++i) wb[i] = full_a[map.b_inputs[i]];

    const std::vector<std::uint64_t> oa = sa.evaluate_words(
        std::vector<std::uint64_t>(full_a.begin(), full_a.begin() + (key ? free_bits : full_a.size())));
    const std::vector<std::uint64_t> ob = sb.evaluate_words(wb);
    std::uint64_t mask = 0;
    for (std::size_t i = 0; i < map.a_out.size(); ++i)
      mask |= oa[map.a_out[i]] ^ ob[map.b_out[i]];
    return mask;
  }
};

}  // namespace

ErReport error_rate(const Netlist& original, const Netlist& locked,
                    const std::vector<std::uint8_t>& key, const ErOptions& opts) {
  if (!original.key_inputs.empty())
    throw NetlistError("error_rate: original (first argument) must be key-free");
  if (key.size() != locked.p())
    throw NetlistError("error_rate: key width " + std::to_string(key.size()) +
                       " does not match locked circuit (" + std::to_string(locked.p()) + ")");
  const IoMap map = map_interfaces(original, locked, false);
  const std::size_t n = original.n();

  const Simulator sa(original), sb(locked);
  BlockCompare cmp{sa, sb, map, n, &key};

  const bool exhaustive =
      opts.method == ErOptions::Method::Exhaustive ||
      (opts.method == ErOptions::Method::Auto && n <= static_cast<std::size_t>(opts.exhaustive_cap));
  if (!exhaustive && !opts.seed)
    throw NetlistError("error_rate: Monte-Carlo requires a seed");
  if (exhaustive && n > 62) throw NetlistError("error_rate: exhaustive beyond 62 inputs");

  ErReport report;
  const std::uint64_t total = exhaustive ? (std::uint64_t{1} << n) : opts.samples;
  report.total = total;
  report.method = exhaustive ? "exhaustive" : "monte_carlo";
  if (!exhaustive) {
    report.samples = opts.samples;
    report.seed = *opts.seed;
  }

  const std::uint64_t blocks = (total + 63) / 64;
  const int threads = std::max(1, opts.threads);
  std::vector<std::uint64_t> partial(static_cast<std::size_t>(threads), 0);
  auto worker = [&](int t) {
    std::vector<std::uint64_t> wa(n);
    std::uint64_t count = 0;
    for (std::uint64_t b = static_cast<std::uint64_t>(t); b < blocks; b += threads) {
      if (exhaustive)
        cmp.fill_exhaustive(b * 64, wa);
      else
        cmp.fill_monte_carlo(*opts.seed, b, wa);
      std::uint64_t mask = cmp.mismatch_mask(wa);
      const std::uint64_t remain = total - b * 64;
      if (remain < 64) mask &= (std::uint64_t{1} << remain) - 1;
      count += static_cast<std::uint64_t>(std::popcount(mask));
    }
    partial[static_cast<std::size_t>(t)] = count;
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (std::uint64_t c : partial) report.mismatching += c;
  report.er = total == 0 ? 0.0 : static_cast<double>(report.mismatching) / static_cast<double>(total);
  return report;
}

EquivResult equivalence_check(const Netlist& a, const Netlist& b, const ErOptions& opts) {
  if (a.p() != b.p())
    throw NetlistError("equivalence_check: key input counts differ");
  const IoMap map = map_interfaces(a, b, true);
  const std::size_t bits = a.n() + a.p();

  const Simulator sa(a), sb(b);
  BlockCompare cmp{sa, sb, map, bits, nullptr};

  const bool exhaustive =
      opts.method == ErOptions::Method::Exhaustive ||
      (opts.method == ErOptions::Method::Auto &&
       bits <= static_cast<std::size_t>(opts.exhaustive_cap));
  if (!exhaustive && !opts.seed)
    throw NetlistError("equivalence_check: Monte-Carlo requires a seed");
  if (exhaustive && bits > 62) throw NetlistError("equivalence_check: exhaustive beyond 62 inputs");

  EquivResult result;
  result.method = exhaustive ? "exhaustive" : "monte_carlo";
  const std::uint64_t total = exhaustive ? (std::uint64_t{1} << bits) : opts.samples;
  const std::uint64_t blocks = (total + 63) / 64;
  std::vector<std::uint64_t> wa(bits);
  for (std::uint64_t blk = 0; blk < blocks; ++blk) {
    if (exhaustive)
      cmp.fill_exhaustive(blk * 64, wa);
    else
      cmp.fill_monte_carlo(opts.seed.value_or(0), blk, wa);
    std::uint64_t mask = cmp.mismatch_mask(wa);
    const std::uint64_t remain = total - blk * 64;
    if (remain < 64) mask &= (std::uint64_t{1} << remain) - 1;
    if (mask == 0) continue;
    const unsigned lane = static_cast<unsigned>(std::countr_zero(mask));
    result.equivalent = false;
    result.counterexample.resize(bits);
    for (std::size_t i = 0; i < bits; ++i)
      result.counterexample[i] = ((wa[i] >> lane) & 1ULL) != 0;
    return result;
  }
  return result;
}

std::string ErReport::to_json() const {
  nlohmann::json j;
  j["er"] = er;
  j["method"] = method;
  j["mismatching"] = mismatching;
  j["total"] = total;
  if (samples) j["samples"] = *samples;
  if (seed) j["seed"] = *seed;
  return j.dump(2);
}

ErReport ErReport::from_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  ErReport r;
  r.er = j.at("er").get<double>();
  r.method = j.at("method").get<std::string>();
  r.mismatching = j.at("mismatching").get<std::uint64_t>();
  r.total = j.at("total").get<std::uint64_t>();
  if (j.contains("samples")) r.samples = j["samples"].get<std::uint64_t>();
  if (j.contains("seed")) r.seed = j["seed"].get<std::uint64_t>();
  return r;
}

}  // namespace locksmith::sim
