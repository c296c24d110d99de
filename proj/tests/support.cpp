#include "support.hpp"

#include <unistd.h>

#include <cstdlib>
#include <functional>
#include <map>
#include <stdexcept>

#ifndef LOCKSMITH_FIXTURE_DIR
#error "LOCKSMITH_FIXTURE_DIR must be defined by the build"
#endif

namespace testsup {

using locksmith::GateKind;
using locksmith::Netlist;
using locksmith::Node;

std::filesystem::path fixture_dir() { return std::filesystem::path(LOCKSMITH_FIXTURE_DIR); }

std::filesystem::path fixture(const std::string& name) { return fixture_dir() / name; }

Netlist load_fixture(const std::string& name) {
  return locksmith::parse_bench_file(fixture(name));
}

namespace {

bool eval_gate_local(const Node& nd, const std::vector<bool>& in) {
  auto all = [&] {
    for (bool b : in)
      if (!b) return false;
    return true;
  };
  auto any = [&] {
    for (bool b : in)
      if (b) return true;
    return false;
  };
  auto parity = [&] {
    bool p = false;
    for (bool b : in) p = p != b;
    return p;
  };
  switch (nd.kind) {
    case GateKind::And: return all();
    case GateKind::Nand: return !all();
    case GateKind::Or: return any();
    case GateKind::Nor: return !any();
    case GateKind::Xor: return parity();
    case GateKind::Xnor: return !parity();
    case GateKind::Not: return !in[0];
    case GateKind::Buf: return in[0];
    case GateKind::OutputTap: return in[0];
    case GateKind::Mux2: return in[0] ? in[2] : in[1];
    case GateKind::Lut: {
      std::size_t idx = 0;
      for (bool b : in) idx = (idx << 1) | (b ? 1u : 0u);
      return nd.lut_table.at(idx) != 0;
    }
    case GateKind::Input: throw std::logic_error("input has no gate function");
  }
  throw std::logic_error("unhandled gate kind");
}

}  // namespace

std::vector<bool> eval_reference(const Netlist& nl, const std::vector<bool>& primary,
                                 const std::vector<std::uint8_t>& key) {
  if (primary.size() != nl.n()) throw std::invalid_argument("primary width mismatch");
  if (key.size() != nl.p()) throw std::invalid_argument("key width mismatch");
  std::map<std::string, bool> value;
  for (std::size_t i = 0; i < nl.n(); ++i) value[nl.primary_inputs[i]] = primary[i];
  for (std::size_t i = 0; i < nl.p(); ++i) value[nl.key_inputs[i]] = key[i] != 0;

  std::function<bool(const std::string&)> eval = [&](const std::string& id) -> bool {
    auto it = value.find(id);
    if (it != value.end()) return it->second;
    const Node& nd = nl.node(id);
    std::vector<bool> in;
    in.reserve(nd.fanin.size());
    for (const std::string& f : nd.fanin) in.push_back(eval(f));
    bool v = eval_gate_local(nd, in);
    value[id] = v;
    return v;
  };

  std::vector<bool> out;
  out.reserve(nl.m());
  for (const std::string& o : nl.outputs) out.push_back(eval(o));
  return out;
}

std::vector<bool> pattern_bits(std::uint64_t x, std::size_t n) {
  std::vector<bool> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = ((x >> (n - 1 - i)) & 1u) != 0;
  return bits;
}

double er_reference(const Netlist& original, const Netlist& locked,
                    const std::vector<std::uint8_t>& key) {
  if (original.n() != locked.n()) throw std::invalid_argument("input width mismatch");
  const std::size_t n = original.n();
  if (n > 20) throw std::invalid_argument("too wide for the reference sweep");
  std::uint64_t bad = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t x = 0; x < total; ++x) {
    const std::vector<bool> in = pattern_bits(x, n);
    if (eval_reference(original, in) != eval_reference(locked, in, key)) ++bad;
  }
  return static_cast<double>(bad) / static_cast<double>(total);
}

std::filesystem::path scratch_dir(const std::string& label) {
  static const std::filesystem::path root = [] {
    std::filesystem::path p =
        std::filesystem::temp_directory_path() / ("locksmith_tests_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
  }();
  std::filesystem::path dir = root / label;
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testsup
