#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "locksmith/netlist.hpp"

namespace testsup {

std::filesystem::path fixture_dir();
std::filesystem::path fixture(const std::string& name);
locksmith::Netlist load_fixture(const std::string& name);

// Reference evaluator, deliberately naive: memoized recursion from the
// outputs with a local truth-table switch. Shares no machinery with the
// library's simulator, so the two can cross-check each other.
std::vector<bool> eval_reference(const locksmith::Netlist& nl, const std::vector<bool>& primary,
                                 const std::vector<std::uint8_t>& key = {});

// Bits of pattern `x` over `n` inputs; input i gets bit (n - 1 - i), so the
// pattern index reads like the input vector written left to right.
std::vector<bool> pattern_bits(std::uint64_t x, std::size_t n);

// Exhaustive error rate of `locked` under `key` against `original`, computed
// with eval_reference only.
double er_reference(const locksmith::Netlist& original, const locksmith::Netlist& locked,
                    const std::vector<std::uint8_t>& key);

// Scratch directory unique to this test process, cleaned on first use.
std::filesystem::path scratch_dir(const std::string& label);

}  // namespace testsup
