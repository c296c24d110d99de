// Acceptance gate: one line per criterion, [PASS] or [FAIL], with the
// measured values inline. Run with no arguments for the full suite or with
// criterion numbers to run a subset. Exit code = number of failures.

#include <chrono>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <sstream>
#include <vector>

#include "harness.hpp"

namespace acceptance {

std::map<int, std::pair<std::string, CriterionFn>>& registry() {
  static std::map<int, std::pair<std::string, CriterionFn>> r;
  return r;
}

}  // namespace acceptance

int main(int argc, char** argv) {
  std::vector<int> wanted;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long id = std::strtol(argv[i], &end, 10);
    if (end == argv[i] || *end != '\0' || !acceptance::registry().count(static_cast<int>(id))) {
      std::cerr << "unknown criterion '" << argv[i] << "' (have 1.."
                << acceptance::registry().rbegin()->first << ")\n";
      return 64;
    }
    wanted.push_back(static_cast<int>(id));
  }
  if (wanted.empty())
    for (const auto& [id, entry] : acceptance::registry()) wanted.push_back(id);

  int failures = 0;
  for (int id : wanted) {
    const auto& [name, fn] = acceptance::registry().at(id);
    acceptance::Outcome outcome;
    const auto start = std::chrono::steady_clock::now();
    try {
      outcome = fn();
    } catch (const std::exception& e) {
      outcome = acceptance::fail(std::string("threw: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ostringstream line;
    line << (outcome.pass ? "[PASS]" : "[FAIL]") << " " << id << " " << name << ": "
         << outcome.detail << " (" << std::fixed;
    line.precision(1);
    line << secs << "s)";
    std::cout << line.str() << std::endl;
    failures += outcome.pass ? 0 : 1;
  }
  return failures;
}
