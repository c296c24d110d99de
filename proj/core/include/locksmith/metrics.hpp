#pragma once

#include <string>
#include <vector>

#include "locksmith/netlist.hpp"
#include "locksmith/sim.hpp"

namespace locksmith::metrics {

// Number of differing bits; both keys must have the same width.
int hamming_distance(const Key& a, const Key& b);

// 100 * (1 - HD/p): percentage of key bits the report got right.
double prediction_accuracy(const Key& reported, const Key& correct);

// 100 * (1 - ER): how close the circuit is, functionally, to unlocked when
// the reported key is applied. 100 means exact; a single always-wrong output
// scores 0.
double key_precision(const Netlist& original, const Netlist& locked, const Key& reported,
                     const sim::ErOptions& opts = {});

// One evaluated configuration. The key-precision columns hold means over 5,
// 10 and 50 sampled validation circuits.
struct ReportRow {
  std::string scheme_set;
  double prediction_accuracy = 0.0;
  double key_precision_5 = 0.0;
  double key_precision_10 = 0.0;
  double key_precision_50 = 0.0;
};

// Aligned text table / CSV of the same rows, sorted by scheme set so output
// is stable regardless of insertion order. The CSV parses back to identical
// rows (values round-trip through shortest-exact formatting).
std::string report_table_text(std::vector<ReportRow> rows);
std::string report_table_csv(std::vector<ReportRow> rows);
std::vector<ReportRow> report_table_from_csv(const std::string& text);

}  // namespace locksmith::metrics
