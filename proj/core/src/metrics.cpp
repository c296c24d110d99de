#include "locksmith/metrics.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace locksmith::metrics {

int hamming_distance(const Key& a, const Key& b) {
  if (a.width() != b.width())
    throw NetlistError("key widths differ: " + std::to_string(a.width()) + " vs " +
                       std::to_string(b.width()));
  int hd = 0;
  for (std::size_t i = 0; i < a.width(); ++i)
    if ((a.bits[i] != 0) != (b.bits[i] != 0)) ++hd;
  return hd;
}

double prediction_accuracy(const Key& reported, const Key& correct) {
  if (correct.width() == 0) throw NetlistError("cannot score an empty key");
  const int hd = hamming_distance(reported, correct);
  return 100.0 * (1.0 - static_cast<double>(hd) / static_cast<double>(correct.width()));
}

double key_precision(const Netlist& original, const Netlist& locked, const Key& reported,
                     const sim::ErOptions& opts) {
  const sim::ErReport rep = sim::error_rate(original, locked, reported.bits, opts);
  return 100.0 * (1.0 - rep.er);
}

namespace {

const char* const kHeaders[] = {"scheme set", "pred. accuracy", "key prec. (5)",
                                "key prec. (10)", "key prec. (50)"};

void sort_rows(std::vector<ReportRow>& rows) {
  std::sort(rows.begin(), rows.end(),
            [](const ReportRow& a, const ReportRow& b) { return a.scheme_set < b.scheme_set; });
}

std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// Shortest representation that parses back to the identical double.
std::string exact(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

}  // namespace

std::string report_table_text(std::vector<ReportRow> rows) {
  sort_rows(rows);
  std::vector<std::array<std::string, 5>> cells;
  cells.push_back({kHeaders[0], kHeaders[1], kHeaders[2], kHeaders[3], kHeaders[4]});
  for (const ReportRow& r : rows)
    cells.push_back({r.scheme_set, fixed2(r.prediction_accuracy), fixed2(r.key_precision_5),
                     fixed2(r.key_precision_10), fixed2(r.key_precision_50)});

  std::array<std::size_t, 5> width{};
  for (const auto& row : cells)
    for (std::size_t c = 0; c < 5; ++c) width[c] = std::max(width[c], row[c].size());

  std::ostringstream os;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t c = 0; c < 5; ++c) {
      const std::string& cell = cells[i][c];
      if (c == 0) {
        os << cell << std::string(width[c] - cell.size(), ' ');
      } else {
        os << "  " << std::string(width[c] - cell.size(), ' ') << cell;
      }
    }
    os << '\n';
    if (i == 0) {
      std::size_t total = width[0];
      for (std::size_t c = 1; c < 5; ++c) total += 2 + width[c];
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

std::string report_table_csv(std::vector<ReportRow> rows) {
  sort_rows(rows);
  std::ostringstream os;
  os << "scheme_set,prediction_accuracy,key_precision_5,key_precision_10,key_precision_50\n";
  for (const ReportRow& r : rows)
    os << r.scheme_set << ',' << exact(r.prediction_accuracy) << ',' << exact(r.key_precision_5)
       << ',' << exact(r.key_precision_10) << ',' << exact(r.key_precision_50) << '\n';
  return os.str();
}

std::vector<ReportRow> report_table_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw NetlistError("empty report CSV");
  std::vector<ReportRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::array<std::string, 5> parts;
    std::size_t start = 0;
    for (std::size_t c = 0; c < 5; ++c) {
      const std::size_t comma = line.find(',', start);
      if (c < 4 && comma == std::string::npos)
        throw NetlistError("report CSV row has too few columns: " + line);
      parts[c] = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma + 1;
    }
    ReportRow r;
    r.scheme_set = parts[0];
    r.prediction_accuracy = std::strtod(parts[1].c_str(), nullptr);
    r.key_precision_5 = std::strtod(parts[2].c_str(), nullptr);
    r.key_precision_10 = std::strtod(parts[3].c_str(), nullptr);
    r.key_precision_50 = std::strtod(parts[4].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace locksmith::metrics
