#ifndef CFGADV_DATASET_HPP
#define CFGADV_DATASET_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cfgadv/error.hpp"
#include "cfgadv/features.hpp"
#include "cfgadv/graph.hpp"

namespace cfgadv {

struct FeatureRow {
  std::string sample_id;
  Label label = Label::Benign;
  FeatureVector features{};
};

/// %.17g: round-trips every double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string feature_csv_header() {
  std::string h = "sample_id,label";
  for (std::size_t i = 0; i < kFeatureCount; ++i) {
    char buf[8];
    std::snprintf(buf, sizeof buf, ",f%02zu", i);
    h += buf;
  }
  return h;
}

inline void write_feature_csv(std::ostream& os, const std::vector<FeatureRow>& rows) {
  os << feature_csv_header() << '\n';
  for (const auto& r : rows) {
    os << r.sample_id << ',' << to_string(r.label);
    for (double v : r.features) os << ',' << format_double(v);
    os << '\n';
  }
}

inline std::vector<FeatureRow> read_feature_csv(std::istream& is, const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(is, line) || line != feature_csv_header())
    throw DataError(origin + ": missing or unexpected feature CSV header");
  std::vector<FeatureRow> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 2 + kFeatureCount)
      throw DataError(origin + ":" + std::to_string(lineno) + ": expected " + std::to_string(2 + kFeatureCount) +
                      " columns");
    FeatureRow r;
    r.sample_id = cells[0];
    auto l = parse_label(cells[1]);
    if (!l) throw DataError(origin + ":" + std::to_string(lineno) + ": bad label '" + cells[1] + "'");
    r.label = *l;
    for (std::size_t i = 0; i < kFeatureCount; ++i) {
      const auto& c = cells[2 + i];
      auto [p, ec] = std::from_chars(c.data(), c.data() + c.size(), r.features[i]);
      if (ec != std::errc() || p != c.data() + c.size())
        throw DataError(origin + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<FeatureRow> read_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_feature_csv(in, path);
}

}  // namespace cfgadv

#endif  // CFGADV_DATASET_HPP
