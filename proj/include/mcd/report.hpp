#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mcd/types.hpp"

#include <json.hpp>

namespace mcd {

// One parsed summary.csv row: identity columns plus named metric columns.
struct ReportRow {
  std::string protocol;
  std::uint64_t seed = 0;
  double sweep_value = 0;
  std::map<std::string, double> cols;
};

std::vector<ReportRow> load_summary_csv(const std::string& path);

// Trend assertions evaluated over seed-averaged series (metric vs sweep value,
// one series per protocol).
//   Increasing   strictly increasing series for `protocol`
//   Decreasing   strictly decreasing series
//   Constant     max relative spread of the series <= tol; with protocol_b set,
//                applies to the pointwise difference a - b
//   Dominates    series(protocol) > series(protocol_b) at every point
//   LinearFit    least-squares r^2 of series vs sweep value >= min_r2
//   WithinFactor series(protocol) <= factor * series(protocol_b) + offset everywhere
struct TrendAssertion {
  enum class Kind { Increasing, Decreasing, Constant, Dominates, LinearFit, WithinFactor };
  Kind kind{};
  std::string name;
  std::string column;            // e.g. "pc_mean"
  std::string ratio_column;      // optional: evaluate column / ratio_column
  std::string protocol;
  std::string protocol_b;        // Dominates / WithinFactor / Constant-difference
  double tol = 0.0;
  double factor = 0.0;
  double offset = 0.0;
  double min_r2 = 0.0;
};

struct AssertionResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<AssertionResult> evaluate(const std::vector<TrendAssertion>& assertions,
                                      const std::vector<ReportRow>& rows);

// The built-in acceptance expectations for each preset, tolerances pinned.
// index_cost_units: the indexed-control listen cost per cycle for the preset's
// configuration (needed by fig5's WithinFactor offset).
std::vector<TrendAssertion> builtin_suite(const std::string& preset,
                                          double index_cost_units);

// Assertions from a user JSON file (array of objects mirroring TrendAssertion).
std::vector<TrendAssertion> load_assertions(const std::string& path);

}  // namespace mcd
