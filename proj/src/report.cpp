#include "mcd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mcd {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

std::string series_str(const std::vector<std::pair<double, double>>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += fmt(s[i].first) + ":" + fmt(s[i].second);
  }
  return out + "]";
}

}  // namespace

std::vector<ReportRow> load_summary_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("report", "cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("report", path + " is empty");
  const std::vector<std::string> header = split_csv(line);
  std::vector<ReportRow> rows;
  std::size_t lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv(line);
    if (cells.size() != header.size())
      throw ConfigError("report", path + ":" + std::to_string(lineno) +
                                      ": expected " + std::to_string(header.size()) +
                                      " columns, got " + std::to_string(cells.size()));
    ReportRow row;
    for (std::size_t i = 0; i < header.size(); ++i) {
      const std::string& key = header[i];
      if (key == "protocol") {
        row.protocol = cells[i];
      } else if (key == "seed") {
        row.seed = std::stoull(cells[i]);
      } else if (key == "sweep_param") {
        // identity column; the value is echoed in every row
      } else if (key == "sweep_value") {
        row.sweep_value = std::stod(cells[i]);
      } else {
        row.cols[key] = std::stod(cells[i]);
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

// Seed-averaged (sweep_value, metric) series for one protocol, sorted by value.
// With ratio_column set, the per-row ratio is averaged.
std::vector<std::pair<double, double>> build_series(
    const std::vector<ReportRow>& rows, const std::string& protocol,
    const std::string& column, const std::string& ratio_column,
    std::string& error) {
  std::map<double, std::pair<double, std::uint64_t>> acc;
  for (const ReportRow& r : rows) {
    if (r.protocol != protocol) continue;
    auto it = r.cols.find(column);
    if (it == r.cols.end()) {
      error = "column \"" + column + "\" not in summary";
      return {};
    }
    double v = it->second;
    if (!ratio_column.empty()) {
      auto rt = r.cols.find(ratio_column);
      if (rt == r.cols.end()) {
        error = "column \"" + ratio_column + "\" not in summary";
        return {};
      }
      if (rt->second == 0) {
        error = "ratio column \"" + ratio_column + "\" is zero";
        return {};
      }
      v /= rt->second;
    }
    auto& slot = acc[r.sweep_value];
    slot.first += v;
    slot.second += 1;
  }
  if (acc.empty()) {
    error = "no rows for protocol \"" + protocol + "\"";
    return {};
  }
  std::vector<std::pair<double, double>> series;
  for (const auto& [value, sum_n] : acc)
    series.emplace_back(value, sum_n.first / static_cast<double>(sum_n.second));
  return series;
}

AssertionResult eval_one(const TrendAssertion& a,
                         const std::vector<ReportRow>& rows) {
  AssertionResult res;
  res.name = a.name;
  std::string err;
  const auto sa = build_series(rows, a.protocol, a.column, a.ratio_column, err);
  if (!err.empty()) {
    res.detail = err;
    return res;
  }

  const bool needs_b = a.kind == TrendAssertion::Kind::Dominates ||
                       a.kind == TrendAssertion::Kind::WithinFactor ||
                       (a.kind == TrendAssertion::Kind::Constant && !a.protocol_b.empty());
  std::vector<std::pair<double, double>> sb;
  if (needs_b) {
    sb = build_series(rows, a.protocol_b, a.column, a.ratio_column, err);
    if (!err.empty()) {
      res.detail = err;
      return res;
    }
    if (sb.size() != sa.size()) {
      res.detail = "series length mismatch between protocols";
      return res;
    }
    for (std::size_t i = 0; i < sa.size(); ++i)
      if (sa[i].first != sb[i].first) {
        res.detail = "sweep values differ between protocols";
        return res;
      }
  }

  switch (a.kind) {
    case TrendAssertion::Kind::Increasing: {
      if (sa.size() < 2) {
        res.detail = "need at least 2 points, got " + std::to_string(sa.size());
        return res;
      }
      res.pass = true;
      for (std::size_t i = 1; i < sa.size(); ++i)
        if (!(sa[i].second > sa[i - 1].second)) res.pass = false;
      res.detail = a.protocol + " " + a.column + " " + series_str(sa);
      return res;
    }
    case TrendAssertion::Kind::Decreasing: {
      if (sa.size() < 2) {
        res.detail = "need at least 2 points, got " + std::to_string(sa.size());
        return res;
      }
      res.pass = true;
      for (std::size_t i = 1; i < sa.size(); ++i)
        if (!(sa[i].second < sa[i - 1].second)) res.pass = false;
      res.detail = a.protocol + " " + a.column + " " + series_str(sa);
      return res;
    }
    case TrendAssertion::Kind::Constant: {
      std::vector<std::pair<double, double>> s = sa;
      if (!sb.empty())
        for (std::size_t i = 0; i < s.size(); ++i) s[i].second -= sb[i].second;
      double lo = s[0].second, hi = s[0].second, mean = 0;
      for (const auto& [_, y] : s) {
        lo = std::min(lo, y);
        hi = std::max(hi, y);
        mean += y;
      }
      mean /= static_cast<double>(s.size());
      const double denom = std::max(std::abs(mean), 1e-12);
      const double spread = (hi - lo) / denom;
      res.pass = spread <= a.tol;
      res.detail = "relative spread " + fmt(spread) + " (tol " + fmt(a.tol) +
                   ") over " + series_str(s);
      return res;
    }
    case TrendAssertion::Kind::Dominates: {
      res.pass = true;
      for (std::size_t i = 0; i < sa.size(); ++i)
        if (!(sa[i].second > sb[i].second)) res.pass = false;
      res.detail = a.protocol + " " + series_str(sa) + " vs " + a.protocol_b +
                   " " + series_str(sb);
      return res;
    }
    case TrendAssertion::Kind::LinearFit: {
      if (sa.size() < 3) {
        res.detail = "need at least 3 points, got " + std::to_string(sa.size());
        return res;
      }
      double sx = 0, sy = 0;
      const double n = static_cast<double>(sa.size());
      for (const auto& [x, y] : sa) {
        sx += x;
        sy += y;
      }
      const double mx = sx / n, my = sy / n;
      double sxx = 0, syy = 0, sxy = 0;
      for (const auto& [x, y] : sa) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
      }
      const double r2 = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
      res.pass = r2 >= a.min_r2;
      res.detail = "r2 " + fmt(r2) + " (min " + fmt(a.min_r2) + ") over " +
                   series_str(sa);
      return res;
    }
    case TrendAssertion::Kind::WithinFactor: {
      res.pass = true;
      double worst = 0;
      for (std::size_t i = 0; i < sa.size(); ++i) {
        const double bound = a.factor * sb[i].second + a.offset;
        if (sa[i].second > bound) res.pass = false;
        if (bound > 0) worst = std::max(worst, sa[i].second / bound);
      }
      res.detail = a.protocol + " " + series_str(sa) + " vs bound " + fmt(a.factor) +
                   "*" + a.protocol_b + "+" + fmt(a.offset) + " " + series_str(sb) +
                   ", worst use " + fmt(worst);
      return res;
    }
  }
  res.detail = "unhandled assertion kind";
  return res;
}

}  // namespace

std::vector<AssertionResult> evaluate(const std::vector<TrendAssertion>& assertions,
                                      const std::vector<ReportRow>& rows) {
  std::vector<AssertionResult> out;
  out.reserve(assertions.size());
  for (const TrendAssertion& a : assertions) out.push_back(eval_one(a, rows));
  return out;
}

std::vector<TrendAssertion> builtin_suite(const std::string& preset,
                                          double index_cost_units) {
  using K = TrendAssertion::Kind;
  std::vector<TrendAssertion> v;
  const auto add = [&](TrendAssertion a) { v.push_back(std::move(a)); };
  if (preset == "fig2") {
    add({K::Increasing, "fresh-rt-grows-with-check-cost", "rt_mean", "", "fresh",
         "", 0, 0, 0, 0});
    add({K::Constant, "mcd-rt-flat-over-check-cost", "rt_mean", "", "mcd", "",
         0.01, 0, 0, 0});
    add({K::Constant, "nxn-rt-flat-over-check-cost", "rt_mean", "", "nxn", "",
         0.01, 0, 0, 0});
    add({K::Constant, "perfect-rt-flat-over-check-cost", "rt_mean", "", "perfect",
         "", 0.01, 0, 0, 0});
  } else if (preset == "fig3") {
    for (const char* p : {"mcd", "fresh", "nxn", "perfect"})
      add({K::Increasing, std::string(p) + "-pc-grows-with-item-size", "pc_mean",
           "", p, "", 0, 0, 0, 0});
    add({K::Constant, "mcd-pc-tracks-perfect-plus-index", "pc_mean", "", "mcd",
         "perfect", 0.05, 0, 0, 0});
    add({K::Dominates, "fresh-pc-above-mcd", "pc_mean", "", "fresh", "mcd", 0, 0,
         0, 0});
  } else if (preset == "fig4") {
    add({K::Dominates, "nxn-so-above-mcd", "so_per_cycle", "", "nxn", "mcd", 0, 0,
         0, 0});
    add({K::Dominates, "fresh-so-above-mcd", "so_per_cycle", "", "fresh", "mcd",
         0, 0, 0, 0});
    add({K::Decreasing, "nxn-so-fraction-shrinks-with-item-size", "so_per_cycle",
         "cycle_len_mean", "nxn", "", 0, 0, 0, 0});
  } else if (preset == "fig5") {
    add({K::LinearFit, "fresh-pc-linear-in-position", "pc_mean", "", "fresh", "",
         0, 0, 0, 0.99});
    add({K::WithinFactor, "mcd-pc-near-perfect-plus-index", "pc_mean", "", "mcd",
         "perfect", 0, 1.10, index_cost_units, 0});
    add({K::Dominates, "nxn-pc-above-mcd", "pc_mean", "", "nxn", "mcd", 0, 0, 0,
         0});
  } else {
    throw ConfigError("preset", "no built-in assertions for \"" + preset + "\"");
  }
  return v;
}

std::vector<TrendAssertion> load_assertions(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("assert", "cannot open " + path);
  nlohmann::json j;
  try {
    f >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("assert", std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_array()) throw ConfigError("assert", "expected a JSON array");
  std::vector<TrendAssertion> out;
  for (const auto& o : j) {
    if (!o.is_object()) throw ConfigError("assert", "expected objects in array");
    TrendAssertion a;
    const std::string kind = o.value("kind", "");
    if (kind == "increasing") a.kind = TrendAssertion::Kind::Increasing;
    else if (kind == "decreasing") a.kind = TrendAssertion::Kind::Decreasing;
    else if (kind == "constant") a.kind = TrendAssertion::Kind::Constant;
    else if (kind == "dominates") a.kind = TrendAssertion::Kind::Dominates;
    else if (kind == "linear_fit") a.kind = TrendAssertion::Kind::LinearFit;
    else if (kind == "within_factor") a.kind = TrendAssertion::Kind::WithinFactor;
    else throw ConfigError("assert", "unknown kind \"" + kind + "\"");
    a.name = o.value("name", kind);
    a.column = o.value("column", "");
    if (a.column.empty()) throw ConfigError("assert", a.name + ": column required");
    a.ratio_column = o.value("ratio_column", "");
    a.protocol = o.value("protocol", "");
    if (a.protocol.empty())
      throw ConfigError("assert", a.name + ": protocol required");
    a.protocol_b = o.value("protocol_b", "");
    a.tol = o.value("tol", 0.0);
    a.factor = o.value("factor", 0.0);
    a.offset = o.value("offset", 0.0);
    a.min_r2 = o.value("min_r2", 0.0);
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace mcd
