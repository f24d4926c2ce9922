#pragma once

// Metric-vs-human correlation tables: one column per (model, dataset) run
// plus an overall column, optionally split into binary and other questions,
// with the best metric in each column starred when a paired bootstrap says it
// beats the runner-up.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lave/error.hpp"
#include "lave/stats/bootstrap.hpp"
#include "lave/stats/correlation.hpp"

namespace lave::report {

/// Scores of one model on one dataset, aligned by position with `ids`.
struct Run {
  std::string model;
  std::string dataset;
  std::vector<std::string> ids;
  std::map<std::string, std::vector<double>> metrics;
  std::vector<double> human;
  std::vector<bool> is_binary;

  std::string label() const { return model + "/" + dataset; }

  void validate() const {
    const auto n = ids.size();
    if (human.size() != n) throw DataError("run " + label() + ": human scores not aligned with ids");
    if (!is_binary.empty() && is_binary.size() != n)
      throw DataError("run " + label() + ": binary flags not aligned with ids");
    for (const auto& [name, v] : metrics)
      if (v.size() != n) throw DataError("run " + label() + ": metric '" + name + "' not aligned with ids");
  }
};

enum class OverallMode { pooled, mean };

inline const char* to_string(OverallMode m) { return m == OverallMode::pooled ? "pooled" : "mean"; }

inline OverallMode parse_overall_mode(std::string_view s) {
  if (s == "pooled") return OverallMode::pooled;
  if (s == "mean") return OverallMode::mean;
  throw Error("unknown overall mode '" + std::string(s) + "' (expected pooled or mean)");
}

struct TableOptions {
  std::vector<stats::CorrelationMethod> methods{stats::CorrelationMethod::spearman};
  bool split_binary = false;
  OverallMode overall = OverallMode::pooled;
  int bootstrap = 0;  // resamples; 0 disables significance testing
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<std::string> metric_order;  // empty: alphabetical
};

/// One correlation value. An empty coefficient is rendered as N/A; `note`
/// says why.
struct Cell {
  std::optional<double> coefficient;
  std::size_t n = 0;
  std::string note;
};

struct Significance {
  std::string best;
  std::string runner_up;
  std::optional<stats::SignificanceResult> result;
  std::string note;  // set when the test could not be run
};

struct Table {
  stats::CorrelationMethod method;
  std::string subset;                // "all", "binary" or "other"
  std::vector<std::string> columns;  // run labels, then "Overall"
  std::vector<std::string> metrics;
  std::vector<std::vector<Cell>> cells;                    // [metric][column]
  std::vector<std::optional<Significance>> significance;  // [column]

  bool starred(std::size_t metric, std::size_t column) const {
    const auto& s = significance[column];
    return s && s->result && s->result->significant && metrics[metric] == s->best;
  }
};

struct EvaluationReport {
  std::vector<Table> tables;
  OverallMode overall = OverallMode::pooled;
  int bootstrap = 0;
  std::uint64_t seed = 0;
};

namespace detail {

struct Slice {
  std::map<std::string, std::vector<double>> metrics;
  std::vector<double> human;
};

inline Slice take(const Run& run, const std::string& subset) {
  Slice s;
  for (std::size_t i = 0; i < run.ids.size(); ++i) {
    if (subset != "all") {
      const bool binary = !run.is_binary.empty() && run.is_binary[i];
      if ((subset == "binary") != binary) continue;
    }
    s.human.push_back(run.human[i]);
    for (const auto& [name, v] : run.metrics) s.metrics[name].push_back(v[i]);
  }
  return s;
}

inline void append(Slice& into, const Slice& from) {
  into.human.insert(into.human.end(), from.human.begin(), from.human.end());
  for (const auto& [name, v] : from.metrics) {
    auto& dst = into.metrics[name];
    dst.insert(dst.end(), v.begin(), v.end());
  }
}

inline Cell correlate_cell(stats::CorrelationMethod m, const std::vector<double>& x, const std::vector<double>& h) {
  Cell c;
  c.n = x.size();
  try {
    c.coefficient = stats::correlate(m, x, h).coefficient;
  } catch (const StatsError& e) {
    c.note = e.what();
  }
  return c;
}

inline std::optional<Significance> test_best(const Table& t, std::size_t column, const Slice* data,
                                             const TableOptions& opt) {
  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t m = 0; m < t.metrics.size(); ++m)
    if (const auto& c = t.cells[m][column].coefficient) ranked.emplace_back(*c, m);
  if (ranked.size() < 2) return std::nullopt;
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  Significance s;
  s.best = t.metrics[ranked[0].second];
  s.runner_up = t.metrics[ranked[1].second];
  if (!data) {
    s.note = "not tested: column is a mean of cells";
    return s;
  }
  stats::BootstrapOptions bo;
  bo.resamples = opt.bootstrap;
  bo.seed = opt.seed;
  bo.threads = opt.threads;
  try {
    s.result = stats::bootstrap_compare(data->metrics.at(s.best), data->metrics.at(s.runner_up), data->human, t.method,
                                        bo);
  } catch (const StatsError& e) {
    s.note = e.what();
  }
  return s;
}

}  // namespace detail

/// Builds one table per (method, subset). Cells whose vectors are constant or
/// too short are kept as N/A.
inline EvaluationReport correlation_table(const std::vector<Run>& runs, const TableOptions& opt) {
  if (runs.empty()) throw DataError("no runs to report");
  for (const auto& r : runs) r.validate();

  std::vector<std::string> metrics = opt.metric_order;
  if (metrics.empty())
    for (const auto& [name, _] : runs.front().metrics) metrics.push_back(name);
  for (const auto& r : runs)
    for (const auto& m : metrics)
      if (!r.metrics.contains(m)) throw DataError("run " + r.label() + " has no scores for metric '" + m + "'");

  std::vector<std::string> subsets{"all"};
  if (opt.split_binary) {
    subsets.push_back("binary");
    subsets.push_back("other");
  }

  EvaluationReport report;
  report.overall = opt.overall;
  report.bootstrap = opt.bootstrap;
  report.seed = opt.seed;

  for (const auto method : opt.methods) {
    for (const auto& subset : subsets) {
      Table t;
      t.method = method;
      t.subset = subset;
      t.metrics = metrics;
      std::vector<detail::Slice> slices;
      detail::Slice pooled;
      for (const auto& r : runs) {
        t.columns.push_back(r.label());
        slices.push_back(detail::take(r, subset));
        detail::append(pooled, slices.back());
      }
      t.columns.push_back("Overall");
      const std::size_t overall_col = runs.size();

      t.cells.assign(metrics.size(), std::vector<Cell>(t.columns.size()));
      for (std::size_t m = 0; m < metrics.size(); ++m) {
        for (std::size_t c = 0; c < runs.size(); ++c)
          t.cells[m][c] = detail::correlate_cell(method, slices[c].metrics[metrics[m]], slices[c].human);
        if (opt.overall == OverallMode::pooled) {
          t.cells[m][overall_col] = detail::correlate_cell(method, pooled.metrics[metrics[m]], pooled.human);
        } else {
          Cell cell;
          cell.n = pooled.human.size();
          double sum = 0.0;
          std::size_t k = 0;
          for (std::size_t c = 0; c < runs.size(); ++c)
            if (const auto& v = t.cells[m][c].coefficient) {
              sum += *v;
              ++k;
            }
          if (k)
            cell.coefficient = sum / static_cast<double>(k);
          else
            cell.note = "no defined cells to average";
          t.cells[m][overall_col] = cell;
        }
      }

      t.significance.resize(t.columns.size());
      if (opt.bootstrap > 0) {
        for (std::size_t c = 0; c < runs.size(); ++c) t.significance[c] = detail::test_best(t, c, &slices[c], opt);
        t.significance[overall_col] =
            detail::test_best(t, overall_col, opt.overall == OverallMode::pooled ? &pooled : nullptr, opt);
      }
      report.tables.push_back(std::move(t));
    }
  }
  return report;
}

}  // namespace lave::report
