#pragma once

// Serialization of report artifacts: report.json, report.txt,
// failures.jsonl and category_means.csv. Output depends only on the inputs;
// nothing time- or locale-dependent is written.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lave/error.hpp"
#include "lave/report/category_means.hpp"
#include "lave/report/correlation_table.hpp"
#include "lave/report/failures.hpp"

namespace lave::report {

struct ReportBundle {
  EvaluationReport evaluation;
  std::optional<FailureSummary> failures;
  std::optional<CategoryMeans> categories;
};

namespace detail {

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string capitalized(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

inline std::string subset_title(const std::string& subset) {
  if (subset == "binary") return "binary questions";
  if (subset == "other") return "other questions";
  return "all questions";
}

inline json significance_json(const std::string& column, const Significance& s) {
  json j{{"column", column}, {"best", s.best}, {"runner_up", s.runner_up}};
  if (s.result) {
    j["mean_diff"] = s.result->mean_diff;
    j["p_value"] = s.result->p_value;
    j["t"] = s.result->t;
    j["significant"] = s.result->significant;
    j["resamples"] = s.result->resamples;
    j["redraws"] = s.result->redraws;
    j["seed"] = s.result->seed;
  }
  if (!s.note.empty()) j["note"] = s.note;
  return j;
}

}  // namespace detail

inline json to_json(const ReportBundle& b) {
  const auto& ev = b.evaluation;
  json j{{"overall_mode", to_string(ev.overall)}, {"bootstrap_resamples", ev.bootstrap}, {"seed", ev.seed}};
  json tables = json::array();
  for (const auto& t : ev.tables) {
    json rows = json::array();
    for (std::size_t m = 0; m < t.metrics.size(); ++m) {
      json cells = json::array();
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& cell = t.cells[m][c];
        json cj{{"column", t.columns[c]}, {"n", cell.n}, {"starred", t.starred(m, c)}};
        cj["coefficient"] = cell.coefficient ? json(*cell.coefficient) : json(nullptr);
        if (!cell.note.empty()) cj["note"] = cell.note;
        cells.push_back(std::move(cj));
      }
      rows.push_back({{"metric", t.metrics[m]}, {"cells", std::move(cells)}});
    }
    json sig = json::array();
    for (std::size_t c = 0; c < t.columns.size(); ++c)
      if (t.significance[c]) sig.push_back(detail::significance_json(t.columns[c], *t.significance[c]));
    tables.push_back({{"method", stats::to_string(t.method)},
                      {"subset", t.subset},
                      {"columns", t.columns},
                      {"rows", std::move(rows)},
                      {"significance", std::move(sig)}});
  }
  j["tables"] = std::move(tables);

  if (b.failures) {
    const auto& f = *b.failures;
    j["failures"] = {{"total", f.total},
                     {"missed_correct", f.missed_correct},
                     {"missed_correct_percent", f.percent(FailureDirection::missed_correct)},
                     {"false_positive", f.false_positive},
                     {"false_positive_percent", f.percent(FailureDirection::false_positive)}};
  }
  if (b.categories) {
    const auto& cm = *b.categories;
    json rows = json::array();
    for (const auto& r : cm.rows) {
      json means = json::object();
      for (std::size_t k = 0; k < cm.metrics.size(); ++k) means[cm.metrics[k]] = r.means[k];
      rows.push_back({{"category", r.category}, {"count", r.count}, {"means", std::move(means)}});
    }
    j["category_means"] = {{"rows", std::move(rows)},
                           {"unlabeled", cm.unlabeled},
                           {"empty_categories", cm.empty_categories}};
  }
  return j;
}

/// Aligned plain-text tables; coefficients are printed x100 with two decimals.
inline std::string render_text(const ReportBundle& b) {
  const auto& ev = b.evaluation;
  std::ostringstream out;
  bool any_star_legend = false;
  for (const auto& t : ev.tables) {
    out << detail::capitalized(stats::to_string(t.method)) << " correlation with human judgment (x100), "
        << detail::subset_title(t.subset) << '\n';

    std::vector<std::vector<std::string>> grid;
    grid.push_back({"metric"});
    for (const auto& c : t.columns) grid.back().push_back(c);
    for (std::size_t m = 0; m < t.metrics.size(); ++m) {
      std::vector<std::string> row{t.metrics[m]};
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const auto& cell = t.cells[m][c];
        std::string s = cell.coefficient ? detail::fixed2(*cell.coefficient * 100.0) : "N/A";
        if (t.starred(m, c)) {
          s += '*';
          any_star_legend = true;
        }
        row.push_back(std::move(s));
      }
      grid.push_back(std::move(row));
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid)
      for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    for (const auto& row : grid) {
      std::string line;
      for (std::size_t k = 0; k < row.size(); ++k) {
        if (k == 0) {
          line += row[k] + std::string(width[k] - row[k].size(), ' ');
        } else {
          line += "  " + std::string(width[k] - row[k].size(), ' ') + row[k];
        }
      }
      out << line << '\n';
    }
    out << '\n';
  }
  if (any_star_legend)
    out << "* best metric in the column beats the runner-up (paired bootstrap t-test, p < 0.05)\n\n";

  if (b.failures) {
    const auto& f = *b.failures;
    out << "Failure cases of VQA accuracy against human judgment (" << f.total << " examples)\n";
    out << "  missed_correct  " << f.missed_correct << " (" << detail::fixed2(f.percent(FailureDirection::missed_correct))
        << "%)\n";
    out << "  false_positive  " << f.false_positive << " (" << detail::fixed2(f.percent(FailureDirection::false_positive))
        << "%)\n\n";
  }
  if (b.categories && !b.categories->rows.empty()) {
    const auto& cm = *b.categories;
    out << "Mean metric score on missed_correct cases by category (x100)\n";
    std::vector<std::vector<std::string>> grid;
    grid.push_back({"category", "n"});
    for (const auto& m : cm.metrics) grid.back().push_back(m);
    for (const auto& r : cm.rows) {
      std::vector<std::string> row{r.category, std::to_string(r.count)};
      for (double v : r.means) row.push_back(detail::fixed2(v * 100.0));
      grid.push_back(std::move(row));
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid)
      for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
    for (const auto& row : grid) {
      std::string line = row[0] + std::string(width[0] - row[0].size(), ' ');
      for (std::size_t k = 1; k < row.size(); ++k) line += "  " + std::string(width[k] - row[k].size(), ' ') + row[k];
      out << line << '\n';
    }
    if (cm.unlabeled) out << "(" << cm.unlabeled << " unlabeled case(s) excluded)\n";
    out << '\n';
  }

  out << "overall column: "
      << (ev.overall == OverallMode::pooled ? "correlation over the pooled examples of all runs"
                                            : "mean of the per-run correlations")
      << '\n';
  if (ev.bootstrap > 0)
    out << "bootstrap: " << ev.bootstrap << " resamples, seed " << ev.seed << '\n';
  else
    out << "bootstrap: off, seed " << ev.seed << '\n';
  return out.str();
}

inline std::string category_means_csv(const CategoryMeans& cm) {
  std::ostringstream out;
  out << "category,count";
  for (const auto& m : cm.metrics) out << ',' << m;
  out << '\n';
  for (const auto& r : cm.rows) {
    out << r.category << ',' << r.count;
    for (double v : r.means) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", v);
      out << ',' << buf;
    }
    out << '\n';
  }
  return out.str();
}

inline std::string failures_jsonl(const FailureSummary& f) {
  std::ostringstream out;
  for (const auto& c : f.cases) out << json(c).dump() << '\n';
  return out.str();
}

namespace detail {

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("cannot write " + p.string());
}

}  // namespace detail

/// Writes every artifact into `dir` (created if needed) and returns the paths.
inline std::vector<std::filesystem::path> write_report(const ReportBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    detail::write_file(dir / name, text);
    written.push_back(dir / name);
  };
  emit("report.json", to_json(b).dump(2) + "\n");
  emit("report.txt", render_text(b));
  if (b.failures) emit("failures.jsonl", failures_jsonl(*b.failures));
  if (b.categories) emit("category_means.csv", category_means_csv(*b.categories));
  return written;
}

}  // namespace lave::report
