#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "lave/error.hpp"
#include "lave/log.hpp"
#include "lave/report/failures.hpp"

namespace lave::report {

/// Failure-mode taxonomy, in display order. Labels outside this list are
/// still accepted and listed after it alphabetically.
inline constexpr std::array<std::string_view, 9> kFailureCategories{
    "multiple_answers", "over_under_specifying", "synonym",        "broad_bad_question", "incorrect",
    "same_stem",        "hypernym",              "unknown_issue",  "ambiguous_object",
};

struct CategoryRow {
  std::string category;
  std::size_t count = 0;
  std::vector<double> means;  // parallel to CategoryMeans::metrics
};

struct CategoryMeans {
  std::vector<std::string> metrics;
  std::vector<CategoryRow> rows;
  std::size_t unlabeled = 0;
  std::vector<std::string> empty_categories;
};

/// Mean score of each metric over the labeled cases of each category.
/// `scores` maps metric name to per-example scores; every labeled case must
/// have a score for every metric.
inline CategoryMeans category_means(const std::vector<FailureCase>& cases,
                                    const std::map<std::string, ScoreMap>& scores) {
  CategoryMeans out;
  for (const auto& [metric, _] : scores) out.metrics.push_back(metric);

  std::map<std::string, std::vector<const FailureCase*>> by_category;
  for (const auto& c : cases) {
    if (!c.category) {
      ++out.unlabeled;
      continue;
    }
    by_category[*c.category].push_back(&c);
  }
  if (out.unlabeled)
    log_warning(std::to_string(out.unlabeled) + " failure case(s) have no category label and were excluded");

  std::vector<std::string> order(kFailureCategories.begin(), kFailureCategories.end());
  for (const auto& [cat, _] : by_category)
    if (std::find(order.begin(), order.end(), cat) == order.end()) order.push_back(cat);

  for (const auto& cat : order) {
    auto it = by_category.find(cat);
    if (it == by_category.end()) {
      out.empty_categories.push_back(cat);
      continue;
    }
    CategoryRow row{cat, it->second.size(), {}};
    for (const auto& [metric, table] : scores) {
      double sum = 0.0;
      for (const FailureCase* c : it->second) {
        auto s = table.find(c->example_id);
        if (s == table.end()) throw DataError("no '" + metric + "' score for '" + c->example_id + "'");
        sum += s->second;
      }
      row.means.push_back(sum / static_cast<double>(row.count));
    }
    out.rows.push_back(std::move(row));
  }
  if (!out.empty_categories.empty()) {
    std::string list;
    for (const auto& c : out.empty_categories) list += (list.empty() ? "" : ", ") + c;
    log_warning("no labeled failures in categories: " + list);
  }
  return out;
}

}  // namespace lave::report
