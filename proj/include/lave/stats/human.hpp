#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lave/error.hpp"
#include "lave/types.hpp"

namespace lave::stats {

/// Expected rater count per item. With `strict`, every item must have
/// exactly `raters` verdicts; otherwise thresholds follow each item's own
/// count.
struct RaterPolicy {
  int raters = 5;
  bool strict = true;
};

/// Correct-vote thresholds for k raters: ceil(0.8 k) for full credit and
/// ceil(0.4 k) for half credit (4 and 2 when k = 5).
constexpr int full_credit_threshold(int k) { return (4 * k + 4) / 5; }
constexpr int half_credit_threshold(int k) { return (2 * k + 4) / 5; }

inline double score_from_votes(int correct, int raters) {
  if (correct >= full_credit_threshold(raters)) return 1.0;
  if (correct >= half_credit_threshold(raters)) return 0.5;
  return 0.0;
}

/// Collapses `correct` votes out of `n` into 0, 0.5 or 1.
inline double aggregate_votes(int correct, int n, const RaterPolicy& policy = {}) {
  if (n <= 0) throw DataError("no ratings to aggregate");
  if (policy.strict && n != policy.raters)
    throw DataError("expected " + std::to_string(policy.raters) + " ratings, got " + std::to_string(n));
  return score_from_votes(correct, policy.strict ? policy.raters : n);
}

/// Collapses one item's binary verdicts into 0, 0.5 or 1.
inline double aggregate_human(std::span<const bool> ratings, const RaterPolicy& policy = {}) {
  return aggregate_votes(static_cast<int>(std::count(ratings.begin(), ratings.end(), true)),
                         static_cast<int>(ratings.size()), policy);
}

/// Groups raw verdicts by example (first-appearance order) and aggregates
/// each group. Duplicate (example, annotator) pairs and rater-count
/// violations are DataErrors naming the item.
inline std::vector<HumanScore> aggregate_judgments(const std::vector<HumanJudgmentRaw>& raw,
                                                   const RaterPolicy& policy = {}) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<std::string, bool>>> by_item;
  for (const auto& j : raw) {
    auto& votes = by_item[j.example_id];
    if (votes.empty()) order.push_back(j.example_id);
    for (const auto& [annotator, _] : votes)
      if (annotator == j.annotator_id)
        throw DataError("duplicate judgment by '" + j.annotator_id + "' for item '" + j.example_id + "'");
    votes.emplace_back(j.annotator_id, j.correct);
  }
  std::vector<HumanScore> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    const auto& votes = by_item[id];
    const auto correct = std::count_if(votes.begin(), votes.end(), [](const auto& v) { return v.second; });
    try {
      out.emplace_back(id, aggregate_votes(static_cast<int>(correct), static_cast<int>(votes.size()), policy),
                       static_cast<int>(votes.size()));
    } catch (const DataError& e) {
      throw DataError("item '" + id + "': " + e.what());
    }
  }
  return out;
}

}  // namespace lave::stats
