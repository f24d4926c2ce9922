#pragma once

// Cases where exact-match accuracy disagrees sharply with human judgment:
// missed_correct (accuracy below 0.5, humans unanimous-ish correct) and
// false_positive (accuracy above 0.5, humans say wrong).

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lave/error.hpp"
#include "lave/types.hpp"

namespace lave::report {

using ScoreMap = std::map<std::string, double>;

enum class FailureDirection { missed_correct, false_positive };

inline const char* to_string(FailureDirection d) {
  return d == FailureDirection::missed_correct ? "missed_correct" : "false_positive";
}

struct FailureCase {
  std::string example_id;
  double vqa_accuracy = 0.0;
  double human_score = 0.0;
  FailureDirection direction = FailureDirection::missed_correct;
  std::optional<std::string> category;

  friend bool operator==(const FailureCase&, const FailureCase&) = default;
};

inline void to_json(json& j, const FailureCase& f) {
  j = json{{"example_id", f.example_id},
           {"vqa_accuracy", f.vqa_accuracy},
           {"human_score", f.human_score},
           {"direction", to_string(f.direction)}};
  j["category"] = f.category ? json(*f.category) : json(nullptr);
}

struct FailureSummary {
  std::size_t total = 0;  // examples considered
  std::size_t missed_correct = 0;
  std::size_t false_positive = 0;
  std::vector<FailureCase> cases;  // ordered by example id

  double percent(FailureDirection d) const {
    if (total == 0) return 0.0;
    const auto k = d == FailureDirection::missed_correct ? missed_correct : false_positive;
    return 100.0 * static_cast<double>(k) / static_cast<double>(total);
  }
};

inline std::optional<FailureDirection> classify_failure(double accuracy, double human) {
  if (accuracy < 0.5 && human == 1.0) return FailureDirection::missed_correct;
  if (human == 0.0 && accuracy > 0.5) return FailureDirection::false_positive;
  return std::nullopt;
}

/// Both maps must cover the same example ids.
inline FailureSummary extract_failures(const ScoreMap& accuracy, const ScoreMap& human) {
  std::vector<std::string> unmatched;
  for (const auto& [id, _] : accuracy)
    if (!human.contains(id)) unmatched.push_back(id);
  for (const auto& [id, _] : human)
    if (!accuracy.contains(id)) unmatched.push_back(id);
  if (!unmatched.empty()) {
    std::string msg = "accuracy and human scores are not aligned; e.g. '" + unmatched.front() + "'";
    if (unmatched.size() > 1) msg += " and " + std::to_string(unmatched.size() - 1) + " more";
    throw DataError(msg);
  }

  FailureSummary s;
  s.total = accuracy.size();
  for (const auto& [id, acc] : accuracy) {
    const double h = human.at(id);
    const auto dir = classify_failure(acc, h);
    if (!dir) continue;
    (*dir == FailureDirection::missed_correct ? s.missed_correct : s.false_positive)++;
    s.cases.push_back({id, acc, h, *dir, std::nullopt});
  }
  return s;
}

/// Copies caller-supplied labels onto matching cases. Returns how many cases
/// stayed unlabeled.
inline std::size_t attach_categories(FailureSummary& s, const std::vector<CategoryLabel>& labels) {
  std::map<std::string, std::string> by_id;
  for (const auto& l : labels) {
    auto [it, fresh] = by_id.emplace(l.example_id, l.category);
    if (!fresh && it->second != l.category)
      throw DataError("conflicting category labels for '" + l.example_id + "'");
  }
  std::size_t unlabeled = 0;
  for (auto& c : s.cases) {
    auto it = by_id.find(c.example_id);
    if (it != by_id.end())
      c.category = it->second;
    else
      ++unlabeled;
  }
  return unlabeled;
}

}  // namespace lave::report
