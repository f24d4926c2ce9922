#pragma once

// Domain records shared by every stage of the pipeline, plus their JSON
// mapping. All records are plain values; validation happens in the JSON
// readers and in the few checked constructors below.

#include <cctype>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"

namespace lave {

using json = nlohmann::json;

namespace detail {

inline bool is_blank(std::string_view s) {
  for (unsigned char c : s)
    if (!std::isspace(c)) return false;
  return true;
}

template <typename T>
T required(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) throw DataError(std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

template <typename T>
std::optional<T> optional_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw DataError(std::string("field '") + key + "' has the wrong type");
  }
}

}  // namespace detail

/// One question with its reference answers. References are a multiset kept
/// as a list: duplicates carry the annotator-consensus signal.
struct VqaExample {
  std::string id;
  std::string question;
  std::vector<std::string> references;
  std::optional<std::string> caption;
  std::optional<std::string> dataset;

  void validate() const {
    if (id.empty()) throw DataError("example id is empty");
    if (references.empty()) throw DataError("example '" + id + "' has no references");
    for (const auto& r : references)
      if (detail::is_blank(r)) throw DataError("example '" + id + "' has a blank reference");
  }

  friend bool operator==(const VqaExample&, const VqaExample&) = default;
};

/// A model's answer to one example.
struct Candidate {
  std::string example_id;
  std::string model;
  std::string answer;

  friend bool operator==(const Candidate&, const Candidate&) = default;
};

/// One annotator's binary verdict on one candidate.
struct HumanJudgmentRaw {
  std::string example_id;
  std::string annotator_id;
  bool correct = false;

  friend bool operator==(const HumanJudgmentRaw&, const HumanJudgmentRaw&) = default;
};

/// Aggregated human verdict. The score is restricted to {0, 0.5, 1} at
/// construction time.
class HumanScore {
 public:
  HumanScore(std::string example_id, double score, int n_raters)
      : example_id_(std::move(example_id)), score_(score), n_raters_(n_raters) {
    if (score != 0.0 && score != 0.5 && score != 1.0)
      throw DataError("human score must be one of 0, 0.5, 1 (got " + std::to_string(score) + ")");
    if (n_raters < 0) throw DataError("negative rater count");
  }

  const std::string& example_id() const noexcept { return example_id_; }
  double score() const noexcept { return score_; }
  int n_raters() const noexcept { return n_raters_; }

  friend bool operator==(const HumanScore&, const HumanScore&) = default;

 private:
  std::string example_id_;
  double score_;
  int n_raters_;
};

struct MetricScore {
  std::string example_id;
  std::string metric;
  double score = 0.0;

  void validate() const {
    if (!(score >= 0.0 && score <= 1.0))
      throw DataError("metric score out of [0,1] for '" + example_id + "'");
  }

  friend bool operator==(const MetricScore&, const MetricScore&) = default;
};

/// Output of one judge call. `rating` and `error` are mutually exclusive;
/// `score` is (rating - 1) / 2 when a rating exists. An errored result may
/// still carry score 0 when the caller asked for errors to be scored.
struct LaveResult {
  std::string example_id;
  std::optional<int> rating;
  std::optional<double> score;
  std::string rationale;
  std::string raw_completion;
  std::string prompt_hash;
  std::string backend;
  std::optional<std::string> error;

  void validate() const {
    if (rating.has_value() == error.has_value())
      throw DataError("lave result '" + example_id + "' must carry exactly one of rating or error");
    if (rating) {
      if (*rating < 1 || *rating > 3) throw DataError("rating out of range for '" + example_id + "'");
      if (!score || *score != (*rating - 1) / 2.0)
        throw DataError("score does not match rating for '" + example_id + "'");
    } else if (score && *score != 0.0) {
      throw DataError("errored lave result '" + example_id + "' may only be scored 0");
    }
  }

  friend bool operator==(const LaveResult&, const LaveResult&) = default;
};

/// Caller-supplied failure-mode label for one example.
struct CategoryLabel {
  std::string example_id;
  std::string category;

  friend bool operator==(const CategoryLabel&, const CategoryLabel&) = default;
};

// --- JSON mapping ---------------------------------------------------------
// Readers throw DataError without a line; read_jsonl adds it.

inline void to_json(json& j, const VqaExample& e) {
  j = json{{"id", e.id}, {"question", e.question}, {"references", e.references}};
  if (e.caption) j["caption"] = *e.caption;
  if (e.dataset) j["dataset"] = *e.dataset;
}

inline void from_json(const json& j, VqaExample& e) {
  e.id = detail::required<std::string>(j, "id");
  e.question = detail::required<std::string>(j, "question");
  e.references = detail::required<std::vector<std::string>>(j, "references");
  e.caption = detail::optional_field<std::string>(j, "caption");
  e.dataset = detail::optional_field<std::string>(j, "dataset");
  e.validate();
}

inline void to_json(json& j, const Candidate& c) {
  j = json{{"example_id", c.example_id}, {"model", c.model}, {"answer", c.answer}};
}

inline void from_json(const json& j, Candidate& c) {
  c.example_id = detail::required<std::string>(j, "example_id");
  c.model = detail::required<std::string>(j, "model");
  c.answer = detail::required<std::string>(j, "answer");
}

inline void to_json(json& j, const HumanJudgmentRaw& h) {
  j = json{{"example_id", h.example_id}, {"annotator_id", h.annotator_id}, {"correct", h.correct}};
}

inline void from_json(const json& j, HumanJudgmentRaw& h) {
  h.example_id = detail::required<std::string>(j, "example_id");
  h.annotator_id = detail::required<std::string>(j, "annotator_id");
  h.correct = detail::required<bool>(j, "correct");
}

inline void to_json(json& j, const HumanScore& h) {
  j = json{{"example_id", h.example_id()}, {"score", h.score()}, {"n_raters", h.n_raters()}};
}

inline void to_json(json& j, const MetricScore& m) {
  j = json{{"example_id", m.example_id}, {"metric", m.metric}, {"score", m.score}};
}

inline void from_json(const json& j, MetricScore& m) {
  m.example_id = detail::required<std::string>(j, "example_id");
  m.metric = detail::required<std::string>(j, "metric");
  m.score = detail::required<double>(j, "score");
  m.validate();
}

inline void to_json(json& j, const LaveResult& r) {
  j = json{{"example_id", r.example_id},
           {"rationale", r.rationale},
           {"raw_completion", r.raw_completion},
           {"prompt_hash", r.prompt_hash},
           {"backend", r.backend}};
  j["rating"] = r.rating ? json(*r.rating) : json(nullptr);
  j["score"] = r.score ? json(*r.score) : json(nullptr);
  j["error"] = r.error ? json(*r.error) : json(nullptr);
}

inline void from_json(const json& j, LaveResult& r) {
  r.example_id = detail::required<std::string>(j, "example_id");
  r.rating = detail::optional_field<int>(j, "rating");
  r.score = detail::optional_field<double>(j, "score");
  r.rationale = detail::optional_field<std::string>(j, "rationale").value_or("");
  r.raw_completion = detail::optional_field<std::string>(j, "raw_completion").value_or("");
  r.prompt_hash = detail::optional_field<std::string>(j, "prompt_hash").value_or("");
  r.backend = detail::optional_field<std::string>(j, "backend").value_or("");
  r.error = detail::optional_field<std::string>(j, "error");
  r.validate();
}

inline void to_json(json& j, const CategoryLabel& l) {
  j = json{{"example_id", l.example_id}, {"category", l.category}};
}

inline void from_json(const json& j, CategoryLabel& l) {
  l.example_id = detail::required<std::string>(j, "example_id");
  l.category = detail::required<std::string>(j, "category");
}

}  // namespace lave

// HumanScore has no default constructor, so it gets an adl_serializer.
template <>
struct nlohmann::adl_serializer<lave::HumanScore> {
  static lave::HumanScore from_json(const json& j) {
    return lave::HumanScore(lave::detail::required<std::string>(j, "example_id"),
                            lave::detail::required<double>(j, "score"),
                            lave::detail::required<int>(j, "n_raters"));
  }
  static void to_json(json& j, const lave::HumanScore& h) { lave::to_json(j, h); }
};
