#pragma once

// Few-shot prompt assembly for the answer-rating judge.
//
// Layout (blank line between blocks):
//
//   <task description>[ Give the rationale before rating.][ <binary warning>]
//
//   Question: '<q>'
//   Reference answers: '<r1>', '<r2>', ...
//   Candidate answer: '<c>'
//   Output: <rationale ending in "So rating=N">
//
//   ... (first n_shot demonstrations)
//
//   [Image description: <caption>]
//   Question: '<q>'
//   Reference answers: ...
//   Candidate answer: '<c>'
//   Output:
//
// Answers are wrapped in single quotes verbatim (no escaping). Without the
// rationale directive, demonstration outputs shrink to "rating=N".

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"
#include "lave/jsonl.hpp"
#include "lave/normalize.hpp"
#include "lave/types.hpp"

#ifndef LAVE_DATA_DIR
#define LAVE_DATA_DIR "data"
#endif

namespace lave::judge {

inline constexpr std::string_view kRationaleDirective = "Give the rationale before rating.";
inline constexpr std::string_view kBinaryWarning =
    "THIS IS VERY IMPORTANT: A binary question should only be answered with 'yes' or 'no', otherwise the "
    "candidate answer is incorrect.";

inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("LAVE_DATA_DIR"); env && *env) return env;
  return LAVE_DATA_DIR;
}

enum class DemoKind { general, binary };

inline const char* to_string(DemoKind k) { return k == DemoKind::binary ? "binary" : "general"; }

struct Demonstration {
  std::string question;
  std::vector<std::string> references;
  std::string candidate;
  std::string rationale;  // full output text, ends with "So rating=<rating>"
  int rating = 0;
  std::optional<std::string> caption;

  void validate() const {
    if (rating < 1 || rating > 3) throw DataError("demonstration rating must be 1, 2 or 3");
    const std::string tail = "So rating=" + std::to_string(rating);
    if (rationale.size() < tail.size() || rationale.compare(rationale.size() - tail.size(), tail.size(), tail) != 0)
      throw DataError("demonstration rationale must end with '" + tail + "'");
    if (references.empty()) throw DataError("demonstration has no references");
  }
};

inline void from_json(const nlohmann::json& j, Demonstration& d) {
  d.question = lave::detail::required<std::string>(j, "question");
  d.references = lave::detail::required<std::vector<std::string>>(j, "references");
  d.candidate = lave::detail::required<std::string>(j, "candidate");
  d.rationale = lave::detail::required<std::string>(j, "rationale");
  d.rating = lave::detail::required<int>(j, "rating");
  d.caption = lave::detail::optional_field<std::string>(j, "caption");
  d.validate();
}

inline void to_json(nlohmann::json& j, const Demonstration& d) {
  j = nlohmann::json{{"question", d.question},
                     {"references", d.references},
                     {"candidate", d.candidate},
                     {"rationale", d.rationale},
                     {"rating", d.rating}};
  if (d.caption) j["caption"] = *d.caption;
}

struct DemoSet {
  DemoKind kind = DemoKind::general;
  std::vector<Demonstration> demos;

  static DemoSet load(const std::filesystem::path& path, DemoKind kind) {
    DemoSet s{kind, read_jsonl<Demonstration>(path)};
    if (s.demos.empty()) throw DataError("demonstration file " + path.string() + " is empty");
    return s;
  }
};

/// Task description text, plain and with image-description wording.
struct PromptTemplates {
  std::string task_description;
  std::string caption_task_description;

  static PromptTemplates load(const std::filesystem::path& dir) {
    auto slurp = [](const std::filesystem::path& p) {
      std::ifstream in(p, std::ios::binary);
      if (!in) throw DataError("cannot open template " + p.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      std::string s = ss.str();
      while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
      return s;
    };
    return {slurp(dir / "task_description.txt"), slurp(dir / "task_description_caption.txt")};
  }
};

/// Everything the judge reads from disk: both demonstration sets and the
/// task description templates.
struct JudgeAssets {
  DemoSet general;
  DemoSet binary;
  PromptTemplates templates;

  static JudgeAssets load(const std::filesystem::path& dir = default_data_dir()) {
    return {DemoSet::load(dir / "demos_general.jsonl", DemoKind::general),
            DemoSet::load(dir / "demos_binary.jsonl", DemoKind::binary), PromptTemplates::load(dir)};
  }

  const DemoSet& for_kind(DemoKind k) const { return k == DemoKind::binary ? binary : general; }
};

struct PromptOptions {
  int n_shot = 8;
  bool rationale = true;
  bool filter_references = true;
  bool include_caption = false;
  bool binary_warning = false;
  // Allow a demo set whose kind differs from the routed kind.
  bool override_routing = false;
};

/// Keeps every answer whose normalized form occurs at least a quarter as
/// often as the most frequent one. Input order and surface forms are kept.
inline std::vector<std::string> filter_references(std::span<const std::string> references) {
  std::vector<std::string> keys;
  keys.reserve(references.size());
  std::unordered_map<std::string, std::size_t> freq;
  std::size_t max_freq = 0;
  for (const auto& r : references) {
    keys.push_back(normalize_answer(r));
    max_freq = std::max(max_freq, ++freq[keys.back()]);
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < references.size(); ++i)
    if (4 * freq[keys[i]] >= max_freq) out.push_back(references[i]);
  return out;
}

/// At least half of the normalized references are "yes" or "no".
inline bool is_binary_question(std::span<const std::string> references) {
  if (references.empty()) return false;
  std::size_t yes_no = 0;
  for (const auto& r : references) {
    const auto n = normalize_answer(r);
    if (n == "yes" || n == "no") ++yes_no;
  }
  return 2 * yes_no >= references.size();
}

inline DemoKind route(const VqaExample& example) {
  return is_binary_question(example.references) ? DemoKind::binary : DemoKind::general;
}

namespace detail {

inline void render_answers(std::ostream& out, std::span<const std::string> answers) {
  for (std::size_t i = 0; i < answers.size(); ++i) out << (i ? ", '" : "'") << answers[i] << '\'';
}

inline void render_block(std::ostream& out, const std::optional<std::string>& caption, std::string_view question,
                         std::span<const std::string> references, std::string_view candidate) {
  if (caption) out << "Image description: " << *caption << '\n';
  out << "Question: '" << question << "'\n";
  out << "Reference answers: ";
  render_answers(out, references);
  out << "\nCandidate answer: '" << candidate << "'\nOutput:";
}

}  // namespace detail

/// One demonstration as it appears in the prompt (no trailing newline).
inline std::string render_demonstration(const Demonstration& d, bool rationale = true, bool with_caption = false) {
  std::ostringstream out;
  detail::render_block(out, with_caption ? d.caption : std::nullopt, d.question, d.references, d.candidate);
  out << ' ' << (rationale ? d.rationale : "rating=" + std::to_string(d.rating));
  return out.str();
}

inline std::string build_prompt(const VqaExample& example, const Candidate& candidate, const DemoSet& demo_set,
                                const PromptOptions& options, const PromptTemplates& templates) {
  if (options.n_shot < 0 || static_cast<std::size_t>(options.n_shot) > demo_set.demos.size())
    throw Error("n_shot must lie in [0, " + std::to_string(demo_set.demos.size()) + "]");
  if (!options.override_routing && demo_set.kind != route(example))
    throw Error(std::string("example '") + example.id + "' routes to the " + to_string(route(example)) +
                " demonstrations, got " + to_string(demo_set.kind));
  if (options.include_caption && !example.caption)
    throw Error("caption requested but example '" + example.id + "' has none");

  std::ostringstream out;
  out << (options.include_caption ? templates.caption_task_description : templates.task_description);
  if (options.rationale) out << ' ' << kRationaleDirective;
  if (options.binary_warning) out << ' ' << kBinaryWarning;
  out << "\n\n";

  for (int i = 0; i < options.n_shot; ++i)
    out << render_demonstration(demo_set.demos[static_cast<std::size_t>(i)], options.rationale,
                                options.include_caption)
        << "\n\n";

  const auto refs = options.filter_references ? filter_references(example.references) : example.references;
  detail::render_block(out, options.include_caption ? example.caption : std::nullopt, example.question, refs,
                       candidate.answer);
  return out.str();
}

}  // namespace lave::judge
