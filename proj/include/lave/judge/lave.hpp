#pragma once

#include <string>

#include "lave/error.hpp"
#include "lave/judge/prompt.hpp"
#include "lave/judge/rating.hpp"
#include "lave/llm/backend.hpp"
#include "lave/types.hpp"

namespace lave::judge {

/// Model name and decoding settings sent with every judge request.
struct JudgeRequestSettings {
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.0;
  int max_tokens = 256;
};

/// Routes to the general or binary demonstrations, builds the prompt, asks
/// the backend, and maps the rating onto [0, 1]. An unparseable completion
/// is retried once with the same request; a second failure is reported in
/// LaveResult::error rather than scored. Backend failures propagate.
inline LaveResult lave_score(const VqaExample& example, const Candidate& candidate, llm::Backend& backend,
                             const PromptOptions& options, const JudgeAssets& assets,
                             const JudgeRequestSettings& settings = {}) {
  const auto prompt = build_prompt(example, candidate, assets.for_kind(route(example)), options, assets.templates);

  llm::CompletionRequest request;
  request.prompt = prompt;
  request.model = settings.model;
  request.temperature = settings.temperature;
  request.max_tokens = settings.max_tokens;

  LaveResult result;
  result.example_id = candidate.example_id;
  result.prompt_hash = llm::prompt_hash(prompt);
  result.backend = backend.tag();

  for (int attempt = 0; attempt < 2; ++attempt) {
    result.raw_completion = backend.complete(request);
    try {
      auto parsed = parse_rating(result.raw_completion);
      result.rating = parsed.rating;
      result.score = rating_to_score(parsed.rating);
      result.rationale = std::move(parsed.rationale);
      return result;
    } catch (const ParseError&) {
    }
  }
  result.error = "parse: no rating in {1,2,3} found in completion";
  return result;
}

}  // namespace lave::judge
