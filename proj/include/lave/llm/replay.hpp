#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "lave/error.hpp"
#include "lave/jsonl.hpp"
#include "lave/llm/backend.hpp"

namespace lave::llm {

/// Frozen completion keyed by prompt_hash(prompt).
struct ReplayFixture {
  std::string key;
  std::string completion;
};

inline void from_json(const nlohmann::json& j, ReplayFixture& f) {
  f.key = lave::detail::required<std::string>(j, "key");
  f.completion = lave::detail::required<std::string>(j, "completion");
}

inline void to_json(nlohmann::json& j, const ReplayFixture& f) {
  j = nlohmann::json{{"key", f.key}, {"completion", f.completion}};
}

/// Serves fixture completions by prompt digest; never touches the network.
/// Model and decoding parameters are ignored.
class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(const std::vector<ReplayFixture>& fixtures) {
    for (const auto& f : fixtures) {
      auto [it, inserted] = table_.emplace(f.key, f.completion);
      if (!inserted && it->second != f.completion)
        throw DataError("conflicting replay fixtures for key " + f.key);
    }
  }

  static ReplayBackend from_file(const std::filesystem::path& path) {
    return ReplayBackend(read_jsonl<ReplayFixture>(path));
  }

  std::string complete(const CompletionRequest& request) override {
    const auto key = prompt_hash(request.prompt);
    auto it = table_.find(key);
    if (it == table_.end()) throw MissingFixture(key);
    return it->second;
  }

  std::string tag() const override { return "replay"; }

  std::size_t size() const { return table_.size(); }

 private:
  std::unordered_map<std::string, std::string> table_;
};

}  // namespace lave::llm
