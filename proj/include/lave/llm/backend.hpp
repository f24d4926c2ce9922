#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/digest.hpp"

namespace lave::llm {

/// Greedy decoding (temperature 0) is the default and what metric runs use.
struct CompletionRequest {
  std::string prompt;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 256;
  std::optional<std::vector<std::string>> stop;

  /// Decoding parameters in a canonical form (sorted keys), for cache keys.
  nlohmann::json params() const {
    nlohmann::json p{{"temperature", temperature}, {"max_tokens", max_tokens}};
    p["stop"] = stop ? nlohmann::json(*stop) : nlohmann::json(nullptr);
    return p;
  }
};

/// A completion source. Implementations must be safe to call from several
/// threads at once.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
  /// Short provenance label recorded with every result.
  virtual std::string tag() const = 0;
};

/// Digest identifying a prompt; also the replay fixture key.
inline std::string prompt_hash(const std::string& prompt) { return sha256_hex(prompt); }

}  // namespace lave::llm
