#pragma once

// Embedding-similarity metrics (token-level greedy matching and sentence
// cosine) over a pluggable EmbeddingProvider.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"
#include "lave/http.hpp"
#include "lave/metrics/meteor.hpp"

namespace lave::metrics {

using Vector = std::vector<double>;

/// Every returned vector has unit L2 norm (within 1e-6) and length dim().
/// Implementations must be callable from several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  /// One vector per token, in token order.
  virtual std::vector<Vector> embed_tokens(std::string_view text) const = 0;
  virtual Vector embed_sentence(std::string_view text) const = 0;
  virtual std::size_t dim() const = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ProviderError("embedding dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline void normalize_in_place(Vector& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (!(n > 0.0) || !std::isfinite(n)) throw ProviderError("cannot normalize a zero or non-finite embedding");
  for (double& x : v) x /= n;
}

/// Deterministic test provider: vocabulary word i is the basis vector e_i.
/// A sentence is the normalized sum of its token vectors. Tokens outside the
/// vocabulary are a ProviderError.
class MockEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit MockEmbeddingProvider(const std::vector<std::string>& vocabulary) {
    for (const auto& w : vocabulary)
      if (!w.empty()) index_.emplace(w, index_.size());
    if (index_.empty()) throw ProviderError("mock embedding vocabulary is empty");
  }

  /// One word per line; blank lines ignored.
  static MockEmbeddingProvider from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProviderError("cannot open vocabulary " + path.string());
    std::vector<std::string> words;
    for (std::string line; std::getline(in, line);) {
      for (auto& tok : meteor_tokens(line)) words.push_back(std::move(tok));
    }
    return MockEmbeddingProvider(words);
  }

  std::vector<Vector> embed_tokens(std::string_view text) const override {
    std::vector<Vector> out;
    for (const auto& tok : meteor_tokens(text)) out.push_back(basis(tok));
    return out;
  }

  Vector embed_sentence(std::string_view text) const override {
    Vector v(dim(), 0.0);
    for (const auto& tok : meteor_tokens(text)) v[position(tok)] += 1.0;
    normalize_in_place(v);
    return v;
  }

  std::size_t dim() const override { return index_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> index_;

  std::size_t position(const std::string& tok) const {
    auto it = index_.find(tok);
    if (it == index_.end()) throw ProviderError("token '" + tok + "' is not in the mock vocabulary");
    return it->second;
  }

  Vector basis(const std::string& tok) const {
    Vector v(dim(), 0.0);
    v[position(tok)] = 1.0;
    return v;
  }
};

/// Client for an embedding service:
///   POST {base}/embed {"texts": [...], "mode": "tokens"|"sentence"}
///     -> {"vectors": [...]}
/// In "tokens" mode one text is sent per request and "vectors" holds that
/// text's token vectors. In "sentence" mode "vectors" holds one vector per
/// text. Returned vectors are re-normalized.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  explicit HttpEmbeddingProvider(const std::string& base_url, int timeout_seconds = 30)
      : url_(BaseUrl::parse(base_url)), timeout_(timeout_seconds) {}

  std::vector<Vector> embed_tokens(std::string_view text) const override {
    return post({std::string(text)}, "tokens");
  }

  Vector embed_sentence(std::string_view text) const override {
    auto vs = post({std::string(text)}, "sentence");
    if (vs.size() != 1) throw ProviderError("embedding service returned the wrong number of vectors");
    return std::move(vs.front());
  }

  /// Asks the service once for its dimension.
  std::size_t dim() const override {
    std::call_once(dim_once_, [this] { dim_ = embed_sentence("dimension probe").size(); });
    return dim_;
  }

 private:
  BaseUrl url_;
  int timeout_;
  mutable std::once_flag dim_once_;
  mutable std::size_t dim_ = 0;

  std::vector<Vector> post(const std::vector<std::string>& texts, const char* mode) const {
    nlohmann::json body{{"texts", texts}, {"mode", mode}};
    auto client = url_.client(timeout_);
    auto res = client->Post(url_.prefix + "/embed", body.dump(), "application/json");
    if (!res) throw ProviderError("embedding service unreachable: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProviderError("embedding service returned HTTP " + std::to_string(res->status));
    std::vector<Vector> out;
    try {
      out = nlohmann::json::parse(res->body).at("vectors").get<std::vector<Vector>>();
    } catch (const nlohmann::json::exception& e) {
      throw ProviderError(std::string("bad embedding response: ") + e.what());
    }
    for (auto& v : out) normalize_in_place(v);
    return out;
  }
};

/// Greedy token matching: recall averages, over reference tokens, the best
/// cosine against any candidate token; precision is the mirror image.
/// Negative cosines count as 0. F1 of the two, best over references.
inline double token_embed_score(std::string_view candidate, std::span<const std::string> references,
                                const EmbeddingProvider& provider) {
  const auto cand = provider.embed_tokens(candidate);
  double best = 0.0;
  for (const auto& r : references) {
    const auto ref = provider.embed_tokens(r);
    if (cand.empty() || ref.empty()) continue;
    std::vector<double> cand_best(cand.size(), 0.0), ref_best(ref.size(), 0.0);
    for (std::size_t i = 0; i < cand.size(); ++i)
      for (std::size_t j = 0; j < ref.size(); ++j) {
        const double c = std::max(0.0, dot(cand[i], ref[j]));
        cand_best[i] = std::max(cand_best[i], c);
        ref_best[j] = std::max(ref_best[j], c);
      }
    double p = 0.0, rec = 0.0;
    for (double x : cand_best) p += x;
    for (double x : ref_best) rec += x;
    p /= static_cast<double>(cand.size());
    rec /= static_cast<double>(ref.size());
    const double f1 = p + rec > 0.0 ? 2.0 * p * rec / (p + rec) : 0.0;
    best = std::max(best, std::clamp(f1, 0.0, 1.0));
  }
  return best;
}

/// Best sentence-embedding cosine over references, clamped to [0,1]. Blank
/// texts score 0 without reaching the provider.
inline double sent_embed_score(std::string_view candidate, std::span<const std::string> references,
                               const EmbeddingProvider& provider) {
  if (meteor_tokens(candidate).empty()) return 0.0;
  const auto c = provider.embed_sentence(candidate);
  double best = 0.0;
  for (const auto& r : references) {
    if (meteor_tokens(r).empty()) continue;
    best = std::max(best, std::clamp(dot(c, provider.embed_sentence(r)), 0.0, 1.0));
  }
  return best;
}

}  // namespace lave::metrics
