#pragma once

// Exact-match VQA accuracy and its edit-distance relaxation.
//
// Inputs are expected to be normalized already (normalize_answer); these
// functions compare bytes as given.

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lave/error.hpp"

namespace lave::metrics {

enum class AccuracyMode {
  plain,  // min(matches / 3, 1)
  loo,    // mean of plain accuracy over every leave-one-reference-out subset
};

namespace detail {

inline double plain_accuracy(std::size_t matches) {
  return std::min(static_cast<double>(matches) / 3.0, 1.0);
}

}  // namespace detail

/// With fewer than three references any exact match scores 1, since
/// min(1/3, 1) would cap single-reference datasets at a third.
///
/// `loo` only differs from `plain` when there are more than three references.
inline double vqa_accuracy(std::string_view candidate, std::span<const std::string> references,
                           AccuracyMode mode = AccuracyMode::plain) {
  const std::size_t n = references.size();
  const auto matches = static_cast<std::size_t>(
      std::count_if(references.begin(), references.end(), [&](const std::string& r) { return r == candidate; }));
  if (n < 3) return matches > 0 ? 1.0 : 0.0;
  if (mode == AccuracyMode::plain || n == 3) return detail::plain_accuracy(matches);

  // Leaving out a matching reference loses one match; a non-matching one loses none.
  double total = 0.0;
  for (const auto& r : references) total += detail::plain_accuracy(r == candidate ? matches - 1 : matches);
  return total / static_cast<double>(n);
}

/// Decodes UTF-8 into code points. Invalid bytes decode as themselves so the
/// function is total.
inline std::u32string utf8_code_points(std::string_view s) {
  std::u32string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xe ? 3 : (b >> 3) == 0x1e ? 4 : 0;
    bool ok = len > 0 && i + len <= s.size();
    char32_t cp = len == 1 ? b : len == 2 ? (b & 0x1f) : len == 3 ? (b & 0x0f) : (b & 0x07);
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cb = static_cast<unsigned char>(s[i + k]);
      if ((cb >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (cb & 0x3f);
    }
    if (!ok) {
      out.push_back(b);
      ++i;
    } else {
      out.push_back(cp);
      i += len;
    }
  }
  return out;
}

/// Levenshtein distance, two-row dynamic programme.
template <typename CharT>
std::size_t edit_distance(std::basic_string_view<CharT> a, std::basic_string_view<CharT> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Character (code point) edit distance / reference length. Unbounded above.
inline double char_error_rate(std::string_view candidate, std::string_view reference) {
  const auto ref = utf8_code_points(reference);
  if (ref.empty()) throw Error("character error rate is undefined for an empty reference");
  const auto cand = utf8_code_points(candidate);
  return static_cast<double>(edit_distance<char32_t>(cand, ref)) / static_cast<double>(ref.size());
}

/// sim_r = max(0, 1 - CER). Three or more references: min(sum sim / 3, 1);
/// otherwise the best single similarity.
inline double soft_vqa_accuracy(std::string_view candidate, std::span<const std::string> references) {
  double sum = 0.0, best = 0.0;
  for (const auto& r : references) {
    const double sim = std::max(0.0, 1.0 - char_error_rate(candidate, r));
    sum += sim;
    best = std::max(best, sim);
  }
  if (references.size() < 3) return best;
  return std::min(sum / 3.0, 1.0);
}

}  // namespace lave::metrics
