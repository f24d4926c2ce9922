#pragma once

// Rank correlations. Spearman is Pearson on average ranks; Kendall is tau-b
// computed with Knight's O(n log n) merge-sort count, all pair counts kept in
// 64-bit integers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lave/error.hpp"

namespace lave::stats {

enum class CorrelationMethod { spearman, kendall };

inline const char* to_string(CorrelationMethod m) {
  return m == CorrelationMethod::spearman ? "spearman" : "kendall";
}

inline CorrelationMethod parse_method(std::string_view s) {
  if (s == "spearman") return CorrelationMethod::spearman;
  if (s == "kendall") return CorrelationMethod::kendall;
  throw Error("unknown correlation method '" + std::string(s) + "' (expected spearman or kendall)");
}

struct CorrelationResult {
  CorrelationMethod method;
  double coefficient;
  std::size_t n;
};

/// 1-based ranks; tied values share the mean of the positions they occupy.
inline std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline void check_inputs(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw StatsError("correlation inputs differ in length");
  if (x.size() < 2) throw UndefinedCorrelation("correlation needs at least two observations");
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) throw StatsError("correlation inputs must be finite");
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw UndefinedCorrelation("correlation is undefined for a constant vector");
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

// Sum of t(t-1)/2 over runs of equal values in a sorted sequence.
template <typename Eq>
std::int64_t tied_pairs(std::size_t n, Eq eq) {
  std::int64_t total = 0, run = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    if (i < n && eq(i - 1, i)) {
      ++run;
    } else {
      total += run * (run - 1) / 2;
      run = 1;
    }
  }
  return total;
}

// Sorts `v` ascending and returns the number of inversions removed.
inline std::int64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
  std::size_t i = lo, j = mid, k = lo;
  while (i < mid && j < hi) {
    if (v[j] < v[i]) {
      swaps += static_cast<std::int64_t>(mid - i);
      buf[k++] = v[j++];
    } else {
      buf[k++] = v[i++];
    }
  }
  while (i < mid) buf[k++] = v[i++];
  while (j < hi) buf[k++] = v[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            v.begin() + static_cast<std::ptrdiff_t>(lo));
  return swaps;
}

}  // namespace detail

inline CorrelationResult spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_inputs(x, y);
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return {CorrelationMethod::spearman, detail::pearson(rx, ry), x.size()};
}

/// Kendall tau-b: (concordant - discordant) / sqrt((n0 - n1)(n0 - n2)),
/// where n1 and n2 count pairs tied in x and in y.
inline CorrelationResult kendall(std::span<const double> x, std::span<const double> y) {
  detail::check_inputs(x, y);
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  const std::int64_t n0 = static_cast<std::int64_t>(n) * static_cast<std::int64_t>(n - 1) / 2;
  const std::int64_t n1 = detail::tied_pairs(n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]]; });
  const std::int64_t n3 = detail::tied_pairs(
      n, [&](std::size_t i, std::size_t j) { return x[order[i]] == x[order[j]] && y[order[i]] == y[order[j]]; });

  std::vector<double> ys(n), buf(n);
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  const std::int64_t swaps = detail::merge_count(ys, buf, 0, n);
  const std::int64_t n2 = detail::tied_pairs(n, [&](std::size_t i, std::size_t j) { return ys[i] == ys[j]; });

  const std::int64_t diff = n0 - n1 - n2 + n3 - 2 * swaps;  // concordant - discordant
  const double denom = std::sqrt(static_cast<double>(n0 - n1)) * std::sqrt(static_cast<double>(n0 - n2));
  return {CorrelationMethod::kendall, std::clamp(static_cast<double>(diff) / denom, -1.0, 1.0), n};
}

inline CorrelationResult correlate(CorrelationMethod m, std::span<const double> x, std::span<const double> y) {
  return m == CorrelationMethod::spearman ? spearman(x, y) : kendall(x, y);
}

}  // namespace lave::stats
