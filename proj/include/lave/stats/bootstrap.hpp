#pragma once

// Paired bootstrap comparison of two metrics' correlation with human scores.
//
// Resample i uses std::mt19937_64 seeded with splitmix64(seed + phi * (i + 1)),
// so every resample's stream depends only on (seed, i) and the result is the
// same for any thread count. Indices are drawn by rejection sampling rather
// than std::uniform_int_distribution, whose output is implementation-defined.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "lave/error.hpp"
#include "lave/stats/correlation.hpp"

namespace lave::stats {

struct SignificanceResult {
  double mean_diff = 0.0;
  double p_value = 1.0;
  bool significant = false;
  int resamples = 0;
  std::uint64_t seed = 0;
  int redraws = 0;  // degenerate draws replaced, summed over resamples
  double t = 0.0;

  bool operator==(const SignificanceResult&) const = default;
};

struct BootstrapOptions {
  int resamples = 5000;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  int max_redraws = 100;  // per resample
  unsigned threads = 0;   // 0: hardware concurrency
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::mt19937_64 resample_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(seed + 0x9E3779B97F4A7C15ull * (index + 1)));
}

/// Uniform integer in [0, n) without modulo bias.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do r = rng();
  while (r >= limit);
  return static_cast<std::size_t>(r % bound);
}

/// Two-sided one-sample t-test of `diffs` against zero, df = n - 1.
/// A zero-variance sample gives p = 1 when its mean is zero and p = 0 otherwise.
inline void t_test_against_zero(std::span<const double> diffs, SignificanceResult& out) {
  const std::size_t n = diffs.size();
  double mean = 0.0;
  for (double d : diffs) mean += d;
  mean /= static_cast<double>(n);
  out.mean_diff = mean;
  if (n < 2) {
    out.t = 0.0;
    out.p_value = 1.0;
    return;
  }
  double ss = 0.0;
  for (double d : diffs) ss += (d - mean) * (d - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (sd == 0.0) {
    out.t = mean == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), mean);
    out.p_value = mean == 0.0 ? 1.0 : 0.0;
    return;
  }
  out.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  out.p_value = std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::fabs(out.t))), 0.0, 1.0);
}

namespace detail {

inline bool is_constant(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
}

}  // namespace detail

/// Each resample draws n example indices with replacement and records
/// corr(a, human) - corr(b, human). A draw where any of the three vectors is
/// constant is redrawn, up to `max_redraws` times per resample.
inline SignificanceResult bootstrap_compare(std::span<const double> a, std::span<const double> b,
                                            std::span<const double> human, CorrelationMethod method,
                                            const BootstrapOptions& opt = {}) {
  const std::size_t n = human.size();
  if (a.size() != n || b.size() != n) throw StatsError("bootstrap inputs differ in length");
  if (n < 2) throw StatsError("bootstrap needs at least two examples");
  if (opt.resamples < 1) throw StatsError("bootstrap needs at least one resample");

  const auto resamples = static_cast<std::size_t>(opt.resamples);
  std::vector<double> diffs(resamples);
  std::vector<int> redraws(resamples, 0);

  auto run = [&](std::size_t i) {
    auto rng = resample_rng(opt.seed, i);
    std::vector<double> ra(n), rb(n), rh(n);
    for (int attempt = 0;; ++attempt) {
      for (std::size_t k = 0; k < n; ++k) {
        const std::size_t j = uniform_index(rng, n);
        ra[k] = a[j];
        rb[k] = b[j];
        rh[k] = human[j];
      }
      if (!detail::is_constant(ra) && !detail::is_constant(rb) && !detail::is_constant(rh)) break;
      if (attempt >= opt.max_redraws)
        throw StatsError("bootstrap resample " + std::to_string(i) + " still degenerate after " +
                         std::to_string(opt.max_redraws) + " redraws");
      ++redraws[i];
    }
    diffs[i] = correlate(method, ra, rh).coefficient - correlate(method, rb, rh).coefficient;
  };

  unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, resamples));
  if (threads <= 1) {
    for (std::size_t i = 0; i < resamples; ++i) run(i);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < resamples; i += threads) run(i);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SignificanceResult out;
  out.resamples = opt.resamples;
  out.seed = opt.seed;
  for (int r : redraws) out.redraws += r;
  t_test_against_zero(diffs, out);
  out.significant = out.p_value < opt.alpha;
  return out;
}

}  // namespace lave::stats
