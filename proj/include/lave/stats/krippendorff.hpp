#pragma once

// Krippendorff's alpha for nominal data, coincidence-matrix form:
//
//   o_ck = sum over units u of (#ordered (c,k) pairs in u) / (m_u - 1)
//   n_c  = sum_k o_ck,  n = sum_c n_c
//   Do   = sum_{c != k} o_ck / n
//   De   = sum_{c != k} n_c n_k / (n (n - 1))
//   alpha = 1 - Do / De
//
// Units with fewer than two values are not pairable and are skipped.

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "lave/error.hpp"

namespace lave::stats {

template <typename Label>
double krippendorff_alpha(std::span<const std::vector<Label>> units) {
  std::map<Label, std::map<Label, double>> o;
  std::size_t pairable = 0;
  for (const auto& u : units) {
    const std::size_t m = u.size();
    if (m < 2) continue;
    ++pairable;
    std::map<Label, double> counts;
    for (const auto& v : u) counts[v] += 1.0;
    const double w = 1.0 / static_cast<double>(m - 1);
    for (const auto& [c, nc] : counts)
      for (const auto& [k, nk] : counts) o[c][k] += w * (c == k ? nc * (nc - 1.0) : nc * nk);
  }
  if (pairable < 2) throw StatsError("krippendorff's alpha needs at least two units with two or more ratings");

  std::map<Label, double> marginal;
  double n = 0.0, disagree = 0.0;
  for (const auto& [c, row] : o)
    for (const auto& [k, v] : row) {
      marginal[c] += v;
      n += v;
      if (!(c == k)) disagree += v;
    }
  if (disagree == 0.0) return 1.0;

  double expected = 0.0;
  for (const auto& [c, nc] : marginal)
    for (const auto& [k, nk] : marginal)
      if (!(c == k)) expected += nc * nk;
  const double d_o = disagree / n;
  const double d_e = expected / (n * (n - 1.0));
  return 1.0 - d_o / d_e;
}

template <typename Label>
double krippendorff_alpha(const std::vector<std::vector<Label>>& units) {
  return krippendorff_alpha<Label>(std::span<const std::vector<Label>>(units));
}

}  // namespace lave::stats
