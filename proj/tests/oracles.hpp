#pragma once

// Brute-force reference implementations. Each one computes the same quantity
// as a library routine by a deliberately different (slow, obvious) route so
// the two can be compared on random inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

// Rank of x[i] = (# strictly smaller) + (# equal, including itself + 1) / 2.
inline std::vector<double> ranks_by_counting(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      if (v < x[i]) ++less;
      if (v == x[i]) ++equal;
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    sab += a[i] * b[i];
    saa += a[i] * a[i];
    sbb += b[i] * b[i];
  }
  return (n * sab - sa * sb) / std::sqrt((n * saa - sa * sa) * (n * sbb - sb * sb));
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  return pearson(ranks_by_counting(x), ranks_by_counting(y));
}

// 1 - 6 sum d^2 / (n (n^2 - 1)); valid only without ties.
inline double spearman_tie_free(const std::vector<double>& x, const std::vector<double>& y) {
  const auto rx = ranks_by_counting(x), ry = ranks_by_counting(y);
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(x.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

// Tau-b by enumerating all pairs.
inline double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  long long concordant = 0, discordant = 0, tie_x_only = 0, tie_y_only = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x_only;
      } else if (dy == 0) {
        ++tie_y_only;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  const double p = static_cast<double>(concordant + discordant);
  return static_cast<double>(concordant - discordant) /
         std::sqrt((p + static_cast<double>(tie_y_only)) * (p + static_cast<double>(tie_x_only)));
}

// Nominal alpha from pairable values: Do is the share of disagreeing ordered
// pairs within units (each unit weighted 1/(m-1)); De is the share of
// disagreeing ordered pairs among all pairable values.
inline double krippendorff_nominal(const std::vector<std::vector<int>>& units) {
  std::vector<int> all;
  double n = 0, within = 0;
  for (const auto& u : units) {
    if (u.size() < 2) continue;
    all.insert(all.end(), u.begin(), u.end());
    n += static_cast<double>(u.size());
    double d = 0;
    for (std::size_t i = 0; i < u.size(); ++i)
      for (std::size_t j = 0; j < u.size(); ++j)
        if (i != j && u[i] != u[j]) ++d;
    within += d / static_cast<double>(u.size() - 1);
  }
  double between = 0;
  for (std::size_t i = 0; i < all.size(); ++i)
    for (std::size_t j = 0; j < all.size(); ++j)
      if (i != j && all[i] != all[j]) ++between;
  if (within == 0) return 1.0;
  return 1.0 - (within / n) / (between / (n * (n - 1)));
}

// The quarter-of-the-maximum rule, applied literally on already-normalized keys.
inline std::vector<std::string> filter_rule(const std::vector<std::string>& keys) {
  std::map<std::string, int> freq;
  for (const auto& k : keys) ++freq[k];
  int max = 0;
  for (const auto& [_, f] : freq) max = std::max(max, f);
  std::vector<std::string> out;
  for (const auto& k : keys)
    if (!(freq[k] < 0.25 * max)) out.push_back(k);
  return out;
}

// Human aggregation by the 4-of-5 / 2-of-5 rule.
inline double human_rule(int correct_of_five) {
  if (correct_of_five >= 4) return 1.0;
  if (correct_of_five >= 2) return 0.5;
  return 0.0;
}

inline double vqa_acc(const std::string& cand, const std::vector<std::string>& refs) {
  int m = 0;
  for (const auto& r : refs) m += r == cand;
  return std::min(m / 3.0, 1.0);
}

// Mean over every 9-of-10 (generally (n-1)-of-n) subset, built explicitly.
inline double vqa_acc_loo(const std::string& cand, const std::vector<std::string>& refs) {
  double total = 0;
  for (std::size_t skip = 0; skip < refs.size(); ++skip) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < refs.size(); ++i)
      if (i != skip) sub.push_back(refs[i]);
    total += vqa_acc(cand, sub);
  }
  return total / static_cast<double>(refs.size());
}

// Plain recursive edit distance with memo table.
inline std::size_t levenshtein(const std::u32string& a, const std::u32string& b) {
  std::vector<std::vector<long>> memo(a.size() + 1, std::vector<long>(b.size() + 1, -1));
  auto go = [&](auto&& self, std::size_t i, std::size_t j) -> long {
    if (i == 0) return static_cast<long>(j);
    if (j == 0) return static_cast<long>(i);
    long& m = memo[i][j];
    if (m >= 0) return m;
    m = std::min({self(self, i - 1, j) + 1, self(self, i, j - 1) + 1,
                  self(self, i - 1, j - 1) + (a[i - 1] == b[j - 1] ? 0 : 1)});
    return m;
  };
  return static_cast<std::size_t>(go(go, a.size(), b.size()));
}

// Unigram-overlap F1 between token lists: a token counts as matched when it
// occurs anywhere in the other list.
inline double unigram_f1(const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
  if (cand.empty() || ref.empty()) return 0.0;
  const std::set<std::string> cs(cand.begin(), cand.end()), rs(ref.begin(), ref.end());
  double p = 0, r = 0;
  for (const auto& t : cand) p += rs.count(t);
  for (const auto& t : ref) r += cs.count(t);
  p /= static_cast<double>(cand.size());
  r /= static_cast<double>(ref.size());
  return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
}

// Cosine between token count vectors.
inline double count_cosine(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::map<std::string, double> ca, cb;
  for (const auto& t : a) ++ca[t];
  for (const auto& t : b) ++cb[t];
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : ca) {
    na += v * v;
    if (auto it = cb.find(t); it != cb.end()) dot += v * it->second;
  }
  for (const auto& [_, v] : cb) nb += v * v;
  return dot / std::sqrt(na * nb);
}

}  // namespace oracle
