#pragma once

// Unigram METEOR over short answers.
//
// Alignment runs in stages over the tokens still unaligned: exact surface
// match, then Porter stems, then an optional synonym lexicon. Within a stage
// each candidate token (left to right) takes the reference token that extends
// the current chunk when possible, else the leftmost available one.
//
//   P = m / |c|, R = m / |r|
//   Fmean = P R / (alpha P + (1 - alpha) R)
//   penalty = gamma (chunks / m)^beta
//   score = Fmean (1 - penalty)
//
// With several references the best score wins.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "lave/error.hpp"
#include "lave/metrics/porter_stemmer.hpp"
#include "lave/normalize.hpp"

namespace lave::metrics {

enum class MeteorStage { exact, stem, synonym };

/// Word -> synset ids. Two words match in the synonym stage when they share
/// a synset.
class SynonymLexicon {
 public:
  void add_synset(const std::vector<std::string>& words) {
    const int id = next_id_++;
    for (const auto& w : words) sets_[w].push_back(id);
  }

  bool synonyms(const std::string& a, const std::string& b) const {
    auto ia = sets_.find(a), ib = sets_.find(b);
    if (ia == sets_.end() || ib == sets_.end()) return false;
    for (int x : ia->second)
      if (std::find(ib->second.begin(), ib->second.end(), x) != ib->second.end()) return true;
    return false;
  }

  std::size_t size() const { return sets_.size(); }

  /// One synset per line, words separated by commas or tabs; '#' starts a
  /// comment. Words are normalized like answers (articles kept).
  static SynonymLexicon from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open synonym lexicon " + path.string());
    NormalizationConfig cfg = NormalizationConfig::defaults();
    cfg.strip_articles = false;
    cfg.word_to_digit = false;
    SynonymLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      std::vector<std::string> words;
      std::string field;
      std::istringstream fields(line);
      while (std::getline(fields, field, line.find('\t') != std::string::npos ? '\t' : ',')) {
        auto w = normalize_answer(field, cfg);
        if (!w.empty() && w.find(' ') == std::string::npos) words.push_back(std::move(w));
      }
      if (words.size() >= 2) lex.add_synset(words);
    }
    return lex;
  }

 private:
  std::unordered_map<std::string, std::vector<int>> sets_;
  int next_id_ = 0;
};

struct MeteorParams {
  double alpha = 0.9;
  double beta = 3.0;
  double gamma = 0.5;
  std::vector<MeteorStage> stages{MeteorStage::exact, MeteorStage::stem};
  const SynonymLexicon* lexicon = nullptr;  // required when stages has synonym

  void validate() const {
    if (gamma < 0.0 || gamma > 1.0) throw Error("meteor gamma must lie in [0,1]");
    if (stages.empty() || stages.front() != MeteorStage::exact)
      throw Error("meteor stages must start with exact");
    if (std::find(stages.begin(), stages.end(), MeteorStage::synonym) != stages.end() && !lexicon)
      throw Error("meteor synonym stage needs a lexicon");
  }
};

/// Lowercased, punctuation-stripped whitespace tokens. Articles and number
/// words are left as written.
inline std::vector<std::string> meteor_tokens(std::string_view text) {
  static const NormalizationConfig cfg = [] {
    NormalizationConfig c = NormalizationConfig::defaults();
    c.strip_articles = false;
    c.word_to_digit = false;
    return c;
  }();
  std::vector<std::string> out;
  std::istringstream in(normalize_answer(text, cfg));
  for (std::string w; in >> w;) out.push_back(std::move(w));
  return out;
}

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

inline MeteorAlignment meteor_align(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                                    const MeteorParams& params) {
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> cand_to_ref(cand.size(), kNone);
  std::vector<bool> ref_used(ref.size(), false);

  std::vector<std::string> cand_stem, ref_stem;
  for (MeteorStage stage : params.stages) {
    if (stage == MeteorStage::stem && cand_stem.empty()) {
      for (const auto& w : cand) cand_stem.push_back(porter_stem(w));
      for (const auto& w : ref) ref_stem.push_back(porter_stem(w));
    }
    auto same = [&](std::size_t i, std::size_t j) {
      switch (stage) {
        case MeteorStage::exact:
          return cand[i] == ref[j];
        case MeteorStage::stem:
          return cand_stem[i] == ref_stem[j];
        case MeteorStage::synonym:
          return params.lexicon->synonyms(cand[i], ref[j]);
      }
      return false;
    };
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (cand_to_ref[i] != kNone) continue;
      std::size_t pick = kNone;
      if (i > 0 && cand_to_ref[i - 1] != kNone) {
        const std::size_t next = cand_to_ref[i - 1] + 1;
        if (next < ref.size() && !ref_used[next] && same(i, next)) pick = next;
      }
      for (std::size_t j = 0; pick == kNone && j < ref.size(); ++j)
        if (!ref_used[j] && same(i, j)) pick = j;
      if (pick != kNone) {
        cand_to_ref[i] = pick;
        ref_used[pick] = true;
      }
    }
  }

  MeteorAlignment a;
  std::size_t prev_ref = kNone;
  bool prev_matched = false;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    const std::size_t j = cand_to_ref[i];
    if (j == kNone) {
      prev_matched = false;
      continue;
    }
    ++a.matches;
    if (!prev_matched || j != prev_ref + 1) ++a.chunks;
    prev_ref = j;
    prev_matched = true;
  }
  return a;
}

inline double meteor_single(std::string_view candidate, std::string_view reference,
                            const MeteorParams& params = {}) {
  const auto cand = meteor_tokens(candidate);
  const auto ref = meteor_tokens(reference);
  if (cand.empty() || ref.empty()) return 0.0;
  const auto a = meteor_align(cand, ref, params);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(cand.size());
  const double r = m / static_cast<double>(ref.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double penalty = params.gamma * std::pow(static_cast<double>(a.chunks) / m, params.beta);
  return std::clamp(fmean * (1.0 - penalty), 0.0, 1.0);
}

inline double meteor(std::string_view candidate, std::span<const std::string> references,
                     const MeteorParams& params = {}) {
  params.validate();
  double best = 0.0;
  for (const auto& r : references) best = std::max(best, meteor_single(candidate, r, params));
  return best;
}

}  // namespace lave::metrics
