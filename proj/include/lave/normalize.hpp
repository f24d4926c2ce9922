#pragma once

// Answer canonicalization applied before string-matching metrics.
//
// Rules, in order:
//   1. ASCII letters are lowercased; other bytes pass through untouched.
//   2. Character pass over ASCII punctuation, judged on the original
//      neighbours of each character:
//        ','  kept when both neighbours are digits ("1,000"), else -> space
//        '.'  kept when both neighbours are digits ("2.5"), else deleted
//        '\'' kept for now (resolved per word in step 4)
//        any other punctuation -> space
//   3. Split on whitespace.
//   4. Per word: apostrophes are deleted; if the result is a contraction key
//      ("dont") the word becomes the mapped form ("don't").
//   5. Articles are dropped when strip_articles is set.
//   6. Number words zero..ten become digits when word_to_digit is set.
//   7. Words are joined with single spaces.
//
// The same tables are shipped in data/normalization_rules.json (version 1).

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "lave/error.hpp"

namespace lave {

inline constexpr int kNormalizationRulesVersion = 1;

struct NormalizationConfig {
  bool strip_articles = true;
  bool word_to_digit = true;
  std::set<std::string, std::less<>> articles;
  std::map<std::string, std::string, std::less<>> number_words;
  std::map<std::string, std::string, std::less<>> contraction_map;

  static const NormalizationConfig& defaults();

  /// Same tables as defaults(), loaded from a rules file.
  static NormalizationConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open normalization rules " + path.string());
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("bad normalization rules: " + std::string(e.what()));
    }
    if (j.value("version", 0) != kNormalizationRulesVersion)
      throw DataError("unsupported normalization rules version");
    NormalizationConfig cfg;
    for (const auto& a : j.at("articles")) cfg.articles.insert(a.get<std::string>());
    for (const auto& [k, v] : j.at("number_words").items()) cfg.number_words[k] = v.get<std::string>();
    for (const auto& [k, v] : j.at("contractions").items()) cfg.contraction_map[k] = v.get<std::string>();
    return cfg;
  }
};

namespace detail {

inline bool is_digit(char c) { return c >= '0' && c <= '9'; }

inline bool is_ascii_punct(char c) {
  return static_cast<unsigned char>(c) < 128 && std::ispunct(static_cast<unsigned char>(c));
}

inline bool is_ascii_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

}  // namespace detail

inline std::string normalize_answer(std::string_view text,
                                    const NormalizationConfig& cfg = NormalizationConfig::defaults()) {
  std::string s;
  s.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c >= 'A' && c <= 'Z') {
      s.push_back(static_cast<char>(c - 'A' + 'a'));
      continue;
    }
    if (!detail::is_ascii_punct(c) || c == '\'') {
      s.push_back(c);
      continue;
    }
    const bool between_digits =
        i > 0 && i + 1 < text.size() && detail::is_digit(text[i - 1]) && detail::is_digit(text[i + 1]);
    if (c == ',' || c == '.') {
      if (between_digits)
        s.push_back(c);
      else if (c == ',')
        s.push_back(' ');
    } else {
      s.push_back(' ');
    }
  }

  std::string out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && detail::is_ascii_space(s[pos])) ++pos;
    std::size_t end = pos;
    while (end < s.size() && !detail::is_ascii_space(s[end])) ++end;
    if (end == pos) break;

    std::string word;
    for (std::size_t k = pos; k < end; ++k)
      if (s[k] != '\'') word.push_back(s[k]);
    pos = end;

    if (word.empty()) continue;
    if (auto it = cfg.contraction_map.find(word); it != cfg.contraction_map.end()) word = it->second;
    if (cfg.strip_articles && cfg.articles.count(word)) continue;
    if (cfg.word_to_digit)
      if (auto it = cfg.number_words.find(word); it != cfg.number_words.end()) word = it->second;

    if (!out.empty()) out.push_back(' ');
    out += word;
  }
  return out;
}

inline const NormalizationConfig& NormalizationConfig::defaults() {
  static const NormalizationConfig cfg = [] {
    NormalizationConfig c;
    c.articles = {"a", "an", "the"};
    c.number_words = {{"zero", "0"}, {"one", "1"}, {"two", "2"},   {"three", "3"},
                      {"four", "4"}, {"five", "5"}, {"six", "6"},  {"seven", "7"},
                      {"eight", "8"}, {"nine", "9"}, {"ten", "10"}};
    c.contraction_map = {
        {"aint", "ain't"}, {"arent", "aren't"}, {"cant", "can't"}, {"couldnt", "couldn't"},
        {"couldntve", "couldn't've"}, {"couldve", "could've"}, {"didnt", "didn't"},
        {"doesnt", "doesn't"}, {"dont", "don't"}, {"hadnt", "hadn't"}, {"hadntve", "hadn't've"},
        {"hasnt", "hasn't"}, {"havent", "haven't"}, {"hed", "he'd"}, {"hedve", "he'd've"},
        {"hes", "he's"}, {"howd", "how'd"}, {"howll", "how'll"}, {"hows", "how's"},
        {"idve", "i'd've"}, {"im", "i'm"}, {"isnt", "isn't"}, {"itd", "it'd"}, {"itdve", "it'd've"},
        {"itll", "it'll"}, {"ive", "i've"}, {"lets", "let's"}, {"maam", "ma'am"},
        {"mightnt", "mightn't"}, {"mightntve", "mightn't've"}, {"mightve", "might've"},
        {"mustnt", "mustn't"}, {"mustve", "must've"}, {"neednt", "needn't"}, {"notve", "not've"},
        {"oclock", "o'clock"}, {"oughtnt", "oughtn't"}, {"shant", "shan't"},
        {"shedve", "she'd've"}, {"shes", "she's"}, {"shouldnt", "shouldn't"},
        {"shouldntve", "shouldn't've"}, {"shouldve", "should've"}, {"somebodyd", "somebody'd"},
        {"somebodydve", "somebody'd've"}, {"somebodyll", "somebody'll"},
        {"somebodys", "somebody's"}, {"someoned", "someone'd"}, {"someonedve", "someone'd've"},
        {"someonell", "someone'll"}, {"someones", "someone's"}, {"somethingd", "something'd"},
        {"somethingdve", "something'd've"}, {"somethingll", "something'll"},
        {"thats", "that's"}, {"thered", "there'd"}, {"theredve", "there'd've"},
        {"therere", "there're"}, {"theres", "there's"}, {"theyd", "they'd"},
        {"theydve", "they'd've"}, {"theyll", "they'll"}, {"theyre", "they're"},
        {"theyve", "they've"}, {"wasnt", "wasn't"}, {"wedve", "we'd've"}, {"werent", "weren't"},
        {"weve", "we've"}, {"whatll", "what'll"}, {"whatre", "what're"}, {"whats", "what's"},
        {"whatve", "what've"}, {"whens", "when's"}, {"whered", "where'd"}, {"wheres", "where's"},
        {"whereve", "where've"}, {"whod", "who'd"}, {"whodve", "who'd've"}, {"wholl", "who'll"},
        {"whos", "who's"}, {"whove", "who've"}, {"whyll", "why'll"}, {"whyre", "why're"},
        {"whys", "why's"}, {"wont", "won't"}, {"wouldnt", "wouldn't"},
        {"wouldntve", "wouldn't've"}, {"wouldve", "would've"}, {"yall", "y'all"},
        {"yalldve", "y'all'd've"}, {"yallll", "y'all'll"}, {"youd", "you'd"},
        {"youdve", "you'd've"}, {"youll", "you'll"}, {"youre", "you're"}, {"youve", "you've"}};
    return c;
  }();
  return cfg;
}

}  // namespace lave
