#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "lave/error.hpp"

namespace lave::judge {

struct ParsedRating {
  int rating;
  std::string rationale;
};

namespace detail {

inline bool is_trailing_noise(char c) {
  return std::isspace(static_cast<unsigned char>(c)) || c == '.' || c == '!' || c == '?' || c == ',' ||
         c == ';' || c == ':' || c == '"' || c == '\'' || c == ')' || c == ']' || c == '*';
}

inline std::string_view rtrim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool iends_with(std::string_view s, std::string_view suffix) {
  if (s.size() < suffix.size()) return false;
  for (std::size_t i = 0; i < suffix.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(s[s.size() - suffix.size() + i])) != suffix[i]) return false;
  return true;
}

// Drops a dangling "So rating=" / "rating:" lead-in from the rationale.
inline std::string clean_rationale(std::string_view head) {
  head = rtrim(head);
  for (std::string_view sep : {"=", ":"})
    if (iends_with(head, sep)) {
      head.remove_suffix(1);
      head = rtrim(head);
      break;
    }
  if (iends_with(head, "rating")) {
    head.remove_suffix(6);
    head = rtrim(head);
    if (iends_with(head, "so") &&
        (head.size() == 2 || std::isspace(static_cast<unsigned char>(head[head.size() - 3])))) {
      head.remove_suffix(2);
      head = rtrim(head);
    }
  }
  while (!head.empty() && std::isspace(static_cast<unsigned char>(head.front()))) head.remove_prefix(1);
  return std::string(head);
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace detail

/// Reads the rating off the end of a judge completion. Trailing whitespace
/// and sentence punctuation are ignored; a final 1, 2 or 3 is the rating.
/// Failing that, the number after the last "rating=" is used. Anything else
/// is a ParseError carrying the raw completion.
inline ParsedRating parse_rating(std::string_view completion) {
  std::string_view s = completion;
  while (!s.empty() && detail::is_trailing_noise(s.back())) s.remove_suffix(1);
  if (s.empty()) throw ParseError(std::string(completion));

  const char last = s.back();
  if (last >= '1' && last <= '3')
    return {last - '0', detail::clean_rationale(s.substr(0, s.size() - 1))};

  const std::string lower = detail::lowercase(s);
  const auto pos = lower.rfind("rating=");
  if (pos == std::string::npos) throw ParseError(std::string(completion));
  std::size_t i = pos + 7;
  while (i < s.size() && s[i] == ' ') ++i;
  std::size_t j = i;
  while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
  if (j - i != 1 || s[i] < '1' || s[i] > '3') throw ParseError(std::string(completion));
  return {s[i] - '0', detail::clean_rationale(s.substr(0, pos + 7))};
}

/// Linear map of the 1..3 scale onto [0, 1].
inline double rating_to_score(int rating) {
  if (rating < 1 || rating > 3) throw Error("rating must be 1, 2 or 3 (got " + std::to_string(rating) + ")");
  return (rating - 1) / 2.0;
}

}  // namespace lave::judge
