#pragma once

// JSON Lines I/O: one object per line, UTF-8, LF. Blank lines are skipped but
// still counted so diagnostics point at the real line number.

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lave/types.hpp"

namespace lave {

template <typename T>
struct Numbered {
  std::size_t line;
  T value;
};

template <typename T>
std::vector<Numbered<T>> parse_jsonl_numbered(std::istream& in) {
  std::vector<Numbered<T>> out;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (detail::is_blank(text)) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw DataError(std::string("malformed JSON: ") + e.what(), line);
    }
    if (!j.is_object()) throw DataError("expected a JSON object", line);
    try {
      out.push_back({line, j.get<T>()});
    } catch (const DataError& e) {
      throw DataError(e.what(), line);
    }
  }
  return out;
}

template <typename T>
std::vector<T> parse_jsonl(std::istream& in) {
  std::vector<T> out;
  for (auto& n : parse_jsonl_numbered<T>(in)) out.push_back(std::move(n.value));
  return out;
}

template <typename T>
std::vector<Numbered<T>> read_jsonl_numbered(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return parse_jsonl_numbered<T>(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

template <typename T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::vector<T> out;
  for (auto& n : read_jsonl_numbered<T>(path)) out.push_back(std::move(n.value));
  return out;
}

template <typename T>
void write_jsonl(std::ostream& out, const std::vector<T>& records) {
  for (const auto& r : records) out << json(r).dump() << '\n';
}

template <typename T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  write_jsonl(out, records);
  if (!out) throw DataError("write failed for " + path.string());
}

/// Index by id; duplicate ids are a data error.
inline std::unordered_map<std::string, const VqaExample*> index_examples(
    const std::vector<VqaExample>& examples) {
  std::unordered_map<std::string, const VqaExample*> index;
  for (const auto& e : examples)
    if (!index.emplace(e.id, &e).second) throw DataError("duplicate example id '" + e.id + "'");
  return index;
}

using ExamplePair = std::pair<VqaExample, Candidate>;

/// Pairs each candidate with its example, in candidate order. Every
/// unresolved example id is listed in the error.
inline std::vector<ExamplePair> join(const std::vector<Candidate>& candidates,
                                     const std::vector<VqaExample>& examples) {
  auto index = index_examples(examples);
  std::vector<ExamplePair> pairs;
  std::vector<std::string> missing;
  pairs.reserve(candidates.size());
  for (const auto& c : candidates) {
    auto it = index.find(c.example_id);
    if (it == index.end()) {
      missing.push_back(c.example_id);
      continue;
    }
    pairs.emplace_back(*it->second, c);
  }
  if (!missing.empty()) {
    std::ostringstream msg;
    msg << "unresolved example ids:";
    for (const auto& id : missing) msg << ' ' << id;
    throw DataError(msg.str());
  }
  return pairs;
}

}  // namespace lave
