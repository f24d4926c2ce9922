#pragma once

// Run configuration for the command-line tool.
//
// Every setting has one name, used as the long flag (--model), as the key in
// a config file (model = gpt-4) and, for a few, as an environment variable.
// Precedence, lowest to highest: built-in default, config file, flag, env.
//
// Config file format: one `key = value` per line; blank lines and lines
// starting with '#' are ignored. Boolean keys take true/false/1/0/yes/no.
// List-valued keys (scores, metrics, method) take comma-separated values.

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lave/error.hpp"
#include "lave/judge/prompt.hpp"
#include "lave/llm/http_backend.hpp"
#include "lave/metrics/vqa_accuracy.hpp"
#include "lave/report/correlation_table.hpp"
#include "lave/stats/correlation.hpp"
#include "lave/stats/human.hpp"

namespace lave::cli {

// Unusable configuration; the tool exits with status 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitConfig = 2;

inline const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"vqa_acc", "soft_acc", "meteor", "bertscore", "sbertscore"};
  return names;
}

struct BackendSettings {
  std::string kind = "http";  // http | replay
  std::string model = "gpt-3.5-turbo";
  std::string base_url = "https://api.openai.com/v1";
  llm::Protocol protocol = llm::Protocol::chat;
  std::string api_key_env = "LAVE_API_KEY";
  std::filesystem::path fixtures;
  int timeout_seconds = 60;
  int max_retries = 5;
  int max_tokens = 256;
};

struct RunConfig {
  std::filesystem::path examples;
  std::filesystem::path candidates;
  std::filesystem::path human_raw;
  std::filesystem::path human;
  std::filesystem::path lave;
  std::vector<std::filesystem::path> scores;
  std::filesystem::path labels;
  std::filesystem::path output;
  std::filesystem::path out_dir = "report";
  std::filesystem::path data_dir = judge::default_data_dir();

  BackendSettings backend;
  judge::PromptOptions prompt;
  std::filesystem::path cache_dir;  // empty: no completion cache
  int concurrency = 4;
  bool errors_as_zero = false;

  std::vector<std::string> metrics{"vqa_acc"};
  metrics::AccuracyMode acc_mode = metrics::AccuracyMode::plain;
  std::string embed_url;
  std::filesystem::path embed_vocab;
  std::filesystem::path synonyms;
  bool strict = false;

  stats::RaterPolicy raters;

  std::vector<stats::CorrelationMethod> methods{stats::CorrelationMethod::spearman};
  bool split_binary = false;
  report::OverallMode overall = report::OverallMode::pooled;
  int bootstrap = 5000;
  std::optional<std::uint64_t> seed;
};

/// Commands a setting applies to, for help text.
enum Command : unsigned {
  kRate = 1u << 0,
  kMetrics = 1u << 1,
  kAggregate = 1u << 2,
  kAgreement = 1u << 3,
  kReport = 1u << 4,
  kCache = 1u << 5,
};

struct SettingInfo {
  std::string_view key;
  std::string_view help;
  bool is_flag;
  unsigned commands;
  std::string_view env;  // empty when not overridable from the environment
};

inline const std::vector<SettingInfo>& settings() {
  static const std::vector<SettingInfo> table{
      {"examples", "examples JSONL (id, question, references[, caption, dataset])", false, kRate | kMetrics | kReport, ""},
      {"candidates", "candidate answers JSONL (example_id, model, answer)", false, kRate | kMetrics | kReport, ""},
      {"human-raw", "raw human judgments JSONL (example_id, annotator_id, correct)", false, kAggregate | kAgreement, ""},
      {"human", "aggregated human scores JSONL", false, kReport, ""},
      {"lave", "LAVE results JSONL, reported as metric 'lave'", false, kReport, ""},
      {"scores", "metric scores JSONL; repeat or comma-separate for several files", false, kReport, ""},
      {"labels", "failure category labels JSONL (example_id, category)", false, kReport, ""},
      {"output", "output file", false, kRate | kMetrics | kAggregate | kAgreement, ""},
      {"out-dir", "directory for report artifacts", false, kReport, ""},
      {"data-dir", "directory holding demonstrations and prompt templates", false, kRate, "LAVE_DATA_DIR"},
      {"backend", "completion backend: http or replay", false, kRate, "LAVE_BACKEND"},
      {"model", "model name sent to the backend", false, kRate, "LAVE_MODEL"},
      {"base-url", "OpenAI-compatible API base URL", false, kRate, "LAVE_BASE_URL"},
      {"protocol", "HTTP API flavour: chat or completion", false, kRate, ""},
      {"api-key-env", "environment variable holding the API key", false, kRate, ""},
      {"fixtures", "replay fixtures JSONL (key, completion) for --backend replay", false, kRate, ""},
      {"timeout", "HTTP timeout in seconds", false, kRate, ""},
      {"max-retries", "retries on HTTP 429/5xx/transport errors", false, kRate, ""},
      {"max-tokens", "completion token limit", false, kRate, ""},
      {"cache-dir", "completion cache directory (unset: no cache)", false, kRate | kCache, "LAVE_CACHE_DIR"},
      {"concurrency", "maximum judge requests in flight", false, kRate, "LAVE_CONCURRENCY"},
      {"n-shot", "number of demonstrations per prompt (0-8)", false, kRate, ""},
      {"no-rationale", "ask for the rating without a rationale", true, kRate, ""},
      {"no-filter", "keep rare reference answers", true, kRate, ""},
      {"caption", "include image descriptions in the prompt", true, kRate, ""},
      {"binary-warning", "append the yes/no caution to every prompt", true, kRate, ""},
      {"errors-as-zero", "score items without a rating as 0", true, kRate, ""},
      {"metrics", "comma-separated metrics: vqa_acc, soft_acc, meteor, bertscore, sbertscore", false, kMetrics, ""},
      {"acc-mode", "VQA accuracy variant: plain or loo", false, kMetrics, ""},
      {"embed-url", "embedding service base URL", false, kMetrics, ""},
      {"embed-vocab", "vocabulary file for the offline mock embedding provider", false, kMetrics, ""},
      {"synonyms", "synonym sets for METEOR (one set per line, comma-separated)", false, kMetrics, ""},
      {"strict", "fail instead of skipping metrics whose provider is unavailable", true, kMetrics, ""},
      {"raters", "ratings expected per item", false, kAggregate | kAgreement, ""},
      {"lenient", "accept items with any rater count; thresholds scale with it", true, kAggregate | kAgreement, ""},
      {"method", "correlation methods: spearman, kendall (comma-separated)", false, kReport, ""},
      {"split", "question split: none or binary", false, kReport, ""},
      {"overall", "overall column: pooled or mean", false, kReport, ""},
      {"bootstrap", "bootstrap resamples for significance (0 disables)", false, kReport, ""},
      {"seed", "bootstrap seed (generated and printed when absent)", false, kReport, "LAVE_SEED"},
  };
  return table;
}

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const auto item = trim(s.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename Int>
Int parse_int(std::string_view key, std::string_view v, Int lo) {
  Int out{};
  const auto s = trim(v);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || out < lo)
    throw ConfigError("invalid value '" + std::string(v) + "' for " + std::string(key));
  return out;
}

inline bool parse_bool(std::string_view key, std::string_view v) {
  const auto s = trim(v);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace detail

/// Applies one setting. Unknown keys and malformed values are ConfigErrors.
inline void apply_setting(RunConfig& c, std::string_view key, std::string_view value) {
  using namespace detail;
  const std::string v = trim(value);
  auto is = [&](std::string_view k) { return key == k; };

  if (is("examples")) c.examples = v;
  else if (is("candidates")) c.candidates = v;
  else if (is("human-raw")) c.human_raw = v;
  else if (is("human")) c.human = v;
  else if (is("lave")) c.lave = v;
  else if (is("scores")) {
    c.scores.clear();
    for (auto& s : split_list(v)) c.scores.emplace_back(s);
  }
  else if (is("labels")) c.labels = v;
  else if (is("output")) c.output = v;
  else if (is("out-dir")) c.out_dir = v;
  else if (is("data-dir")) c.data_dir = v;
  else if (is("backend")) {
    if (v != "http" && v != "replay") throw ConfigError("unknown backend '" + v + "' (expected http or replay)");
    c.backend.kind = v;
  }
  else if (is("model")) c.backend.model = v;
  else if (is("base-url")) c.backend.base_url = v;
  else if (is("protocol")) {
    if (v == "chat") c.backend.protocol = llm::Protocol::chat;
    else if (v == "completion") c.backend.protocol = llm::Protocol::completion;
    else throw ConfigError("unknown protocol '" + v + "' (expected chat or completion)");
  }
  else if (is("api-key-env")) c.backend.api_key_env = v;
  else if (is("fixtures")) c.backend.fixtures = v;
  else if (is("timeout")) c.backend.timeout_seconds = parse_int<int>(key, v, 1);
  else if (is("max-retries")) c.backend.max_retries = parse_int<int>(key, v, 0);
  else if (is("max-tokens")) c.backend.max_tokens = parse_int<int>(key, v, 1);
  else if (is("cache-dir")) c.cache_dir = v;
  else if (is("concurrency")) c.concurrency = parse_int<int>(key, v, 1);
  else if (is("n-shot")) c.prompt.n_shot = parse_int<int>(key, v, 0);
  else if (is("no-rationale")) c.prompt.rationale = !parse_bool(key, v);
  else if (is("no-filter")) c.prompt.filter_references = !parse_bool(key, v);
  else if (is("caption")) c.prompt.include_caption = parse_bool(key, v);
  else if (is("binary-warning")) c.prompt.binary_warning = parse_bool(key, v);
  else if (is("errors-as-zero")) c.errors_as_zero = parse_bool(key, v);
  else if (is("metrics")) {
    c.metrics = split_list(v);
    for (const auto& m : c.metrics)
      if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end()) {
        std::string valid;
        for (const auto& k : known_metrics()) valid += (valid.empty() ? "" : ", ") + k;
        throw ConfigError("unknown metric '" + m + "'; valid metrics: " + valid);
      }
    if (c.metrics.empty()) throw ConfigError("no metrics requested");
  }
  else if (is("acc-mode")) {
    if (v == "plain") c.acc_mode = metrics::AccuracyMode::plain;
    else if (v == "loo") c.acc_mode = metrics::AccuracyMode::loo;
    else throw ConfigError("unknown accuracy mode '" + v + "' (expected plain or loo)");
  }
  else if (is("embed-url")) c.embed_url = v;
  else if (is("embed-vocab")) c.embed_vocab = v;
  else if (is("synonyms")) c.synonyms = v;
  else if (is("strict")) c.strict = parse_bool(key, v);
  else if (is("raters")) c.raters.raters = parse_int<int>(key, v, 1);
  else if (is("lenient")) c.raters.strict = !parse_bool(key, v);
  else if (is("method")) {
    c.methods.clear();
    try {
      for (const auto& m : split_list(v)) c.methods.push_back(stats::parse_method(m));
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    if (c.methods.empty()) throw ConfigError("no correlation method given");
  }
  else if (is("split")) {
    if (v != "none" && v != "binary") throw ConfigError("unknown split '" + v + "' (expected none or binary)");
    c.split_binary = v == "binary";
  }
  else if (is("overall")) {
    try {
      c.overall = report::parse_overall_mode(v);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
  }
  else if (is("bootstrap")) c.bootstrap = parse_int<int>(key, v, 0);
  else if (is("seed")) c.seed = parse_int<std::uint64_t>(key, v, 0);
  else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

/// Reads `key = value` pairs; see the format note at the top of this file.
inline std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path.string() + ":" + std::to_string(n) + ": expected 'key = value'");
    out.emplace_back(detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
  }
  return out;
}

/// Environment overrides, read last.
inline void apply_environment(RunConfig& c, unsigned command) {
  for (const auto& s : settings()) {
    if (s.env.empty() || !(s.commands & command)) continue;
    if (const char* v = std::getenv(std::string(s.env).c_str()); v && *v) apply_setting(c, s.key, v);
  }
}

}  // namespace lave::cli
