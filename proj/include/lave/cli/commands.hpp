#pragma once

// Subcommand implementations. Each takes a resolved RunConfig, writes its
// artifacts, and returns the process exit status. Configuration and data
// problems are thrown (ConfigError, DataError) and mapped to status 2 by
// run_guarded.

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lave/cli/config.hpp"
#include "lave/error.hpp"
#include "lave/judge/lave.hpp"
#include "lave/judge/prompt.hpp"
#include "lave/jsonl.hpp"
#include "lave/llm/cache.hpp"
#include "lave/llm/http_backend.hpp"
#include "lave/llm/replay.hpp"
#include "lave/metrics/embedding.hpp"
#include "lave/metrics/meteor.hpp"
#include "lave/metrics/vqa_accuracy.hpp"
#include "lave/normalize.hpp"
#include "lave/report/category_means.hpp"
#include "lave/report/correlation_table.hpp"
#include "lave/report/failures.hpp"
#include "lave/report/render.hpp"
#include "lave/stats/human.hpp"
#include "lave/stats/krippendorff.hpp"

namespace lave::cli {

namespace detail {

inline void require(const std::filesystem::path& p, const char* flag) {
  if (p.empty()) throw ConfigError(std::string("--") + flag + " is required");
}

inline std::unique_ptr<llm::Backend> make_backend(const RunConfig& c) {
  if (c.backend.kind == "replay") {
    if (c.backend.fixtures.empty()) throw ConfigError("--backend replay needs --fixtures");
    return std::make_unique<llm::ReplayBackend>(llm::ReplayBackend::from_file(c.backend.fixtures));
  }
  llm::HttpBackendOptions o;
  o.base_url = c.backend.base_url;
  o.protocol = c.backend.protocol;
  o.max_retries = c.backend.max_retries;
  o.timeout_seconds = c.backend.timeout_seconds;
  o.api_key_env = c.backend.api_key_env;
  try {
    return std::make_unique<llm::HttpBackend>(o);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("unusable backend configuration: ") + e.what());
  }
}

}  // namespace detail

/// Scores every candidate with the LLM judge, fanning out up to
/// `concurrency` requests. Results keep candidate order.
inline int cmd_rate(const RunConfig& c, std::ostream& err) {
  detail::require(c.examples, "examples");
  detail::require(c.candidates, "candidates");
  detail::require(c.output, "output");

  const auto examples = read_jsonl<VqaExample>(c.examples);
  const auto candidates = read_jsonl<Candidate>(c.candidates);
  const auto pairs = join(candidates, examples);

  judge::JudgeAssets assets;
  try {
    assets = judge::JudgeAssets::load(c.data_dir);
  } catch (const Error& e) {
    throw ConfigError(std::string("cannot load judge assets: ") + e.what());
  }
  const auto shots = std::min(assets.general.demos.size(), assets.binary.demos.size());
  if (c.prompt.n_shot < 0 || static_cast<std::size_t>(c.prompt.n_shot) > shots)
    throw ConfigError("--n-shot must lie in [0, " + std::to_string(shots) + "]");
  if (c.prompt.include_caption)
    for (const auto& [e, _] : pairs)
      if (!e.caption) throw ConfigError("--caption given but example '" + e.id + "' has no caption");

  auto inner = detail::make_backend(c);
  std::unique_ptr<llm::CachedBackend> cached;
  llm::Backend* backend = inner.get();
  if (!c.cache_dir.empty()) {
    cached = std::make_unique<llm::CachedBackend>(*inner, c.cache_dir);
    backend = cached.get();
  }

  judge::JudgeRequestSettings settings;
  settings.model = c.backend.model;
  settings.max_tokens = c.backend.max_tokens;

  std::vector<LaveResult> results(pairs.size());
  std::atomic<std::size_t> next{0}, done{0}, parse_errors{0}, backend_errors{0};
  std::atomic<bool> stop{false};
  std::mutex err_mu;
  std::exception_ptr fatal;

  auto worker = [&] {
    for (std::size_t i; !stop && (i = next++) < pairs.size();) {
      const auto& [example, candidate] = pairs[i];
      try {
        results[i] = judge::lave_score(example, candidate, *backend, c.prompt, assets, settings);
        if (results[i].error) ++parse_errors;
      } catch (const AuthError&) {
        std::lock_guard lock(err_mu);
        if (!fatal) fatal = std::current_exception();
        stop = true;
        continue;
      } catch (const BackendError& e) {
        ++backend_errors;
        LaveResult r;
        r.example_id = candidate.example_id;
        r.backend = backend->tag();
        r.error = std::string("backend: ") + e.what();
        results[i] = std::move(r);
        std::lock_guard lock(err_mu);
        err << "error: " << candidate.example_id << ": " << e.what() << '\n';
      }
      const auto k = ++done;
      if (k % 50 == 0) {
        std::lock_guard lock(err_mu);
        err << "rated " << k << '/' << pairs.size() << '\n';
      }
    }
  };

  const auto n_threads = static_cast<std::size_t>(std::max(1, c.concurrency));
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(n_threads, pairs.size()); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (fatal) {
    try {
      std::rethrow_exception(fatal);
    } catch (const AuthError& e) {
      throw ConfigError(e.what());
    }
  }

  if (c.errors_as_zero)
    for (auto& r : results)
      if (r.error) r.score = 0.0;

  write_jsonl(c.output, results);
  err << "rated " << results.size() << " candidate(s): " << results.size() - parse_errors - backend_errors
      << " ok, " << parse_errors << " parse error(s), " << backend_errors << " backend error(s)";
  if (cached) err << "; cache " << cached->hits() << " hit(s), " << cached->misses() << " miss(es)";
  err << '\n';
  return backend_errors ? kExitPartial : kExitOk;
}

/// Baseline metric scores, one row per (candidate, metric).
inline int cmd_metrics(const RunConfig& c, std::ostream& err) {
  detail::require(c.examples, "examples");
  detail::require(c.candidates, "candidates");
  detail::require(c.output, "output");

  const auto examples = read_jsonl<VqaExample>(c.examples);
  const auto candidates = read_jsonl<Candidate>(c.candidates);
  const auto pairs = join(candidates, examples);

  std::unique_ptr<metrics::EmbeddingProvider> provider;
  std::string provider_problem = "no embedding provider configured (use --embed-url or --embed-vocab)";
  try {
    if (!c.embed_url.empty())
      provider = std::make_unique<metrics::HttpEmbeddingProvider>(c.embed_url);
    else if (!c.embed_vocab.empty())
      provider = std::make_unique<metrics::MockEmbeddingProvider>(metrics::MockEmbeddingProvider::from_file(c.embed_vocab));
  } catch (const Error& e) {
    provider_problem = e.what();
  }

  metrics::SynonymLexicon lexicon;
  metrics::MeteorParams meteor_params;
  if (!c.synonyms.empty()) {
    lexicon = metrics::SynonymLexicon::from_file(c.synonyms);
    meteor_params.stages.push_back(metrics::MeteorStage::synonym);
    meteor_params.lexicon = &lexicon;
  }

  std::vector<std::string> computed;
  std::vector<std::vector<double>> columns;
  for (const auto& name : c.metrics) {
    if (std::find(computed.begin(), computed.end(), name) != computed.end()) continue;
    const bool embedding = name == "bertscore" || name == "sbertscore";
    std::vector<double> col;
    col.reserve(pairs.size());
    try {
      if (embedding && !provider) throw ProviderError(provider_problem);
      for (const auto& [e, cand] : pairs) {
        if (name == "vqa_acc" || name == "soft_acc") {
          const auto answer = normalize_answer(cand.answer);
          std::vector<std::string> refs;
          for (const auto& r : e.references) refs.push_back(normalize_answer(r));
          col.push_back(name == "vqa_acc" ? metrics::vqa_accuracy(answer, refs, c.acc_mode)
                                          : metrics::soft_vqa_accuracy(answer, refs));
        } else if (name == "meteor") {
          col.push_back(metrics::meteor(cand.answer, e.references, meteor_params));
        } else if (name == "bertscore") {
          col.push_back(metrics::token_embed_score(cand.answer, e.references, *provider));
        } else {
          col.push_back(metrics::sent_embed_score(cand.answer, e.references, *provider));
        }
      }
    } catch (const ProviderError& e) {
      if (c.strict) throw ConfigError("metric '" + name + "': " + e.what());
      err << "warning: skipping metric '" << name << "': " << e.what() << '\n';
      continue;
    }
    computed.push_back(name);
    columns.push_back(std::move(col));
  }

  std::vector<MetricScore> rows;
  rows.reserve(pairs.size() * computed.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    for (std::size_t m = 0; m < computed.size(); ++m)
      rows.push_back({pairs[i].second.example_id, computed[m], columns[m][i]});
  write_jsonl(c.output, rows);
  err << "wrote " << rows.size() << " score row(s) for " << pairs.size() << " candidate(s)\n";
  return kExitOk;
}

inline int cmd_aggregate(const RunConfig& c, std::ostream& err) {
  detail::require(c.human_raw, "human-raw");
  detail::require(c.output, "output");
  const auto raw = read_jsonl<HumanJudgmentRaw>(c.human_raw);
  const auto scores = stats::aggregate_judgments(raw, c.raters);
  write_jsonl(c.output, scores);
  err << "aggregated " << raw.size() << " judgment(s) into " << scores.size() << " item score(s)\n";
  return kExitOk;
}

/// Prints Krippendorff's alpha both as a coefficient and as a percentage.
inline int cmd_agreement(const RunConfig& c, std::ostream& out) {
  detail::require(c.human_raw, "human-raw");
  const auto raw = read_jsonl<HumanJudgmentRaw>(c.human_raw);
  // Validates rater counts and duplicate annotators under the same policy as aggregate.
  stats::aggregate_judgments(raw, c.raters);

  std::vector<std::string> order;
  std::map<std::string, std::vector<int>> units;
  for (const auto& j : raw) {
    auto& u = units[j.example_id];
    if (u.empty()) order.push_back(j.example_id);
    u.push_back(j.correct ? 1 : 0);
  }
  std::vector<std::vector<int>> table;
  for (const auto& id : order) table.push_back(units[id]);
  const double alpha = stats::krippendorff_alpha(table);

  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f (%.2f%%)", alpha, alpha * 100.0);
  out << "items: " << table.size() << '\n' << "krippendorff_alpha: " << buf << '\n';
  if (!c.output.empty()) {
    std::ofstream f(c.output, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + c.output.string());
    f << json{{"items", table.size()}, {"alpha", alpha}, {"alpha_percent", alpha * 100.0}}.dump() << '\n';
  }
  return kExitOk;
}

namespace detail {

inline std::uint64_t fresh_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// Adds one metric's scores, rejecting duplicate (example, metric) rows.
inline void add_score(std::map<std::string, report::ScoreMap>& tables, std::vector<std::string>& order,
                      const std::string& metric, const std::string& id, double score) {
  auto [it, fresh_metric] = tables.try_emplace(metric);
  if (fresh_metric) order.push_back(metric);
  if (!it->second.emplace(id, score).second)
    throw DataError("duplicate '" + metric + "' score for example '" + id + "'");
}

}  // namespace detail

/// Correlation tables, failure extraction and per-category means.
inline int cmd_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  detail::require(c.examples, "examples");
  detail::require(c.candidates, "candidates");
  detail::require(c.human, "human");
  if (c.scores.empty() && c.lave.empty()) throw ConfigError("--scores or --lave is required");

  const auto examples = read_jsonl<VqaExample>(c.examples);
  const auto candidates = read_jsonl<Candidate>(c.candidates);
  const auto pairs = join(candidates, examples);

  std::set<std::string> ids;
  for (const auto& [e, cand] : pairs)
    if (!ids.insert(cand.example_id).second)
      throw DataError("more than one candidate for example '" + cand.example_id + "'");

  report::ScoreMap human;
  for (const auto& h : read_jsonl<HumanScore>(c.human))
    if (!human.emplace(h.example_id(), h.score()).second)
      throw DataError("duplicate human score for example '" + h.example_id() + "'");

  std::map<std::string, report::ScoreMap> tables;
  std::vector<std::string> metric_order;
  for (const auto& path : c.scores)
    for (const auto& s : read_jsonl<MetricScore>(path))
      detail::add_score(tables, metric_order, s.metric, s.example_id, s.score);
  if (!c.lave.empty()) {
    std::size_t unscored = 0;
    for (const auto& r : read_jsonl<LaveResult>(c.lave)) {
      if (r.score)
        detail::add_score(tables, metric_order, "lave", r.example_id, *r.score);
      else
        ++unscored;
    }
    if (unscored) err << "warning: " << unscored << " LAVE result(s) have no score\n";
  }

  // Every table must cover exactly the candidate ids.
  std::set<std::string> offenders;
  auto check = [&](const report::ScoreMap& t) {
    for (const auto& id : ids)
      if (!t.contains(id)) offenders.insert(id);
    for (const auto& [id, _] : t)
      if (!ids.contains(id)) offenders.insert(id);
  };
  check(human);
  for (const auto& [_, t] : tables) check(t);
  if (!offenders.empty()) {
    std::string msg = "scores are not aligned with the candidates; " + std::to_string(offenders.size()) +
                      " offending example id(s):";
    std::size_t k = 0;
    for (const auto& id : offenders) {
      if (k++ == 10) {
        msg += " ...";
        break;
      }
      msg += " " + id;
    }
    throw DataError(msg);
  }

  std::vector<report::Run> runs;
  std::map<std::pair<std::string, std::string>, std::size_t> run_index;
  for (const auto& [e, cand] : pairs) {
    const auto key = std::make_pair(cand.model, e.dataset.value_or("default"));
    auto [it, fresh] = run_index.try_emplace(key, runs.size());
    if (fresh) runs.push_back({key.first, key.second, {}, {}, {}, {}});
    auto& run = runs[it->second];
    run.ids.push_back(cand.example_id);
    run.human.push_back(human.at(cand.example_id));
    run.is_binary.push_back(judge::is_binary_question(e.references));
    for (const auto& m : metric_order) run.metrics[m].push_back(tables.at(m).at(cand.example_id));
  }

  report::TableOptions opt;
  opt.methods = c.methods;
  opt.split_binary = c.split_binary;
  opt.overall = c.overall;
  opt.bootstrap = c.bootstrap;
  opt.metric_order = metric_order;
  if (c.seed) {
    opt.seed = *c.seed;
  } else {
    opt.seed = detail::fresh_seed();
    err << "seed: " << opt.seed << '\n';
  }

  report::ReportBundle bundle;
  bundle.evaluation = report::correlation_table(runs, opt);

  if (tables.contains("vqa_acc")) {
    auto failures = report::extract_failures(tables.at("vqa_acc"), human);
    std::size_t unlabeled = failures.cases.size();
    if (!c.labels.empty()) unlabeled = report::attach_categories(failures, read_jsonl<CategoryLabel>(c.labels));
    if (!c.labels.empty()) {
      std::vector<report::FailureCase> missed;
      for (const auto& f : failures.cases)
        if (f.direction == report::FailureDirection::missed_correct) missed.push_back(f);
      bundle.categories = report::category_means(missed, tables);
    } else if (unlabeled) {
      err << "note: no --labels given; skipping per-category means\n";
    }
    bundle.failures = std::move(failures);
  } else {
    err << "warning: no vqa_acc scores; skipping failure extraction\n";
  }

  const auto written = report::write_report(bundle, c.out_dir);
  out << report::render_text(bundle);
  for (const auto& p : written) err << "wrote " << p.string() << '\n';
  return kExitOk;
}

inline int cmd_cache(const RunConfig& c, const std::string& action, std::ostream& out) {
  detail::require(c.cache_dir, "cache-dir");
  const llm::CompletionCache cache(c.cache_dir);
  if (action == "inspect") {
    const auto s = cache.stats();
    out << "dir: " << c.cache_dir.string() << '\n' << "entries: " << s.entries << '\n' << "bytes: " << s.bytes << '\n';
    return kExitOk;
  }
  if (action == "clear") {
    out << "removed " << cache.clear() << " entries\n";
    return kExitOk;
  }
  throw ConfigError("unknown cache action '" + action + "' (expected inspect or clear)");
}

/// Runs a command, mapping configuration and data errors to exit status 2.
template <typename F>
int run_guarded(F&& f, std::ostream& err) {
  try {
    return f();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitConfig;
}

}  // namespace lave::cli
