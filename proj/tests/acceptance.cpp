// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lave/lave.hpp"
#include "oracles.hpp"
#include "pipeline.hpp"
#include "support.hpp"

using namespace lave;
namespace ts = testing_support;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::vector<std::string> split_blocks(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t pos; (pos = text.find("\n\n", start)) != std::string::npos; start = pos + 2)
    out.push_back(text.substr(start, pos - start));
  out.push_back(text.substr(start));
  return out;
}

Outcome score_mapping() {
  Outcome o;
  o.check(judge::rating_to_score(1) == 0.0, "rating 1");
  o.check(judge::rating_to_score(2) == 0.5, "rating 2");
  o.check(judge::rating_to_score(3) == 1.0, "rating 3");
  o.detail = o.ok ? "{1,2,3} -> {0, 0.5, 1} exactly" : o.detail;
  return o;
}

Outcome demo_fidelity() {
  Outcome o;
  const auto assets = judge::JudgeAssets::load();
  int identical = 0, parsed = 0, total = 0;
  for (auto [set, file] : {std::pair{&assets.general, "demo_text_general.txt"},
                           std::pair{&assets.binary, "demo_text_binary.txt"}}) {
    const auto blocks = split_blocks(ts::slurp(ts::test_data_dir() / file));
    o.check(blocks.size() == set->demos.size(), std::string("demo count differs for ") + file);
    for (std::size_t i = 0; i < set->demos.size(); ++i) {
      ++total;
      if (i < blocks.size() && judge::render_demonstration(set->demos[i]) == blocks[i]) ++identical;
      try {
        if (judge::parse_rating(set->demos[i].rationale).rating == set->demos[i].rating) ++parsed;
      } catch (const ParseError&) {
      }
    }
  }
  o.check(total == 16 && identical == 16 && parsed == 16, "");
  o.detail = std::to_string(identical) + "/16 byte-identical, " + std::to_string(parsed) + "/16 ratings recovered";
  return o;
}

Outcome reference_filter() {
  Outcome o;
  std::mt19937 rng(3);
  const std::vector<std::string> surface{"red", "Red.", "blue", "two", "2", "a cat", "cat", "dog", "yes", "no"};
  std::uniform_int_distribution<std::size_t> pick(0, surface.size() - 1);
  std::uniform_int_distribution<int> len(1, 15);
  int agree = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::string> refs(static_cast<std::size_t>(len(rng)));
    for (auto& r : refs) r = surface[pick(rng)];
    std::vector<std::string> keys;
    for (const auto& r : refs) keys.push_back(normalize_answer(r));
    const auto kept = judge::filter_references(refs);
    std::vector<std::string> kept_keys;
    for (const auto& r : kept) kept_keys.push_back(normalize_answer(r));
    const bool same = kept_keys == oracle::filter_rule(keys);
    agree += same;
    o.check(same, "differs from brute-force rule on case " + std::to_string(t));
    o.check(judge::filter_references(kept) == kept, "not idempotent on case " + std::to_string(t));
    o.check(!kept.empty(), "empty output on case " + std::to_string(t));
  }
  if (o.ok) o.detail = std::to_string(agree) + "/200 cases match; idempotent, non-empty";
  return o;
}

Outcome vqa_accuracy_boundary() {
  Outcome o;
  std::vector<std::string> one(9, "other"), two(8, "other");
  one.push_back("x");
  two.insert(two.end(), {"x", "x"});
  const double a1 = metrics::vqa_accuracy("x", one), a2 = metrics::vqa_accuracy("x", two);
  o.check(std::fabs(a1 - 1.0 / 3.0) <= 1e-9, "1-of-10 gave " + fmt("%.12f", a1));
  o.check(std::fabs(a2 - 2.0 / 3.0) <= 1e-9, "2-of-10 gave " + fmt("%.12f", a2));
  o.check(a1 < 0.5 && a2 > 0.5, "boundary not straddled");
  if (o.ok) o.detail = "1-of-10 = " + fmt("%.4f", a1) + ", 2-of-10 = " + fmt("%.4f", a2);
  return o;
}

Outcome statistics_oracles() {
  Outcome o;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> len(2, 8), lvl(0, 2);
  int compared = 0;
  double worst = 0.0;
  while (compared < 1000) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = lvl(rng) / 2.0;
    for (auto& v : y) v = lvl(rng) / 2.0;
    auto constant = [](const std::vector<double>& v) {
      return std::all_of(v.begin(), v.end(), [&](double a) { return a == v[0]; });
    };
    if (constant(x) || constant(y)) continue;
    ++compared;
    worst = std::max({worst, std::fabs(stats::spearman(x, y).coefficient - oracle::spearman(x, y)),
                      std::fabs(stats::kendall(x, y).coefficient - oracle::kendall_tau_b(x, y))});
  }
  o.check(worst <= 1e-12, "max oracle deviation " + fmt("%.3g", worst));
  using U = std::vector<std::vector<int>>;
  const double toy = stats::krippendorff_alpha(U{{1, 1}, {0, 0}, {1, 0}});
  o.check(std::fabs(toy - 4.0 / 9.0) <= 1e-9, "toy alpha " + fmt("%.12f", toy));
  const double agree = stats::krippendorff_alpha(U{{1, 1, 1}, {0, 0, 0}, {1, 1}});
  o.check(agree == 1.0, "all-agree alpha " + fmt("%.17g", agree));
  if (o.ok)
    o.detail = "1000 vectors, max deviation " + fmt("%.1e", worst) + "; toy alpha " + fmt("%.6f", toy) +
               "; all-agree alpha 1";
  return o;
}

Outcome human_aggregation() {
  Outcome o;
  const double expected[6] = {0.0, 0.0, 0.5, 0.5, 1.0, 1.0};
  int classes = 0;
  for (int k = 0; k <= 5; ++k) {
    bool v[5] = {};
    for (int i = 0; i < k; ++i) v[i] = true;
    const double got = stats::aggregate_human(std::span<const bool>(v, 5));
    o.check(got == expected[k], std::to_string(k) + " true ratings gave " + fmt("%g", got));
    classes += got == expected[k];
  }
  if (o.ok) o.detail = std::to_string(classes) + "/6 count classes";
  return o;
}

std::string bits(const stats::SignificanceResult& r) {
  std::ostringstream s;
  s << fmt("%a", r.mean_diff) << ' ' << fmt("%a", r.p_value) << ' ' << r.significant << ' ' << r.resamples << ' '
    << r.seed << ' ' << r.redraws << ' ' << fmt("%a", r.t);
  return s.str();
}

Outcome bootstrap_sanity() {
  Outcome o;
  const auto t0 = Clock::now();
  std::mt19937 rng(50);
  std::uniform_int_distribution<int> h(0, 2);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> human, a, b;
  for (int i = 0; i < 50; ++i) {
    human.push_back(h(rng) / 2.0);
    a.push_back(human.back());
    b.push_back(u(rng));
  }
  stats::BootstrapOptions opt;
  opt.resamples = 5000;
  opt.seed = 2024;
  const auto r1 = stats::bootstrap_compare(a, b, human, stats::CorrelationMethod::spearman, opt);
  const auto r2 = stats::bootstrap_compare(a, b, human, stats::CorrelationMethod::spearman, opt);
  o.check(r1 == r2 && bits(r1) == bits(r2), "same seed gave different results");
  o.check(r1.significant, "A vs noise not significant (p = " + fmt("%.3g", r1.p_value) + ")");
  const auto same = stats::bootstrap_compare(a, a, human, stats::CorrelationMethod::spearman, opt);
  o.check(same.mean_diff == 0.0 && !same.significant, "A vs A: mean_diff " + fmt("%g", same.mean_diff));
  const double secs = seconds_since(t0);
  o.check(secs < 10.0, "took " + fmt("%.2f", secs) + " s");
  if (o.ok)
    o.detail = "reproducible; A vs noise mean_diff " + fmt("%.4f", r1.mean_diff) + " p " + fmt("%.2g", r1.p_value) +
               "; A vs A mean_diff 0; " + fmt("%.2f", secs) + " s for 3 x 5000 resamples";
  return o;
}

Outcome end_to_end_replay() {
  Outcome o;
  const auto t0 = Clock::now();
  ts::TempDir a, b;
  auto config = [](const std::filesystem::path& work) {
    auto c = ts::replay40_config(work);
    c.seed = 7;
    return c;
  };
  const auto ra = ts::run_replay40(a.path(), config(a.path()));
  const auto rb = ts::run_replay40(b.path(), config(b.path()));
  o.check(ra.rate_exit == 0 && ra.metrics_exit == 0 && ra.aggregate_exit == 0 && ra.report_exit == 0,
          "pipeline failed: " + ra.report_stderr);
  if (!o.ok) return o;
  o.check(ra.report_stdout == rb.report_stdout, "report text differs between runs");
  for (const char* f : {"report.json", "failures.jsonl", "category_means.csv"})
    o.check(ts::slurp(a / "report" / f) == ts::slurp(b / "report" / f), std::string(f) + " differs between runs");
  o.check(ts::slurp(a / "lave.jsonl") == ts::slurp(b / "lave.jsonl"), "LAVE results differ between runs");

  const auto j = json::parse(ts::slurp(a / "report" / "report.json"));
  std::map<std::string, double> overall;
  for (const auto& row : j["tables"][0]["rows"])
    for (const auto& cell : row["cells"])
      if (cell["column"] == "Overall" && !cell["coefficient"].is_null())
        overall[row["metric"]] = cell["coefficient"].get<double>();
  o.check(overall.contains("lave") && overall.contains("vqa_acc"), "overall cells missing");
  if (!o.ok) return o;
  o.check(overall["lave"] > overall["vqa_acc"], "LAVE does not exceed VQA accuracy");
  const double secs = seconds_since(t0);
  o.check(secs < 5.0, "took " + fmt("%.2f", secs) + " s");
  if (o.ok)
    o.detail = "deterministic over 2 runs; overall Spearman LAVE " + fmt("%.2f", overall["lave"] * 100) +
               " > VQA acc " + fmt("%.2f", overall["vqa_acc"] * 100) + "; " + fmt("%.2f", secs) + " s";
  return o;
}

Outcome meteor_cases() {
  Outcome o;
  const std::vector<std::string> three{"on the right"}, one{"red"}, dog{"dog"};
  const double m3 = metrics::meteor("on the right", three), m1 = metrics::meteor("red", one),
               m0 = metrics::meteor("cat", dog);
  o.check(std::fabs(m3 - 0.9815) <= 1e-4, "3-token " + fmt("%.6f", m3));
  o.check(std::fabs(m1 - 0.5) <= 1e-9, "1-token " + fmt("%.12f", m1));
  o.check(m0 == 0.0, "disjoint " + fmt("%g", m0));
  if (o.ok) o.detail = "3-token " + fmt("%.4f", m3) + ", 1-token " + fmt("%.4f", m1) + ", disjoint 0";
  return o;
}

Outcome embedding_mock() {
  // The token-level metric is compared with unigram-overlap F1. The sentence
  // metric of a unit-normalized count vector is a count cosine, so it gets
  // that oracle instead.
  Outcome o;
  const std::vector<std::string> vocab{"red", "blue", "car", "dog", "big", "small", "on", "left", "right", "two",
                                       "white", "man"};
  metrics::MockEmbeddingProvider mock(vocab);
  std::mt19937 rng(10);
  std::uniform_int_distribution<int> len(1, 4);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  auto answer = [&] {
    std::vector<std::string> w(static_cast<std::size_t>(len(rng)));
    for (auto& t : w) t = vocab[pick(rng)];
    return w;
  };
  auto join = [](const std::vector<std::string>& w) {
    std::string s;
    for (const auto& t : w) s += (s.empty() ? "" : " ") + t;
    return s;
  };
  double worst_token = 0.0, worst_sent = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto cand = answer(), ref = answer();
    const std::vector<std::string> refs{join(ref)};
    worst_token = std::max(worst_token, std::fabs(metrics::token_embed_score(join(cand), refs, mock) -
                                                  oracle::unigram_f1(cand, ref)));
    worst_sent = std::max(worst_sent, std::fabs(metrics::sent_embed_score(join(cand), refs, mock) -
                                                oracle::count_cosine(cand, ref)));
  }
  o.check(worst_token <= 1e-9, "token metric deviates from unigram F1 by " + fmt("%.3g", worst_token));
  o.check(worst_sent <= 1e-9, "sentence metric deviates from count cosine by " + fmt("%.3g", worst_sent));
  if (o.ok)
    o.detail = "100 answers; token metric vs unigram F1 max dev " + fmt("%.1e", worst_token) +
               "; sentence metric vs count cosine max dev " + fmt("%.1e", worst_sent);
  return o;
}

Outcome failure_extraction() {
  Outcome o;
  ts::TempDir dir;
  auto c = ts::replay40_config(dir.path());
  c.seed = 1;
  c.bootstrap = 0;
  const auto r = ts::run_replay40(dir.path(), c);
  o.check(r.report_exit == 0, "pipeline failed: " + r.report_stderr);
  if (!o.ok) return o;

  const std::set<std::string> want_missed{
      "vqav2-blip2-03", "vqav2-blip2-04", "vqav2-blip2-09", "okvqa-blip2-02", "okvqa-blip2-04",
      "okvqa-blip2-07", "okvqa-blip2-09", "vqav2-llava-03", "vqav2-llava-04", "vqav2-llava-09",
      "okvqa-llava-03", "okvqa-llava-04", "okvqa-llava-09", "okvqa-llava-10"};
  const std::set<std::string> want_fp{"vqav2-blip2-08", "okvqa-blip2-08", "vqav2-llava-08"};

  std::set<std::string> missed, fp;
  std::istringstream lines(ts::slurp(dir / "report" / "failures.jsonl"));
  for (std::string line; std::getline(lines, line);) {
    const auto f = json::parse(line);
    const std::string id = f["example_id"];
    const double acc = f["vqa_accuracy"], hum = f["human_score"];
    if (f["direction"] == "missed_correct") {
      missed.insert(id);
      o.check(acc < 0.5 && hum == 1.0, id + " is not a missed_correct case");
    } else {
      fp.insert(id);
      o.check(acc > 0.5 && hum == 0.0, id + " is not a false_positive case");
    }
    o.check(!(missed.contains(id) && fp.contains(id)), id + " in both directions");
  }
  o.check(missed == want_missed, "missed_correct set differs (" + std::to_string(missed.size()) + " found)");
  o.check(fp == want_fp, "false_positive set differs (" + std::to_string(fp.size()) + " found)");

  // Everything outside the two sets is correctly left out.
  const auto human = read_jsonl<HumanScore>(c.human);
  std::map<std::string, double> acc;
  for (const auto& s : read_jsonl<MetricScore>(c.scores.front()))
    if (s.metric == "vqa_acc") acc[s.example_id] = s.score;
  for (const auto& h : human) {
    const auto d = report::classify_failure(acc.at(h.example_id()), h.score());
    o.check(d.has_value() == (missed.contains(h.example_id()) || fp.contains(h.example_id())),
            h.example_id() + " misclassified");
  }
  if (o.ok)
    o.detail = std::to_string(missed.size()) + " missed_correct, " + std::to_string(fp.size()) +
               " false_positive; exact match with hand counts; partition holds over " +
               std::to_string(human.size()) + " examples";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"AC1 score mapping", score_mapping},
      {"AC2 demonstration fidelity", demo_fidelity},
      {"AC3 reference filter", reference_filter},
      {"AC4 VQA accuracy boundary", vqa_accuracy_boundary},
      {"AC5 statistics oracles", statistics_oracles},
      {"AC6 human aggregation", human_aggregation},
      {"AC7 bootstrap determinism and sanity", bootstrap_sanity},
      {"AC8 end-to-end replay", end_to_end_replay},
      {"AC9 METEOR hand cases", meteor_cases},
      {"AC10 embedding metrics under mock provider", embedding_mock},
      {"AC11 failure extraction", failure_extraction},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.ok;
    std::printf("%s %s: %s\n", o.ok ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
