#include <sys/wait.h>

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "lave/cli/commands.hpp"
#include "pipeline.hpp"
#include "support.hpp"

using namespace lave;
using namespace lave::cli;
namespace ts = testing_support;

namespace {

struct Proc {
  int code = -1;
  std::string out, err;
};

// Runs the lave binary through the shell; `env` is prefixed verbatim.
Proc run_cli(const std::string& args, const ts::TempDir& dir, const std::string& env = "") {
  const auto err_file = dir / "stderr.txt";
  const std::string cmd = env + " '" + std::string(LAVE_CLI_PATH) + "' " + args + " 2>'" + err_file.string() + "'";
  Proc p;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) return p;
  char buf[4096];
  for (std::size_t n; (n = std::fread(buf, 1, sizeof buf, pipe)) > 0;) p.out.append(buf, n);
  const int status = ::pclose(pipe);
  p.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  p.err = ts::slurp(err_file);
  return p;
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST(CliRate, DemonstrationsReplayToTheirOwnRatings) {
  // Each demonstration is rated as if it were a fresh item, with its own
  // rationale as the frozen completion.
  ts::TempDir dir;
  const auto assets = judge::JudgeAssets::load();
  std::vector<VqaExample> examples;
  std::vector<Candidate> candidates;
  std::vector<llm::ReplayFixture> fixtures;
  std::vector<int> expected;
  for (const auto* set : {&assets.general, &assets.binary})
    for (const auto& d : set->demos) {
      const std::string id = std::string(judge::to_string(set->kind)) + std::to_string(examples.size());
      examples.push_back({id, d.question, d.references, std::nullopt, std::nullopt});
      candidates.push_back({id, "demo", d.candidate});
      judge::PromptOptions opt;
      const auto prompt = judge::build_prompt(examples.back(), candidates.back(),
                                              assets.for_kind(judge::route(examples.back())), opt, assets.templates);
      fixtures.push_back({llm::prompt_hash(prompt), d.rationale});
      expected.push_back(d.rating);
    }
  ASSERT_EQ(examples.size(), 16u);
  write_jsonl(dir / "ex.jsonl", examples);
  write_jsonl(dir / "cand.jsonl", candidates);
  write_jsonl(dir / "fx.jsonl", fixtures);

  const auto p = run_cli("rate --examples " + q(dir / "ex.jsonl") + " --candidates " + q(dir / "cand.jsonl") +
                             " --backend replay --fixtures " + q(dir / "fx.jsonl") + " -o " + q(dir / "out.jsonl"),
                         dir);
  ASSERT_EQ(p.code, 0) << p.err;
  const auto results = read_jsonl<LaveResult>(dir / "out.jsonl");
  ASSERT_EQ(results.size(), 16u);
  for (std::size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].example_id, candidates[i].example_id);
    EXPECT_EQ(results[i].rating, expected[i]) << results[i].example_id;
    EXPECT_EQ(results[i].backend, "replay");
  }
}

TEST(CliRate, EmptyInputAndMissingFixture) {
  ts::TempDir dir;
  const auto fx = ts::fixture_dir() / "replay40";
  ts::spit(dir / "empty.jsonl", "");
  auto p = run_cli("rate --examples " + q(fx / "examples.jsonl") + " --candidates " + q(dir / "empty.jsonl") +
                       " --backend replay --fixtures " + q(fx / "replay.jsonl") + " -o " + q(dir / "out.jsonl"),
                   dir);
  EXPECT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(ts::slurp(dir / "out.jsonl"), "");

  // One candidate answer changed: its prompt hash has no fixture.
  auto cands = read_jsonl<Candidate>(fx / "candidates.jsonl");
  cands[3].answer = "something else entirely";
  write_jsonl(dir / "cands.jsonl", cands);
  p = run_cli("rate --concurrency 3 --examples " + q(fx / "examples.jsonl") + " --candidates " +
                  q(dir / "cands.jsonl") + " --backend replay --fixtures " + q(fx / "replay.jsonl") + " -o " +
                  q(dir / "out.jsonl"),
              dir);
  EXPECT_EQ(p.code, 1) << p.err;
  EXPECT_NE(p.err.find("error: " + cands[3].example_id + ": no replay fixture for prompt hash "), std::string::npos)
      << p.err;
  const auto results = read_jsonl<LaveResult>(dir / "out.jsonl");
  ASSERT_EQ(results.size(), cands.size());
  EXPECT_TRUE(results[3].error);
  EXPECT_TRUE(results[4].rating);

  p = run_cli("rate --errors-as-zero --examples " + q(fx / "examples.jsonl") + " --candidates " +
                  q(dir / "cands.jsonl") + " --backend replay --fixtures " + q(fx / "replay.jsonl") + " -o " +
                  q(dir / "out.jsonl"),
              dir);
  EXPECT_EQ(p.code, 1);
  EXPECT_EQ(read_jsonl<LaveResult>(dir / "out.jsonl")[3].score, 0.0);
}

TEST(CliRate, ConfigurationErrorsExitTwo) {
  ts::TempDir dir;
  const auto fx = ts::fixture_dir() / "replay40";
  const std::string base = "rate --examples " + q(fx / "examples.jsonl") + " --candidates " +
                           q(fx / "candidates.jsonl") + " -o " + q(dir / "o.jsonl");
  EXPECT_EQ(run_cli(base + " --backend replay", dir).code, 2);
  EXPECT_EQ(run_cli(base + " --backend replay --fixtures " + q(fx / "replay.jsonl") + " --n-shot 9", dir).code, 2);
  EXPECT_EQ(run_cli(base + " --backend carrier-pigeon", dir).code, 2);
  EXPECT_EQ(run_cli(base + " --backend replay --fixtures " + q(fx / "replay.jsonl") + " --caption", dir).code, 2);
  EXPECT_EQ(run_cli("rate --bogus-flag", dir).code, 2);
  EXPECT_EQ(run_cli("--help", dir).code, 0);
}

TEST(CliMetrics, UnknownMetricListsValidOnes) {
  ts::TempDir dir;
  const auto fx = ts::fixture_dir() / "replay40";
  const auto p = run_cli("metrics --metrics vqa_acc,bleu --examples " + q(fx / "examples.jsonl") +
                             " --candidates " + q(fx / "candidates.jsonl") + " -o " + q(dir / "s.jsonl"),
                         dir);
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find("unknown metric 'bleu'; valid metrics: vqa_acc, soft_acc, meteor, bertscore, sbertscore"),
            std::string::npos)
      << p.err;
}

TEST(CliMetrics, EmbeddingProviderFallback) {
  ts::TempDir dir;
  RunConfig c = ts::replay40_config(dir.path());
  c.metrics = {"vqa_acc", "bertscore"};
  c.embed_vocab.clear();
  c.output = dir / "s.jsonl";
  std::ostringstream err;
  EXPECT_EQ(run_guarded([&] { return cmd_metrics(c, err); }, err), 0);
  const auto rows = read_jsonl<MetricScore>(c.output);
  EXPECT_EQ(rows.size(), 40u);
  EXPECT_NE(err.str().find("bertscore"), std::string::npos);

  c.strict = true;
  std::ostringstream err2;
  EXPECT_EQ(run_guarded([&] { return cmd_metrics(c, err2); }, err2), 2);
}

TEST(CliAggregate, WrongRaterCountNamesTheItem) {
  ts::TempDir dir;
  std::string raw;
  for (int i = 0; i < 5; ++i) raw += R"({"example_id":"ok","annotator_id":"w)" + std::to_string(i) + R"(","correct":true})" "\n";
  for (int i = 0; i < 4; ++i) raw += R"({"example_id":"short","annotator_id":"w)" + std::to_string(i) + R"(","correct":true})" "\n";
  ts::spit(dir / "raw.jsonl", raw);
  const auto p = run_cli("aggregate --human-raw " + q(dir / "raw.jsonl") + " -o " + q(dir / "h.jsonl"), dir);
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find("'short'"), std::string::npos) << p.err;

  const auto lenient =
      run_cli("aggregate --lenient --human-raw " + q(dir / "raw.jsonl") + " -o " + q(dir / "h.jsonl"), dir);
  EXPECT_EQ(lenient.code, 0) << lenient.err;
  EXPECT_EQ(read_jsonl<HumanScore>(dir / "h.jsonl")[1], HumanScore("short", 1.0, 4));
}

TEST(CliAgreement, PrintsAlpha) {
  ts::TempDir dir;
  ts::spit(dir / "raw.jsonl",
           R"({"example_id":"a","annotator_id":"x","correct":true}
{"example_id":"a","annotator_id":"y","correct":true}
{"example_id":"b","annotator_id":"x","correct":false}
{"example_id":"b","annotator_id":"y","correct":false}
{"example_id":"c","annotator_id":"x","correct":true}
{"example_id":"c","annotator_id":"y","correct":false}
)");
  const auto p = run_cli("agreement --raters 2 --human-raw " + q(dir / "raw.jsonl") + " -o " + q(dir / "a.json"), dir);
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out, "items: 3\nkrippendorff_alpha: 0.4444 (44.44%)\n");
  EXPECT_NEAR(json::parse(ts::slurp(dir / "a.json"))["alpha"].get<double>(), 4.0 / 9.0, 1e-12);
  EXPECT_EQ(run_cli("agreement --human-raw " + q(dir / "raw.jsonl"), dir).code, 2);
}

TEST(CliReport, PipelineIsDeterministicWithSplitTables) {
  ts::TempDir a, b;
  auto ca = ts::replay40_config(a.path());
  ca.split_binary = true;
  ca.methods = {stats::CorrelationMethod::spearman, stats::CorrelationMethod::kendall};
  ca.bootstrap = 100;
  ca.seed = 7;
  auto cb = ts::replay40_config(b.path());
  cb.split_binary = true;
  cb.methods = ca.methods;
  cb.bootstrap = 100;
  cb.seed = 7;
  const auto ra = ts::run_replay40(a.path(), ca);
  const auto rb = ts::run_replay40(b.path(), cb);
  ASSERT_EQ(ra.rate_exit, 0) << ra.report_stderr;
  ASSERT_EQ(ra.metrics_exit, 0) << ra.report_stderr;
  ASSERT_EQ(ra.aggregate_exit, 0) << ra.report_stderr;
  ASSERT_EQ(ra.report_exit, 0) << ra.report_stderr;
  EXPECT_EQ(ra.report_stdout, rb.report_stdout);
  EXPECT_EQ(ts::slurp(a / "report" / "report.json"), ts::slurp(b / "report" / "report.json"));
  EXPECT_EQ(ts::slurp(a / "report" / "category_means.csv"), ts::slurp(b / "report" / "category_means.csv"));

  const auto text = ra.report_stdout;
  for (const char* title : {"Spearman correlation with human judgment (x100), all questions",
                            "Spearman correlation with human judgment (x100), binary questions",
                            "Spearman correlation with human judgment (x100), other questions",
                            "Kendall correlation with human judgment (x100), other questions"})
    EXPECT_NE(text.find(title), std::string::npos) << title;
  EXPECT_NE(text.find("blip2/vqav2"), std::string::npos);
  EXPECT_NE(text.find("bootstrap: 100 resamples, seed 7"), std::string::npos);
  EXPECT_EQ(json::parse(ts::slurp(a / "report" / "report.json"))["tables"].size(), 6u);
}

TEST(CliReport, MisalignedScoresExitTwo) {
  ts::TempDir dir;
  auto c = ts::replay40_config(dir.path());
  c.bootstrap = 0;
  c.seed = 1;
  const auto r = ts::run_replay40(dir.path(), c);
  ASSERT_EQ(r.report_exit, 0) << r.report_stderr;

  auto human = read_jsonl<HumanScore>(c.human);
  human.pop_back();
  const auto dropped = read_jsonl<HumanScore>(c.human).back().example_id();
  write_jsonl(dir / "short_human.jsonl", human);
  const auto p = run_cli("report --examples " + q(c.examples) + " --candidates " + q(c.candidates) + " --human " +
                             q(dir / "short_human.jsonl") + " --scores " + q(c.scores.front()) + " --out-dir " +
                             q(dir / "r2") + " --seed 1",
                         dir);
  EXPECT_EQ(p.code, 2);
  EXPECT_NE(p.err.find(dropped), std::string::npos) << p.err;
}

TEST(CliReport, SeedIsPrintedWhenGenerated) {
  ts::TempDir dir;
  auto c = ts::replay40_config(dir.path());
  c.bootstrap = 0;
  c.seed.reset();
  const auto r = ts::run_replay40(dir.path(), c);
  ASSERT_EQ(r.report_exit, 0);
  EXPECT_NE(r.report_stderr.find("seed: "), std::string::npos);
}

TEST(CliConfig, PrecedenceDefaultFileFlagEnv) {
  ts::TempDir dir;
  auto c = ts::replay40_config(dir.path());
  c.seed = 1;
  c.bootstrap = 0;
  ASSERT_EQ(ts::run_replay40(dir.path(), c).report_exit, 0);

  ts::spit(dir / "lave.conf", "# report settings\nbootstrap = 20\nseed = 1\nmethod = kendall\n");
  const std::string args = "--config " + q(dir / "lave.conf") + " report --examples " + q(c.examples) +
                           " --candidates " + q(c.candidates) + " --human " + q(c.human) + " --scores " +
                           q(c.scores.front()) + " --out-dir " + q(dir / "r");
  auto seed_of = [&] { return json::parse(ts::slurp(dir / "r" / "report.json")); };

  ASSERT_EQ(run_cli(args, dir, "env -u LAVE_SEED").code, 0);
  EXPECT_EQ(seed_of()["seed"], 1);
  EXPECT_EQ(seed_of()["bootstrap_resamples"], 20);
  EXPECT_EQ(seed_of()["tables"][0]["method"], "kendall");

  ASSERT_EQ(run_cli(args + " --seed 2", dir, "env -u LAVE_SEED").code, 0);
  EXPECT_EQ(seed_of()["seed"], 2);

  ASSERT_EQ(run_cli(args + " --seed 2", dir, "env LAVE_SEED=3").code, 0);
  EXPECT_EQ(seed_of()["seed"], 3);

  ts::spit(dir / "bad.conf", "colour = blue\n");
  EXPECT_EQ(run_cli("--config " + q(dir / "bad.conf") + " report", dir).code, 2);
}

TEST(CliConfig, SettingParsing) {
  RunConfig c;
  apply_setting(c, "scores", "a.jsonl, b.jsonl");
  apply_setting(c, "scores", "c.jsonl");
  EXPECT_EQ(c.scores, (std::vector<std::filesystem::path>{"c.jsonl"}));
  apply_setting(c, "no-rationale", "true");
  EXPECT_FALSE(c.prompt.rationale);
  apply_setting(c, "method", "spearman,kendall");
  EXPECT_EQ(c.methods.size(), 2u);
  EXPECT_THROW(apply_setting(c, "method", "pearson"), ConfigError);
  EXPECT_THROW(apply_setting(c, "concurrency", "0"), ConfigError);
  EXPECT_THROW(apply_setting(c, "seed", "-1"), ConfigError);
  EXPECT_THROW(apply_setting(c, "split", "thirds"), ConfigError);
  EXPECT_THROW(apply_setting(c, "caption", "maybe"), ConfigError);
  for (const auto& s : settings()) EXPECT_NE(s.commands, 0u) << s.key;
}

TEST(CliCache, InspectAndClear) {
  ts::TempDir dir;
  const llm::CompletionCache cache(dir / "cache");
  cache.put({std::string(64, 'a'), "x", ""});
  cache.put({std::string(64, 'b'), "y", ""});
  auto p = run_cli("cache inspect --cache-dir " + q(dir / "cache"), dir);
  EXPECT_EQ(p.code, 0);
  EXPECT_NE(p.out.find("entries: 2"), std::string::npos);
  p = run_cli("cache clear --cache-dir " + q(dir / "cache"), dir);
  EXPECT_EQ(p.out, "removed 2 entries\n");
  EXPECT_EQ(run_cli("cache explode --cache-dir " + q(dir / "cache"), dir).code, 2);
}

TEST(CliRate, CacheServesRepeatRun) {
  ts::TempDir dir;
  const auto fx = ts::fixture_dir() / "replay40";
  const std::string args = "rate --examples " + q(fx / "examples.jsonl") + " --candidates " +
                           q(fx / "candidates.jsonl") + " --backend replay --fixtures " + q(fx / "replay.jsonl") +
                           " --cache-dir " + q(dir / "cache") + " -o " + q(dir / "o.jsonl");
  ASSERT_EQ(run_cli(args, dir).code, 0);
  const auto first = ts::slurp(dir / "o.jsonl");
  const auto p = run_cli(args, dir);
  EXPECT_NE(p.err.find("cache 40 hit(s), 0 miss(es)"), std::string::npos) << p.err;
  EXPECT_EQ(ts::slurp(dir / "o.jsonl"), first);
}

TEST(Fixtures, ReplayKeysMatchCurrentPrompts) {
  const auto fx = ts::fixture_dir() / "replay40";
  const auto assets = judge::JudgeAssets::load();
  const auto pairs = join(read_jsonl<Candidate>(fx / "candidates.jsonl"), read_jsonl<VqaExample>(fx / "examples.jsonl"));
  std::set<std::string> keys;
  for (const auto& f : read_jsonl<llm::ReplayFixture>(fx / "replay.jsonl")) keys.insert(f.key);
  ASSERT_EQ(keys.size(), pairs.size());
  for (const auto& [e, cand] : pairs)
    EXPECT_TRUE(keys.contains(llm::prompt_hash(
        judge::build_prompt(e, cand, assets.for_kind(judge::route(e)), {}, assets.templates))))
        << e.id;
}
