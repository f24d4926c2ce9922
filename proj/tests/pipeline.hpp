#pragma once

// End-to-end run over the bundled replay40 corpus, in process.

#include <filesystem>
#include <sstream>
#include <string>

#include "lave/cli/commands.hpp"
#include "support.hpp"

namespace testing_support {

struct PipelineRun {
  std::filesystem::path dir;
  int rate_exit = -1, metrics_exit = -1, aggregate_exit = -1, report_exit = -1;
  std::string report_stdout, report_stderr;
};

inline lave::cli::RunConfig replay40_config(const std::filesystem::path& work) {
  const auto fx = fixture_dir() / "replay40";
  lave::cli::RunConfig c;
  c.examples = fx / "examples.jsonl";
  c.candidates = fx / "candidates.jsonl";
  c.human_raw = fx / "human_raw.jsonl";
  c.labels = fx / "labels.jsonl";
  c.backend.kind = "replay";
  c.backend.fixtures = fx / "replay.jsonl";
  c.embed_vocab = fx / "vocab.txt";
  c.synonyms = fx / "synonyms.txt";
  c.metrics = {"vqa_acc", "soft_acc", "meteor", "bertscore", "sbertscore"};
  c.human = work / "human.jsonl";
  c.lave = work / "lave.jsonl";
  c.scores = {work / "scores.jsonl"};
  c.out_dir = work / "report";
  return c;
}

/// rate -> metrics -> aggregate -> report, writing into `work`.
inline PipelineRun run_replay40(const std::filesystem::path& work, lave::cli::RunConfig c) {
  using namespace lave::cli;
  PipelineRun r;
  r.dir = work;
  std::ostringstream sink;

  c.output = c.lave;
  r.rate_exit = run_guarded([&] { return cmd_rate(c, sink); }, sink);
  c.output = c.scores.front();
  r.metrics_exit = run_guarded([&] { return cmd_metrics(c, sink); }, sink);
  c.output = c.human;
  r.aggregate_exit = run_guarded([&] { return cmd_aggregate(c, sink); }, sink);

  std::ostringstream out, err;
  r.report_exit = run_guarded([&] { return cmd_report(c, out, err); }, err);
  r.report_stdout = out.str();
  r.report_stderr = sink.str() + err.str();
  return r;
}

}  // namespace testing_support
