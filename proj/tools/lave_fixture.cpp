// Builds a replay fixture file: for each candidate, renders the judge prompt
// exactly as `lave rate` would and stores the given completion under the
// prompt's hash.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "lave/judge/prompt.hpp"
#include "lave/jsonl.hpp"
#include "lave/llm/backend.hpp"
#include "lave/llm/replay.hpp"

namespace {

struct CannedCompletion {
  std::string example_id;
  std::string completion;
};

void from_json(const lave::json& j, CannedCompletion& c) {
  c.example_id = lave::detail::required<std::string>(j, "example_id");
  c.completion = lave::detail::required<std::string>(j, "completion");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Render judge prompts and pair their hashes with canned completions"};
  std::string examples_path, candidates_path, completions_path, output;
  std::string data_dir = lave::judge::default_data_dir().string();
  lave::judge::PromptOptions opt;
  bool no_rationale = false, no_filter = false;
  app.add_option("--examples", examples_path, "examples JSONL")->required();
  app.add_option("--candidates", candidates_path, "candidates JSONL")->required();
  app.add_option("--completions", completions_path, "completions JSONL (example_id, completion)")->required();
  app.add_option("-o,--output", output, "replay fixtures JSONL to write")->required();
  app.add_option("--data-dir", data_dir, "directory holding demonstrations and prompt templates");
  app.add_option("--n-shot", opt.n_shot, "number of demonstrations per prompt");
  app.add_flag("--no-rationale", no_rationale, "prompts without the rationale directive");
  app.add_flag("--no-filter", no_filter, "keep rare reference answers");
  app.add_flag("--caption", opt.include_caption, "include image descriptions");
  app.add_flag("--binary-warning", opt.binary_warning, "append the yes/no caution");
  CLI11_PARSE(app, argc, argv);
  opt.rationale = !no_rationale;
  opt.filter_references = !no_filter;

  try {
    const auto assets = lave::judge::JudgeAssets::load(data_dir);
    const auto examples = lave::read_jsonl<lave::VqaExample>(examples_path);
    const auto candidates = lave::read_jsonl<lave::Candidate>(candidates_path);
    std::map<std::string, std::string> canned;
    for (const auto& c : lave::read_jsonl<CannedCompletion>(completions_path)) canned[c.example_id] = c.completion;

    std::vector<lave::llm::ReplayFixture> fixtures;
    for (const auto& [example, candidate] : lave::join(candidates, examples)) {
      auto it = canned.find(candidate.example_id);
      if (it == canned.end()) throw lave::DataError("no completion for example '" + candidate.example_id + "'");
      const auto prompt = lave::judge::build_prompt(example, candidate, assets.for_kind(lave::judge::route(example)),
                                                    opt, assets.templates);
      fixtures.push_back({lave::llm::prompt_hash(prompt), it->second});
    }
    lave::write_jsonl(output, fixtures);
    std::cerr << "wrote " << fixtures.size() << " fixture(s) to " << output << '\n';
  } catch (const lave::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
