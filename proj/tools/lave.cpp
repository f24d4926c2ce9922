#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lave/cli/commands.hpp"

namespace {

using lave::cli::RunConfig;

struct Subcommand {
  CLI::App* app;
  unsigned id;
  // Setting key -> option, for the settings this subcommand accepts.
  std::vector<std::pair<std::string, CLI::Option*>> options;
};

std::map<std::string, std::vector<std::string>> g_values;
std::map<std::string, bool> g_flags;

Subcommand add_subcommand(CLI::App& root, const char* name, const char* help, unsigned id) {
  Subcommand s{root.add_subcommand(name, help), id, {}};
  for (const auto& info : lave::cli::settings()) {
    if (!(info.commands & id)) continue;
    const std::string key(info.key);
    std::string help_text(info.help);
    if (!info.env.empty()) help_text += " [env " + std::string(info.env) + "]";
    const std::string names = key == "output" ? "-o,--output" : "--" + key;
    CLI::Option* opt = info.is_flag ? s.app->add_flag(names, g_flags[key], help_text)
                                    : s.app->add_option(names, g_values[key], help_text)
                                          ->expected(1)
                                          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    s.options.emplace_back(key, opt);
  }
  return s;
}

RunConfig resolve(const Subcommand& s, const std::string& config_file) {
  RunConfig c;
  if (!config_file.empty())
    for (const auto& [k, v] : lave::cli::read_config_file(config_file)) lave::cli::apply_setting(c, k, v);
  for (const auto& [key, opt] : s.options) {
    if (opt->count() == 0) continue;
    if (g_flags.contains(key)) {
      lave::cli::apply_setting(c, key, "true");
    } else {
      std::string joined;
      for (const auto& v : g_values[key]) joined += (joined.empty() ? "" : ",") + v;
      lave::cli::apply_setting(c, key, joined);
    }
  }
  lave::cli::apply_environment(c, s.id);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LLM-assisted VQA evaluation: judge ratings, baseline metrics, agreement and correlation reports"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file,
                 "config file of 'key = value' lines using the long flag names; flags override it and "
                 "LAVE_* environment variables override flags");

  using namespace lave::cli;
  auto rate = add_subcommand(app, "rate", "score candidates with the LLM judge", kRate);
  auto metrics = add_subcommand(app, "metrics", "compute baseline metric scores", kMetrics);
  auto aggregate = add_subcommand(app, "aggregate", "collapse raw human judgments into 0/0.5/1 scores", kAggregate);
  auto agreement = add_subcommand(app, "agreement", "inter-annotator agreement (Krippendorff's alpha)", kAgreement);
  auto report = add_subcommand(app, "report", "correlation tables, failure cases and category means", kReport);
  auto cache = add_subcommand(app, "cache", "inspect or clear the completion cache", kCache);
  std::string cache_action;
  cache.app->add_option("action", cache_action, "inspect or clear")->required()->check(CLI::IsMember({"inspect", "clear"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  return run_guarded(
      [&]() -> int {
        if (*rate.app) return cmd_rate(resolve(rate, config_file), std::cerr);
        if (*metrics.app) return cmd_metrics(resolve(metrics, config_file), std::cerr);
        if (*aggregate.app) return cmd_aggregate(resolve(aggregate, config_file), std::cerr);
        if (*agreement.app) return cmd_agreement(resolve(agreement, config_file), std::cout);
        if (*report.app) return cmd_report(resolve(report, config_file), std::cout, std::cerr);
        return cmd_cache(resolve(cache, config_file), cache_action, std::cout);
      },
      std::cerr);
}
