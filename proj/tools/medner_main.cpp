#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "medner/config.hpp"
#include "medner/errors.hpp"
#include "medner/pipeline.hpp"
#include "medner/text.hpp"
#include "medner/types.hpp"

namespace {

std::vector<medner::PromptStrategy> parse_strategy_list(const std::string& csv) {
  std::vector<medner::PromptStrategy> strategies;
  for (const std::string& token : medner::split_csv(csv)) {
    auto parsed = medner::strategy_from_token(token);
    if (!parsed) {
      throw medner::UsageError("unknown strategy token '" + token +
                               "' (expected zero, doc, sent, or ent)");
    }
    strategies.push_back(*parsed);
  }
  if (strategies.empty()) throw medner::UsageError("--strategies needs at least one token");
  return strategies;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"prompt-based clinical entity recognition over discharge summaries"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "pipeline config file")->required();

  std::string strategies_csv = "zero,doc,sent,ent";
  std::string mode_override;
  std::string run_id;
  std::string format = "text";
  double tau_value = 0.0;

  CLI::App* ingest = app.add_subcommand("ingest", "parse the corpus and draw prompt samples");

  CLI::App* run = app.add_subcommand("run", "build prompts and obtain completions per strategy");
  run->add_option("--strategies", strategies_csv, "comma-separated strategy tokens")
      ->capture_default_str();
  run->add_option("--mode", mode_override, "record, replay, or live (overrides config)");
  run->add_option("--run", run_id, "run id (defaults to a content-derived id)");

  CLI::App* ensemble =
      app.add_subcommand("ensemble", "cluster entities across runs and majority-vote labels");
  ensemble->add_option("--run", run_id, "run id")->required();
  CLI::Option* tau_opt =
      ensemble->add_option("--tau", tau_value, "similarity threshold override");

  CLI::App* evaluate = app.add_subcommand("evaluate", "score outputs against gold annotations");
  evaluate->add_option("--run", run_id, "run id")->required();

  CLI::App* report = app.add_subcommand("report", "print stored evaluation artifacts");
  report->add_option("--run", run_id, "run id")->required();
  report->add_option("--format", format, "json, text, or csv")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;  // anything but --help/--version is a usage error
  }

  try {
    medner::PipelineConfig config = medner::load_config(config_path);
    if (ingest->parsed()) {
      return medner::cmd_ingest(config, std::cout);
    }
    if (run->parsed()) {
      if (!mode_override.empty()) {
        config.mode = medner::gateway_mode_from_name(mode_override);
      }
      return medner::cmd_run(config, parse_strategy_list(strategies_csv), run_id, std::cout);
    }
    if (ensemble->parsed()) {
      std::optional<double> tau;
      if (tau_opt->count() > 0) tau = tau_value;
      return medner::cmd_ensemble(config, run_id, tau, std::cout);
    }
    if (evaluate->parsed()) {
      return medner::cmd_evaluate(config, run_id, std::cout);
    }
    if (report->parsed()) {
      return medner::cmd_report(config, run_id, format, std::cout);
    }
    return 1;
  } catch (const medner::MednerError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return medner::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
