// Builds the committed completion cache out of canned response files: for
// each strategy it renders the prompt exactly as `run` would, hashes it, and
// stores the canned response under that hash with fixed latency/timestamp so
// replayed runs are reproducible byte for byte.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "medner/config.hpp"
#include "medner/errors.hpp"
#include "medner/gateway.hpp"
#include "medner/pipeline.hpp"
#include "medner/prompt.hpp"
#include "medner/types.hpp"

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw medner::DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Deterministic stand-ins for wall-clock latency, one per strategy.
const std::map<medner::PromptStrategy, double> kLatencies = {
    {medner::PromptStrategy::ZeroShot, 8.88},
    {medner::PromptStrategy::FewShotDocument, 10.52},
    {medner::PromptStrategy::FewShotSentences, 12.31},
    {medner::PromptStrategy::FewShotEntities, 9.74},
};

constexpr const char* kTimestamp = "2026-01-15T12:00:00Z";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"seed the completion cache from canned response files"};
  std::string config_path;
  std::string responses_dir;
  app.add_option("-c,--config", config_path, "pipeline config file")->required();
  app.add_option("--responses", responses_dir, "directory of <strategy>.txt response files")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    medner::PipelineConfig config = medner::load_config(config_path);
    medner::LoadedCorpus corpus = medner::load_corpus(config);
    medner::PromptTemplate tmpl = config.load_template();
    medner::CompletionCache cache(config.cache_dir / "completions");

    for (medner::PromptStrategy s : medner::strategies_in_token_order()) {
      const std::string token(medner::strategy_token(s));
      const auto response_path = std::filesystem::path(responses_dir) / (token + ".txt");
      if (!std::filesystem::exists(response_path)) {
        std::cout << token << ": no response file, skipped" << std::endl;
        continue;
      }
      medner::SampleSet samples = medner::build_sample_set(s, corpus.training, config.sampling);
      medner::PromptArtifact prompt =
          medner::build_prompt(s, samples, corpus.test.doc, tmpl, config.budget);
      const std::string prompt_text = prompt.text();
      const std::string response = read_file(response_path);

      medner::CompletionRecord record;
      record.prompt_hash = medner::prompt_hash(prompt_text, config.generation);
      record.response_text = response;
      record.latency_seconds = kLatencies.at(s);
      record.request_tokens = static_cast<int>(medner::estimate_tokens(prompt_text));
      record.response_tokens = static_cast<int>(medner::estimate_tokens(response));
      record.timestamp = kTimestamp;
      cache.store(record);
      std::cout << token << ": cached " << record.prompt_hash << std::endl;
    }
    return 0;
  } catch (const medner::MednerError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return medner::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 2;
  }
}
