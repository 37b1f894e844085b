#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "medner/corpus.hpp"
#include "medner/gateway.hpp"
#include "medner/prompt.hpp"
#include "medner/types.hpp"

namespace medner {

/// Everything a pipeline run needs, loaded from a flat key=value file.
/// Relative paths are resolved against the config file's directory. Secrets
/// never appear here — API keys come from environment variables only.
struct PipelineConfig {
  std::filesystem::path documents_dir;
  std::filesystem::path concepts_dir;
  std::string test_doc_id;

  SamplingConfig sampling;  // test_doc_id mirrored in during load

  std::filesystem::path template_path;  // empty -> compiled-in default
  TokenBudget budget;

  double tau = 0.92;
  std::vector<PromptStrategy> ensemble_strategies = {
      PromptStrategy::FewShotDocument, PromptStrategy::FewShotSentences,
      PromptStrategy::FewShotEntities};

  GatewayOptions gateway;
  GenerationConfig generation;
  GatewayMode mode = GatewayMode::Replay;

  std::string embedding_provider = "local";  // "local" or "remote"
  std::string embedding_endpoint;
  std::string embedding_api_key_env = "MEDNER_EMBED_API_KEY";
  int embedding_dimension = 512;

  std::filesystem::path cache_dir;   // completions/ and embeddings/ live here
  std::filesystem::path output_dir;  // runs are written under here

  PromptTemplate load_template() const;
};

/// Parses and validates a config file. Malformed lines, unknown keys, and
/// out-of-range values raise UsageError; referenced input paths that do not
/// exist raise DataError.
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace medner
