#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "medner/prompt.hpp"
#include "medner/response.hpp"
#include "medner/transport.hpp"
#include "medner/types.hpp"

namespace medner {

struct GenerationConfig {
  std::string model_id;
  double temperature = 0.2;
  double top_p = 1.0;
  int max_output_tokens = 1024;

  /// Throws DataError when a field is outside its documented range.
  void validate() const;
};

/// Stable content hash of (prompt text, generation settings). Identical
/// inputs hash identically across processes and machines.
std::string prompt_hash(const std::string& prompt_text, const GenerationConfig& config);

/// Current time as UTC ISO-8601 (e.g. 2026-08-14T09:30:00Z).
std::string utc_now_iso8601();

struct CompletionRecord {
  std::string prompt_hash;
  std::string response_text;
  double latency_seconds = 0.0;
  int request_tokens = -1;   // -1 when the endpoint reported no usage
  int response_tokens = -1;  // -1 when the endpoint reported no usage
  std::string timestamp;     // UTC, ISO-8601

  bool operator==(const CompletionRecord&) const = default;
};

/// One JSON record per completion, content-addressed: the filename is the
/// prompt hash itself. Writes are serialized and atomic (tmp + rename).
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir);

  std::optional<CompletionRecord> load(const std::string& hash) const;
  void store(const CompletionRecord& record);
  bool contains(const std::string& hash) const;

  /// Digest over every cached record, for run manifests.
  std::string digest() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

enum class GatewayMode { Record, Replay, Live };

std::string gateway_mode_name(GatewayMode mode);
GatewayMode gateway_mode_from_name(const std::string& name);

struct GatewayOptions {
  std::string endpoint;  // full chat-completion URL
  std::string api_key_env = "MEDNER_API_KEY";
  int transport_retries = 3;              // extra attempts after the first
  double backoff_initial_seconds = 0.2;   // doubles per retry
};

class LlmGateway {
 public:
  LlmGateway(Transport& transport, CompletionCache& cache, GatewayOptions options);

  /// Replay: cached record or CacheMiss, no network. Record: cache first,
  /// else one request whose record is persisted. Live: always a request,
  /// the cache untouched. Rate-limit and payload-too-large statuses raise
  /// TokenLimitExceeded without persisting anything.
  CompletionRecord complete(const std::string& prompt_text, const GenerationConfig& config,
                            GatewayMode mode);
  CompletionRecord complete(const PromptArtifact& prompt, const GenerationConfig& config,
                            GatewayMode mode) {
    return complete(prompt.text(), config, mode);
  }

 private:
  CompletionRecord request(const std::string& prompt_text, const GenerationConfig& config,
                           const std::string& hash);

  Transport& transport_;
  CompletionCache& cache_;
  GatewayOptions options_;
};

struct StrategyRunInput {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  SampleSet samples;
  ClinicalDocument test_document;
  PromptTemplate prompt_template;
  TokenBudget budget;
  GenerationConfig generation;
  double trim_fraction = 0.10;
};

struct StrategyRunResult {
  PromptArtifact prompt;  // the prompt actually completed (post-trim if any)
  CompletionRecord record;
  ParseReport report;
  int trims_applied = 0;  // endpoint-triggered trims, 0 or 1
};

/// build_prompt -> complete -> parse. A TokenLimitExceeded on a few-shot
/// entity prompt triggers exactly one sample trim and retry; any other
/// strategy propagates the error.
StrategyRunResult run_strategy(const StrategyRunInput& input, LlmGateway& gateway,
                               GatewayMode mode);

}  // namespace medner
