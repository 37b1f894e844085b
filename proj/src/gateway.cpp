#include "medner/gateway.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "medner/errors.hpp"
#include "medner/hash.hpp"

namespace medner {

namespace {

using nlohmann::json;

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

json record_to_json(const CompletionRecord& record) {
  return json{{"prompt_hash", record.prompt_hash},
              {"response_text", record.response_text},
              {"latency_seconds", record.latency_seconds},
              {"request_tokens", record.request_tokens},
              {"response_tokens", record.response_tokens},
              {"timestamp", record.timestamp}};
}

CompletionRecord record_from_json(const json& j) {
  CompletionRecord record;
  record.prompt_hash = j.at("prompt_hash").get<std::string>();
  record.response_text = j.at("response_text").get<std::string>();
  record.latency_seconds = j.at("latency_seconds").get<double>();
  record.request_tokens = j.at("request_tokens").get<int>();
  record.response_tokens = j.at("response_tokens").get<int>();
  record.timestamp = j.at("timestamp").get<std::string>();
  return record;
}

}  // namespace

std::string utc_now_iso8601() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void GenerationConfig::validate() const {
  if (model_id.empty()) throw DataError("generation config needs a model id");
  if (temperature < 0.0 || temperature > 2.0) {
    throw DataError("temperature must lie in [0, 2], got " + format_real(temperature));
  }
  if (top_p <= 0.0 || top_p > 1.0) {
    throw DataError("top_p must lie in (0, 1], got " + format_real(top_p));
  }
  if (max_output_tokens <= 0) {
    throw DataError("max_output_tokens must be positive, got " +
                    std::to_string(max_output_tokens));
  }
}

std::string prompt_hash(const std::string& prompt_text, const GenerationConfig& config) {
  std::string material = prompt_text;
  material += '\x1f';
  material += config.model_id;
  material += '\x1f';
  material += format_real(config.temperature);
  material += '\x1f';
  material += format_real(config.top_p);
  material += '\x1f';
  material += std::to_string(config.max_output_tokens);
  return sha256_hex(material);
}

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::optional<CompletionRecord> CompletionCache::load(const std::string& hash) const {
  std::filesystem::path path = dir_ / hash;
  std::ifstream in(path);
  if (!in) return std::nullopt;
  json j;
  try {
    in >> j;
    CompletionRecord record = record_from_json(j);
    if (record.prompt_hash != hash) {
      throw DataError("completion cache entry " + path.string() +
                      " holds a record for a different prompt hash");
    }
    return record;
  } catch (const json::exception& e) {
    throw DataError("completion cache entry " + path.string() + " is unreadable: " + e.what());
  }
}

void CompletionCache::store(const CompletionRecord& record) {
  std::lock_guard<std::mutex> lock(write_mutex_);
  std::filesystem::path final_path = dir_ / record.prompt_hash;
  std::filesystem::path tmp_path = final_path;
  tmp_path += ".tmp";
  {
    std::ofstream out(tmp_path, std::ios::trunc);
    if (!out) throw DataError("cannot write completion cache entry " + tmp_path.string());
    out << record_to_json(record).dump(2) << '\n';
  }
  std::filesystem::rename(tmp_path, final_path);
}

bool CompletionCache::contains(const std::string& hash) const {
  return std::filesystem::exists(dir_ / hash);
}

std::string CompletionCache::digest() const { return directory_digest(dir_); }

std::string gateway_mode_name(GatewayMode mode) {
  switch (mode) {
    case GatewayMode::Record: return "record";
    case GatewayMode::Replay: return "replay";
    case GatewayMode::Live: return "live";
  }
  return "replay";
}

GatewayMode gateway_mode_from_name(const std::string& name) {
  if (name == "record") return GatewayMode::Record;
  if (name == "replay") return GatewayMode::Replay;
  if (name == "live") return GatewayMode::Live;
  throw UsageError("unknown gateway mode '" + name + "' (expected record, replay, or live)");
}

LlmGateway::LlmGateway(Transport& transport, CompletionCache& cache, GatewayOptions options)
    : transport_(transport), cache_(cache), options_(std::move(options)) {}

CompletionRecord LlmGateway::complete(const std::string& prompt_text,
                                      const GenerationConfig& config, GatewayMode mode) {
  config.validate();
  std::string hash = prompt_hash(prompt_text, config);

  if (mode == GatewayMode::Replay) {
    auto cached = cache_.load(hash);
    if (!cached) {
      throw CacheMiss("no cached completion for prompt hash " + hash +
                      " in " + cache_.dir().string());
    }
    return *cached;
  }

  if (mode == GatewayMode::Record) {
    auto cached = cache_.load(hash);
    if (cached) return *cached;
    CompletionRecord record = request(prompt_text, config, hash);
    cache_.store(record);
    return record;
  }

  // Live: always hit the endpoint, leave the cache untouched.
  return request(prompt_text, config, hash);
}

CompletionRecord LlmGateway::request(const std::string& prompt_text,
                                     const GenerationConfig& config, const std::string& hash) {
  const char* key = std::getenv(options_.api_key_env.c_str());
  if (key == nullptr || *key == '\0') {
    throw MissingCredentials("environment variable " + options_.api_key_env +
                             " is not set; refusing to issue a request");
  }

  json body{{"model", config.model_id},
            {"messages", json::array({json{{"role", "user"}, {"content", prompt_text}}})},
            {"temperature", config.temperature},
            {"top_p", config.top_p}};
  HttpHeaders headers{{"Authorization", std::string("Bearer ") + key},
                      {"Content-Type", "application/json"}};

  HttpResponse response;
  double backoff = options_.backoff_initial_seconds;
  int attempts_left = options_.transport_retries;
  auto started = std::chrono::steady_clock::now();
  for (;;) {
    try {
      response = transport_.post(options_.endpoint, body.dump(), headers);
      if (response.status == 429 || response.status == 413) {
        throw TokenLimitExceeded("endpoint rejected the request with status " +
                                 std::to_string(response.status) +
                                 "; the prompt needs trimming");
      }
      if (response.status != 200) {
        throw TransportFailure("endpoint returned status " + std::to_string(response.status));
      }
      break;
    } catch (const TokenLimitExceeded&) {
      throw;  // the caller trims and retries; nothing is persisted
    } catch (const TransportFailure&) {
      if (attempts_left-- <= 0) throw;
      std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
      backoff *= 2.0;
    }
  }
  double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  CompletionRecord record;
  record.prompt_hash = hash;
  record.latency_seconds = latency;
  record.timestamp = utc_now_iso8601();
  try {
    json j = json::parse(response.body);
    record.response_text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      record.request_tokens = j["usage"].value("prompt_tokens", -1);
      record.response_tokens = j["usage"].value("completion_tokens", -1);
    }
  } catch (const json::exception& e) {
    throw GatewayError(std::string("completion response is not valid chat-completion JSON: ") +
                       e.what());
  }
  return record;
}

StrategyRunResult run_strategy(const StrategyRunInput& input, LlmGateway& gateway,
                               GatewayMode mode) {
  StrategyRunResult result;
  SampleSet samples = input.samples;
  result.prompt = build_prompt(input.strategy, samples, input.test_document,
                               input.prompt_template, input.budget);
  try {
    result.record = gateway.complete(result.prompt, input.generation, mode);
  } catch (const TokenLimitExceeded&) {
    if (input.strategy != PromptStrategy::FewShotEntities) throw;
    samples = trim_entity_samples(samples, input.trim_fraction);
    result.prompt = build_prompt(input.strategy, samples, input.test_document,
                                 input.prompt_template, input.budget);
    result.record = gateway.complete(result.prompt, input.generation, mode);
    result.trims_applied = 1;
  }
  result.report = parse_response(strip_preamble(result.record.response_text), input.strategy);
  return result;
}

}  // namespace medner
