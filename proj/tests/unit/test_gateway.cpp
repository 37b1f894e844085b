#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <string>

#include "corpus_gen.hpp"
#include "medner/errors.hpp"
#include "medner/gateway.hpp"
#include "mock_transport.hpp"
#include "temp_dir.hpp"

using namespace medner;
using namespace medner::testsupport;
using nlohmann::json;

namespace {

GenerationConfig test_generation() {
  GenerationConfig config;
  config.model_id = "gpt-4o";
  config.temperature = 0.2;
  config.top_p = 1.0;
  config.max_output_tokens = 1024;
  return config;
}

GatewayOptions fast_options(const std::string& key_env) {
  GatewayOptions options;
  options.endpoint = "https://api.example.invalid/v1/chat/completions";
  options.api_key_env = key_env;
  options.transport_retries = 2;
  options.backoff_initial_seconds = 0.001;
  return options;
}

/// Sets an environment variable for the lifetime of one test case.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
    ::setenv(name_.c_str(), value.c_str(), 1);
  }
  ~ScopedEnv() { ::unsetenv(name_.c_str()); }

 private:
  std::string name_;
};

}  // namespace

TEST_CASE("prompt_hash is deterministic and 64 hex characters") {
  GenerationConfig config = test_generation();
  const std::string a = prompt_hash("identify the entities", config);
  const std::string b = prompt_hash("identify the entities", config);
  CHECK(a == b);
  CHECK(a.size() == 64);
  CHECK(a.find_first_not_of("0123456789abcdef") == std::string::npos);
}

TEST_CASE("prompt_hash reacts to every input field") {
  GenerationConfig config = test_generation();
  const std::string base = prompt_hash("identify the entities", config);

  CHECK(prompt_hash("identify the entities.", config) != base);

  GenerationConfig other = config;
  other.model_id = "deepseek-r1";
  CHECK(prompt_hash("identify the entities", other) != base);

  other = config;
  other.temperature = 0.3;
  CHECK(prompt_hash("identify the entities", other) != base);

  other = config;
  other.top_p = 0.9;
  CHECK(prompt_hash("identify the entities", other) != base);

  other = config;
  other.max_output_tokens = 2048;
  CHECK(prompt_hash("identify the entities", other) != base);
}

TEST_CASE("prompt_hash separates fields instead of concatenating them blindly") {
  GenerationConfig a = test_generation();
  a.model_id = "gpt";
  GenerationConfig b = test_generation();
  b.model_id = "t";
  // Without a separator "promptgpt..." and "promptgp" + "t..." could collide.
  CHECK(prompt_hash("promptg", b) != prompt_hash("prompt", a));
}

TEST_CASE("generation config validation enforces the documented ranges") {
  GenerationConfig config = test_generation();
  CHECK_NOTHROW(config.validate());

  GenerationConfig bad = config;
  bad.model_id.clear();
  CHECK_THROWS_AS(bad.validate(), DataError);

  bad = config;
  bad.temperature = -0.1;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.temperature = 2.1;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.temperature = 0.0;
  CHECK_NOTHROW(bad.validate());
  bad.temperature = 2.0;
  CHECK_NOTHROW(bad.validate());

  bad = config;
  bad.top_p = 0.0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.top_p = 1.1;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.top_p = 1.0;
  CHECK_NOTHROW(bad.validate());

  bad = config;
  bad.max_output_tokens = 0;
  CHECK_THROWS_AS(bad.validate(), DataError);
  bad.max_output_tokens = -5;
  CHECK_THROWS_AS(bad.validate(), DataError);
}

TEST_CASE("completion cache stores and reloads records byte-faithfully") {
  ScopedTempDir tmp("medner-cache");
  CompletionCache cache(tmp.path() / "completions");

  CompletionRecord record;
  record.prompt_hash = prompt_hash("some prompt", test_generation());
  record.response_text = "aspirin | treatment\nchest pain | problem";
  record.latency_seconds = 1.25;
  record.request_tokens = 321;
  record.response_tokens = 17;
  record.timestamp = "2026-08-14T09:30:00Z";

  CHECK_FALSE(cache.contains(record.prompt_hash));
  CHECK_FALSE(cache.load(record.prompt_hash).has_value());

  cache.store(record);
  CHECK(cache.contains(record.prompt_hash));
  auto loaded = cache.load(record.prompt_hash);
  REQUIRE(loaded.has_value());
  CHECK(*loaded == record);
}

TEST_CASE("completion cache digest changes when content changes and matches across copies") {
  ScopedTempDir tmp("medner-cache");
  CompletionCache a(tmp.path() / "a");
  CompletionCache b(tmp.path() / "b");
  const std::string empty_digest = a.digest();
  CHECK(empty_digest == b.digest());

  CompletionRecord record;
  record.prompt_hash = prompt_hash("p", test_generation());
  record.response_text = "x | problem";
  record.timestamp = "2026-08-14T00:00:00Z";
  a.store(record);
  CHECK(a.digest() != empty_digest);

  b.store(record);
  CHECK(a.digest() == b.digest());
}

TEST_CASE("completion cache rejects an entry filed under the wrong hash") {
  ScopedTempDir tmp("medner-cache");
  CompletionCache cache(tmp.path() / "completions");

  CompletionRecord record;
  record.prompt_hash = prompt_hash("original prompt", test_generation());
  record.response_text = "x | test";
  record.timestamp = "2026-08-14T00:00:00Z";
  cache.store(record);

  // File the same record under a different name, as if someone renamed it.
  const std::string other = prompt_hash("another prompt", test_generation());
  std::filesystem::copy_file(cache.dir() / record.prompt_hash, cache.dir() / other);
  CHECK_THROWS_AS(cache.load(other), DataError);
}

TEST_CASE("completion cache rejects unreadable entries") {
  ScopedTempDir tmp("medner-cache");
  CompletionCache cache(tmp.path() / "completions");
  const std::string hash = prompt_hash("p", test_generation());
  std::ofstream(cache.dir() / hash) << "this is not json";
  CHECK_THROWS_AS(cache.load(hash), DataError);
}

TEST_CASE("replay mode serves from the cache and never touches the transport") {
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;  // empty script: any request would throw
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));
  GenerationConfig config = test_generation();

  CompletionRecord record;
  record.prompt_hash = prompt_hash("cached prompt", config);
  record.response_text = "insulin | treatment";
  record.timestamp = "2026-08-14T00:00:00Z";
  cache.store(record);

  // No credentials needed for replay.
  CompletionRecord served = gateway.complete("cached prompt", config, GatewayMode::Replay);
  CHECK(served == record);
  CHECK(transport.requests.empty());
}

TEST_CASE("replay mode raises a cache miss for an unknown prompt") {
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  CHECK_THROWS_AS(gateway.complete("never seen", test_generation(), GatewayMode::Replay),
                  CacheMiss);
  // CacheMiss is part of the gateway error family (exit code 3).
  CHECK_THROWS_AS(gateway.complete("never seen", test_generation(), GatewayMode::Replay),
                  GatewayError);
  CHECK(transport.requests.empty());
}

TEST_CASE("record mode issues one request, persists it, and is idempotent") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200, completion_body("aspirin | treatment", 321, 17));
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));
  GenerationConfig config = test_generation();

  CompletionRecord first = gateway.complete("new prompt", config, GatewayMode::Record);
  CHECK(first.prompt_hash == prompt_hash("new prompt", config));
  CHECK(first.response_text == "aspirin | treatment");
  CHECK(first.request_tokens == 321);
  CHECK(first.response_tokens == 17);
  CHECK(first.latency_seconds >= 0.0);
  CHECK_FALSE(first.timestamp.empty());
  CHECK(cache.contains(first.prompt_hash));
  CHECK(transport.requests.size() == 1);

  // Second call is a cache hit: no further request, identical record.
  CompletionRecord second = gateway.complete("new prompt", config, GatewayMode::Record);
  CHECK(second == first);
  CHECK(transport.requests.size() == 1);
}

TEST_CASE("the request carries the chat-completion payload and bearer credentials") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200, completion_body("x | problem"));
  GatewayOptions options = fast_options("MEDNER_GATEWAY_TEST_KEY");
  LlmGateway gateway(transport, cache, options);
  GenerationConfig config = test_generation();
  config.temperature = 0.7;
  config.top_p = 0.95;

  gateway.complete("identify entities in this note", config, GatewayMode::Live);

  REQUIRE(transport.requests.size() == 1);
  const auto& request = transport.requests[0];
  CHECK(request.url == options.endpoint);

  json body = json::parse(request.body);
  CHECK(body.at("model") == "gpt-4o");
  CHECK(body.at("temperature") == 0.7);
  CHECK(body.at("top_p") == 0.95);
  REQUIRE(body.at("messages").size() == 1);
  CHECK(body.at("messages")[0].at("role") == "user");
  CHECK(body.at("messages")[0].at("content") == "identify entities in this note");

  bool saw_auth = false;
  bool saw_content_type = false;
  for (const auto& [name, value] : request.headers) {
    if (name == "Authorization") {
      saw_auth = true;
      CHECK(value == "Bearer sk-test");
    }
    if (name == "Content-Type") {
      saw_content_type = true;
      CHECK(value == "application/json");
    }
  }
  CHECK(saw_auth);
  CHECK(saw_content_type);
}

TEST_CASE("live mode always issues a request and leaves the cache untouched") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200, completion_body("first | problem"));
  transport.enqueue(200, completion_body("second | problem"));
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));
  GenerationConfig config = test_generation();

  CompletionRecord first = gateway.complete("same prompt", config, GatewayMode::Live);
  CompletionRecord second = gateway.complete("same prompt", config, GatewayMode::Live);
  CHECK(first.response_text == "first | problem");
  CHECK(second.response_text == "second | problem");
  CHECK(transport.requests.size() == 2);
  CHECK_FALSE(cache.contains(prompt_hash("same prompt", config)));
}

TEST_CASE("missing or empty credentials abort before any request is sent") {
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200, completion_body("x | problem"));

  ::unsetenv("MEDNER_GATEWAY_TEST_ABSENT");
  LlmGateway absent(transport, cache, fast_options("MEDNER_GATEWAY_TEST_ABSENT"));
  CHECK_THROWS_AS(absent.complete("p", test_generation(), GatewayMode::Record),
                  MissingCredentials);

  ScopedEnv key("MEDNER_GATEWAY_TEST_EMPTY", "");
  LlmGateway empty(transport, cache, fast_options("MEDNER_GATEWAY_TEST_EMPTY"));
  CHECK_THROWS_AS(empty.complete("p", test_generation(), GatewayMode::Live),
                  MissingCredentials);

  CHECK(transport.requests.empty());
  CHECK_FALSE(cache.contains(prompt_hash("p", test_generation())));
}

TEST_CASE("rate-limit and payload-too-large statuses raise a token-limit error without retry") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  for (int status : {429, 413}) {
    CAPTURE(status);
    ScopedTempDir tmp("medner-gateway");
    CompletionCache cache(tmp.path() / "completions");
    MockTransport transport;
    transport.enqueue(status, "{\"error\":\"too large\"}");
    LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

    CHECK_THROWS_AS(gateway.complete("huge prompt", test_generation(), GatewayMode::Record),
                    TokenLimitExceeded);
    CHECK(transport.requests.size() == 1);  // no retry loop for token limits
    CHECK_FALSE(cache.contains(prompt_hash("huge prompt", test_generation())));
  }
}

TEST_CASE("transient server errors are retried until a success") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(500, "oops");
  transport.enqueue(503, "still warming up");
  transport.enqueue(200, completion_body("x | test"));
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  CompletionRecord record =
      gateway.complete("flaky prompt", test_generation(), GatewayMode::Record);
  CHECK(record.response_text == "x | test");
  CHECK(transport.requests.size() == 3);
  CHECK(cache.contains(record.prompt_hash));
}

TEST_CASE("exhausted retries surface the transport failure") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  for (int i = 0; i < 3; ++i) transport.enqueue(500, "oops");
  GatewayOptions options = fast_options("MEDNER_GATEWAY_TEST_KEY");
  options.transport_retries = 2;  // first attempt + two retries
  LlmGateway gateway(transport, cache, options);

  CHECK_THROWS_AS(gateway.complete("doomed prompt", test_generation(), GatewayMode::Record),
                  TransportFailure);
  CHECK(transport.requests.size() == 3);
  CHECK_FALSE(cache.contains(prompt_hash("doomed prompt", test_generation())));
}

TEST_CASE("a response without usage yields unknown token counts") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200,
                    R"({"choices":[{"message":{"role":"assistant","content":"x | problem"}}]})");
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  CompletionRecord record = gateway.complete("p", test_generation(), GatewayMode::Live);
  CHECK(record.request_tokens == -1);
  CHECK(record.response_tokens == -1);
}

TEST_CASE("a body that is not chat-completion JSON is a gateway error") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");

  MockTransport not_json;
  not_json.enqueue(200, "<html>gateway timeout page</html>");
  LlmGateway g1(not_json, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));
  CHECK_THROWS_AS(g1.complete("p", test_generation(), GatewayMode::Live), GatewayError);

  MockTransport no_choices;
  no_choices.enqueue(200, R"({"object":"chat.completion","choices":[]})");
  LlmGateway g2(no_choices, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));
  CHECK_THROWS_AS(g2.complete("p", test_generation(), GatewayMode::Live), GatewayError);
}

TEST_CASE("gateway mode names round-trip and unknown names are usage errors") {
  for (GatewayMode mode : {GatewayMode::Record, GatewayMode::Replay, GatewayMode::Live}) {
    CHECK(gateway_mode_from_name(gateway_mode_name(mode)) == mode);
  }
  CHECK_THROWS_AS(gateway_mode_from_name("offline"), UsageError);
}

namespace {

/// Few-shot entity inputs with `per_label` samples per category.
StrategyRunInput entity_run_input(int per_label) {
  StrategyRunInput input;
  input.strategy = PromptStrategy::FewShotEntities;
  input.samples.strategy = PromptStrategy::FewShotEntities;
  for (EntityLabel label : kGoldLabels) {
    std::vector<std::string> items;
    for (int i = 0; i < per_label; ++i) {
      items.push_back(std::string(label_name(label)) + " item " + std::to_string(i));
    }
    input.samples.entities[label] = items;
  }
  input.test_document.doc_id = "test-doc";
  input.test_document.lines = {"Patient reports chest pain.", "Started aspirin."};
  input.prompt_template = PromptTemplate::builtin_default();
  input.generation = test_generation();
  return input;
}

}  // namespace

TEST_CASE("run_strategy completes and parses a response end to end") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(200, completion_body("chest pain | problem\\naspirin | treatment"));
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  StrategyRunInput input;
  input.strategy = PromptStrategy::ZeroShot;
  input.samples.strategy = PromptStrategy::ZeroShot;
  input.test_document.doc_id = "test-doc";
  input.test_document.lines = {"Patient reports chest pain.", "Started aspirin."};
  input.prompt_template = PromptTemplate::builtin_default();
  input.generation = test_generation();

  StrategyRunResult result = run_strategy(input, gateway, GatewayMode::Record);
  CHECK(result.trims_applied == 0);
  CHECK(result.prompt.strategy == PromptStrategy::ZeroShot);
  REQUIRE(result.report.entities.size() == 2);
  CHECK(result.report.entities[0].text == "chest pain");
  CHECK(result.report.entities[0].label == EntityLabel::Problem);
  CHECK(result.report.entities[1].text == "aspirin");
  CHECK(result.report.entities[1].label == EntityLabel::Treatment);
  CHECK(cache.contains(result.record.prompt_hash));
}

TEST_CASE("an endpoint token limit triggers exactly one trim for entity prompts") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(429, "too many tokens");
  transport.enqueue(200, completion_body("aspirin | treatment"));
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  StrategyRunInput input = entity_run_input(10);
  StrategyRunResult result = run_strategy(input, gateway, GatewayMode::Record);

  CHECK(result.trims_applied == 1);
  REQUIRE(transport.requests.size() == 2);

  // The retried prompt dropped ceil(10%) = 1 sample per category. Count
  // inside the sample fences; the fixed sections carry example tags too.
  json retried = json::parse(transport.requests[1].body);
  const std::string prompt_text = retried.at("messages")[0].at("content").get<std::string>();
  const std::size_t fence_open = prompt_text.find("\"\"\"");
  const std::size_t fence_close = prompt_text.rfind("\"\"\"");
  REQUIRE(fence_open != std::string::npos);
  REQUIRE(fence_close > fence_open);
  const std::string block = prompt_text.substr(fence_open, fence_close - fence_open);
  CHECK(count_tag(block, "problem") == 9);
  CHECK(count_tag(block, "test") == 9);
  CHECK(count_tag(block, "treatment") == 9);
  CHECK(prompt_text.find("problem item 9") == std::string::npos);
  CHECK(prompt_text.find("problem item 8") != std::string::npos);

  // Only the successful (trimmed) prompt is cached.
  CHECK(cache.contains(result.record.prompt_hash));
  json original = json::parse(transport.requests[0].body);
  const std::string original_text = original.at("messages")[0].at("content").get<std::string>();
  CHECK_FALSE(cache.contains(prompt_hash(original_text, input.generation)));
}

TEST_CASE("a token limit on a non-entity prompt propagates without trimming") {
  ScopedEnv key("MEDNER_GATEWAY_TEST_KEY", "sk-test");
  ScopedTempDir tmp("medner-gateway");
  CompletionCache cache(tmp.path() / "completions");
  MockTransport transport;
  transport.enqueue(429, "too many tokens");
  LlmGateway gateway(transport, cache, fast_options("MEDNER_GATEWAY_TEST_KEY"));

  StrategyRunInput input;
  input.strategy = PromptStrategy::ZeroShot;
  input.samples.strategy = PromptStrategy::ZeroShot;
  input.test_document.doc_id = "test-doc";
  input.test_document.lines = {"Patient reports chest pain."};
  input.prompt_template = PromptTemplate::builtin_default();
  input.generation = test_generation();

  CHECK_THROWS_AS(run_strategy(input, gateway, GatewayMode::Record), TokenLimitExceeded);
  CHECK(transport.requests.size() == 1);
}
