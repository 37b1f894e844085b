#include "medner/manifest.hpp"

#include <json.hpp>

#include <fstream>

#include "medner/errors.hpp"

namespace medner {

namespace {

using nlohmann::json;

PromptStrategy required_strategy(const std::string& token) {
  auto parsed = strategy_from_token(token);
  if (!parsed) throw DataError("run manifest names unknown strategy token '" + token + "'");
  return *parsed;
}

}  // namespace

std::string RunManifest::to_json() const {
  json strategies_json = json::array();
  for (PromptStrategy s : strategies) strategies_json.push_back(strategy_token(s));
  json trims_json = json::array();
  for (const TrimEvent& t : trim_events) {
    trims_json.push_back(json{{"strategy", strategy_token(t.strategy)},
                              {"trims_applied", t.trims_applied}});
  }
  json j{{"run_id", run_id},
         {"template_version", template_version},
         {"strategies", strategies_json},
         {"generation",
          json{{"model_id", generation.model_id},
               {"temperature", generation.temperature},
               {"top_p", generation.top_p},
               {"max_output_tokens", generation.max_output_tokens}}},
         {"tau", tau},
         {"seed", seed},
         {"mode", mode},
         {"embedding_provider_id", embedding_provider_id},
         {"completion_cache_digest", completion_cache_digest},
         {"embedding_cache_digest", embedding_cache_digest},
         {"timestamp", timestamp},
         {"trim_events", trims_json}};
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  RunManifest m;
  try {
    json j = json::parse(text);
    m.run_id = j.at("run_id").get<std::string>();
    m.template_version = j.at("template_version").get<std::string>();
    for (const auto& token : j.at("strategies")) {
      m.strategies.push_back(required_strategy(token.get<std::string>()));
    }
    const json& g = j.at("generation");
    m.generation.model_id = g.at("model_id").get<std::string>();
    m.generation.temperature = g.at("temperature").get<double>();
    m.generation.top_p = g.at("top_p").get<double>();
    m.generation.max_output_tokens = g.at("max_output_tokens").get<int>();
    m.tau = j.at("tau").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.mode = j.at("mode").get<std::string>();
    m.embedding_provider_id = j.at("embedding_provider_id").get<std::string>();
    m.completion_cache_digest = j.at("completion_cache_digest").get<std::string>();
    m.embedding_cache_digest = j.at("embedding_cache_digest").get<std::string>();
    m.timestamp = j.at("timestamp").get<std::string>();
    for (const auto& t : j.at("trim_events")) {
      m.trim_events.push_back(TrimEvent{required_strategy(t.at("strategy").get<std::string>()),
                                        t.at("trims_applied").get<int>()});
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("run manifest is malformed: ") + e.what());
  }
  return m;
}

void RunManifest::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write run manifest " + path.string());
  out << to_json();
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw MissingRuns("no run manifest at " + path.string() + "; run the 'run' command first");
  }
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

}  // namespace medner
