#include "medner/config.hpp"

#include <fstream>
#include <limits>
#include <map>
#include <stdexcept>

#include "medner/errors.hpp"
#include "medner/text.hpp"

namespace medner {

namespace {

long parse_integer(const std::string& key, const std::string& value, long min, long max) {
  std::size_t consumed = 0;
  long parsed = 0;
  try {
    parsed = std::stol(value, &consumed);
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " needs an integer, got '" + value + "'");
  }
  if (consumed != value.size()) {
    throw UsageError("config key " + key + " needs an integer, got '" + value + "'");
  }
  if (parsed < min || parsed > max) {
    throw UsageError("config key " + key + " must lie in [" + std::to_string(min) + ", " +
                     std::to_string(max) + "], got " + value);
  }
  return parsed;
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double parsed = 0.0;
  try {
    parsed = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw UsageError("config key " + key + " needs a number, got '" + value + "'");
  }
  if (consumed != value.size()) {
    throw UsageError("config key " + key + " needs a number, got '" + value + "'");
  }
  return parsed;
}

std::vector<std::string> parse_id_list(const std::string& value) {
  std::vector<std::string> out;
  for (const std::string& item : split_csv(value)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<PromptStrategy> parse_strategies(const std::string& key, const std::string& value) {
  std::vector<PromptStrategy> out;
  for (const std::string& token : split_csv(value)) {
    auto parsed = strategy_from_token(token);
    if (!parsed) {
      throw UsageError("config key " + key + " holds unknown strategy token '" + token + "'");
    }
    out.push_back(*parsed);
  }
  if (out.empty()) throw UsageError("config key " + key + " needs at least one strategy");
  return out;
}

}  // namespace

PromptTemplate PipelineConfig::load_template() const {
  if (template_path.empty()) return PromptTemplate::builtin_default();
  return PromptTemplate::load(template_path);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path.string());
  std::filesystem::path base = path.has_parent_path() ? path.parent_path()
                                                      : std::filesystem::path(".");
  auto resolve = [&base](const std::string& value) {
    std::filesystem::path p(value);
    return p.is_absolute() ? p : base / p;
  };

  std::map<std::string, std::string> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) +
                       " is not key = value: '" + stripped + "'");
    }
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw UsageError("config line " + std::to_string(line_no) + " has an empty key");
    }
    if (!entries.emplace(key, value).second) {
      throw UsageError("config key " + key + " appears twice");
    }
  }

  PipelineConfig config;
  config.cache_dir = base / "cache";
  config.output_dir = base / "runs";

  for (const auto& [key, value] : entries) {
    if (key == "corpus.documents_dir") {
      config.documents_dir = resolve(value);
    } else if (key == "corpus.concepts_dir") {
      config.concepts_dir = resolve(value);
    } else if (key == "corpus.test_doc_id") {
      config.test_doc_id = value;
    } else if (key == "sample.seed") {
      config.sampling.seed = static_cast<std::uint64_t>(
          parse_integer(key, value, 0, std::numeric_limits<long>::max()));
    } else if (key == "sample.document_count") {
      config.sampling.document_count = static_cast<int>(parse_integer(key, value, 1, 1000000));
    } else if (key == "sample.sentence_count") {
      config.sampling.sentence_count = static_cast<int>(parse_integer(key, value, 1, 1000000));
    } else if (key == "sample.sentence_doc_count") {
      config.sampling.sentence_doc_count =
          static_cast<int>(parse_integer(key, value, 1, 1000000));
    } else if (key == "sample.document_pool") {
      config.sampling.document_pool = parse_id_list(value);
    } else if (key == "sample.sentence_doc_pool") {
      config.sampling.sentence_doc_pool = parse_id_list(value);
    } else if (key == "sample.entity_doc_pool") {
      config.sampling.entity_doc_pool = parse_id_list(value);
    } else if (key == "template.path") {
      config.template_path = resolve(value);
    } else if (key == "budget.max_tokens") {
      config.budget.max_tokens = static_cast<std::size_t>(
          parse_integer(key, value, 0, std::numeric_limits<long>::max()));
    } else if (key == "trim.fraction") {
      config.budget.trim_fraction = parse_real(key, value);
      if (config.budget.trim_fraction <= 0.0 || config.budget.trim_fraction >= 1.0) {
        throw UsageError("config key trim.fraction must lie in (0, 1), got " + value);
      }
    } else if (key == "ensemble.tau") {
      config.tau = parse_real(key, value);
      if (config.tau <= 0.0 || config.tau > 1.0) {
        throw UsageError("config key ensemble.tau must lie in (0, 1], got " + value);
      }
    } else if (key == "ensemble.strategies") {
      config.ensemble_strategies = parse_strategies(key, value);
    } else if (key == "gateway.endpoint") {
      config.gateway.endpoint = value;
    } else if (key == "gateway.api_key_env") {
      config.gateway.api_key_env = value;
    } else if (key == "gateway.retries") {
      config.gateway.transport_retries = static_cast<int>(parse_integer(key, value, 0, 100));
    } else if (key == "gateway.backoff_seconds") {
      config.gateway.backoff_initial_seconds = parse_real(key, value);
      if (config.gateway.backoff_initial_seconds < 0.0) {
        throw UsageError("config key gateway.backoff_seconds must be non-negative, got " + value);
      }
    } else if (key == "gateway.model_id") {
      config.generation.model_id = value;
    } else if (key == "gateway.temperature") {
      config.generation.temperature = parse_real(key, value);
    } else if (key == "gateway.top_p") {
      config.generation.top_p = parse_real(key, value);
    } else if (key == "gateway.max_output_tokens") {
      config.generation.max_output_tokens =
          static_cast<int>(parse_integer(key, value, 1, 10000000));
    } else if (key == "gateway.mode") {
      try {
        config.mode = gateway_mode_from_name(value);
      } catch (const MednerError&) {
        throw UsageError("config key gateway.mode must be record, replay, or live, got '" +
                         value + "'");
      }
    } else if (key == "embeddings.provider") {
      if (value != "local" && value != "remote") {
        throw UsageError("config key embeddings.provider must be local or remote, got '" +
                         value + "'");
      }
      config.embedding_provider = value;
    } else if (key == "embeddings.endpoint") {
      config.embedding_endpoint = value;
    } else if (key == "embeddings.api_key_env") {
      config.embedding_api_key_env = value;
    } else if (key == "embeddings.dimension") {
      config.embedding_dimension = static_cast<int>(parse_integer(key, value, 1, 100000));
    } else if (key == "cache.dir") {
      config.cache_dir = resolve(value);
    } else if (key == "output.dir") {
      config.output_dir = resolve(value);
    } else {
      throw UsageError("unknown config key '" + key + "'");
    }
  }

  if (config.documents_dir.empty()) throw UsageError("config is missing corpus.documents_dir");
  if (config.concepts_dir.empty()) throw UsageError("config is missing corpus.concepts_dir");
  if (config.test_doc_id.empty()) throw UsageError("config is missing corpus.test_doc_id");
  config.sampling.test_doc_id = config.test_doc_id;

  if (!std::filesystem::is_directory(config.documents_dir)) {
    throw DataError("corpus.documents_dir does not exist: " + config.documents_dir.string());
  }
  if (!std::filesystem::is_directory(config.concepts_dir)) {
    throw DataError("corpus.concepts_dir does not exist: " + config.concepts_dir.string());
  }
  if (!config.template_path.empty() && !std::filesystem::is_regular_file(config.template_path)) {
    throw DataError("template.path does not exist: " + config.template_path.string());
  }
  if (config.embedding_provider == "remote" && config.embedding_endpoint.empty()) {
    throw UsageError("embeddings.provider = remote needs embeddings.endpoint");
  }

  // Surfaces range errors at load time rather than mid-run; they are config
  // mistakes here, not data corruption.
  if (!config.generation.model_id.empty()) {
    try {
      config.generation.validate();
    } catch (const MednerError& e) {
      throw UsageError(e.what());
    }
  }

  return config;
}

}  // namespace medner
