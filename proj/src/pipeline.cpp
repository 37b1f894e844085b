#include "medner/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <future>
#include <ostream>
#include <sstream>

#include "medner/ensemble.hpp"
#include "medner/errors.hpp"
#include "medner/evaluation.hpp"
#include "medner/gateway.hpp"
#include "medner/hash.hpp"
#include "medner/prompt.hpp"
#include "medner/response.hpp"
#include "medner/text.hpp"
#include "medner/transport.hpp"

namespace medner {

namespace {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
}

std::string format4(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

// ---- corpus cache (the artifact `ingest` writes) ----

json gold_to_json(const GoldEntity& g) {
  return json{{"text", g.text},
              {"label", std::string(label_name(g.label))},
              {"line", g.line},
              {"token_start", g.token_start},
              {"token_end", g.token_end}};
}

GoldEntity gold_from_json(const json& j, const std::string& doc_id) {
  GoldEntity g;
  g.text = j.at("text").get<std::string>();
  auto label = label_from_string(j.at("label").get<std::string>());
  if (!label) {
    throw DataError("corpus cache holds unknown label '" + j.at("label").get<std::string>() + "'");
  }
  g.label = *label;
  g.doc_id = doc_id;
  g.line = j.at("line").get<int>();
  g.token_start = j.at("token_start").get<int>();
  g.token_end = j.at("token_end").get<int>();
  return g;
}

json record_to_json(const DocumentRecord& record) {
  json gold = json::array();
  for (const GoldEntity& g : record.gold) gold.push_back(gold_to_json(g));
  return json{{"doc_id", record.doc.doc_id}, {"lines", record.doc.lines}, {"gold", gold}};
}

DocumentRecord record_from_json(const json& j) {
  DocumentRecord record;
  record.doc.doc_id = j.at("doc_id").get<std::string>();
  record.doc.lines = j.at("lines").get<std::vector<std::string>>();
  for (const auto& g : j.at("gold")) {
    record.gold.push_back(gold_from_json(g, record.doc.doc_id));
  }
  return record;
}

// ---- entity files (one per strategy per run) ----

std::string entity_file_name(PromptStrategy strategy) {
  return "entities_" + std::string(strategy_token(strategy)) + ".json";
}

json entity_file_json(const std::string& run_id, const std::string& template_version,
                      PromptStrategy strategy, const StrategyRunResult& result) {
  json entities = json::array();
  for (const ExtractedEntity& e : result.report.entities) {
    entities.push_back(json{{"text", e.text},
                            {"raw_text", e.raw_text},
                            {"label", std::string(label_name(e.label))},
                            {"ordinal", e.ordinal}});
  }
  json malformed = json::array();
  for (const MalformedLine& m : result.report.malformed) {
    malformed.push_back(json{{"line_no", m.line_no}, {"raw_line", m.raw_line},
                             {"reason", m.reason}});
  }
  json warnings = json::array();
  for (const ParseWarning& w : result.report.warnings) {
    warnings.push_back(json{{"line_no", w.line_no}, {"message", w.message}});
  }
  return json{{"run_id", run_id},
              {"template_version", template_version},
              {"strategy", std::string(strategy_token(strategy))},
              {"trims_applied", result.trims_applied},
              {"completion",
               json{{"prompt_hash", result.record.prompt_hash},
                    {"latency_seconds", result.record.latency_seconds},
                    {"request_tokens", result.record.request_tokens},
                    {"response_tokens", result.record.response_tokens},
                    {"timestamp", result.record.timestamp}}},
              {"entities", entities},
              {"malformed", malformed},
              {"warnings", warnings},
              {"duplicate_count", result.report.duplicate_count},
              {"blank_count", result.report.blank_count}};
}

struct EntityFile {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::vector<ExtractedEntity> entities;
  CompletionRecord record;
  int trims_applied = 0;
};

EntityFile load_entity_file(const std::filesystem::path& path, const std::string& run_id,
                            const std::string& template_version, PromptStrategy strategy) {
  EntityFile file;
  file.strategy = strategy;
  try {
    json j = json::parse(read_file(path));
    if (j.at("run_id").get<std::string>() != run_id) {
      throw DataError("entity file " + path.string() + " belongs to run '" +
                      j.at("run_id").get<std::string>() + "', not '" + run_id +
                      "'; refusing to mix runs");
    }
    if (j.at("template_version").get<std::string>() != template_version) {
      throw DataError("entity file " + path.string() + " was produced with template version '" +
                      j.at("template_version").get<std::string>() + "', expected '" +
                      template_version + "'");
    }
    int ordinal_fallback = 0;
    for (const auto& e : j.at("entities")) {
      ExtractedEntity entity;
      entity.text = e.at("text").get<std::string>();
      entity.raw_text = e.at("raw_text").get<std::string>();
      auto label = label_from_string(e.at("label").get<std::string>());
      entity.label = label.value_or(EntityLabel::Unknown);
      entity.source = strategy;
      entity.ordinal = e.value("ordinal", ordinal_fallback);
      ++ordinal_fallback;
      file.entities.push_back(std::move(entity));
    }
    const json& c = j.at("completion");
    file.record.prompt_hash = c.at("prompt_hash").get<std::string>();
    file.record.latency_seconds = c.at("latency_seconds").get<double>();
    file.record.request_tokens = c.at("request_tokens").get<int>();
    file.record.response_tokens = c.at("response_tokens").get<int>();
    file.record.timestamp = c.at("timestamp").get<std::string>();
    file.trims_applied = j.at("trims_applied").get<int>();
  } catch (const json::exception& e) {
    throw DataError("entity file " + path.string() + " is malformed: " + e.what());
  }
  return file;
}

int count_occurrences(const std::string& text, const std::string& needle) {
  int count = 0;
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    ++count;
    pos += needle.size();
  }
  return count;
}

std::string label_counts_phrase(int problems, int tests, int treatments) {
  return std::to_string(problems) + " Problem, " + std::to_string(tests) + " Test, " +
         std::to_string(treatments) + " Treatment";
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

void pad_to(std::string& line, std::size_t column) {
  while (line.size() < column) line.push_back(' ');
}

std::string right_align(const std::string& value, std::size_t width) {
  if (value.size() >= width) return value;
  return std::string(width - value.size(), ' ') + value;
}

// "problem" -> "Problem" for human-facing tables.
std::string display_label(EntityLabel label) {
  std::string name(label_name(label));
  if (!name.empty()) name[0] = static_cast<char>(std::toupper(name[0]));
  return name;
}

}  // namespace

LoadedCorpus load_corpus(const PipelineConfig& config) {
  std::vector<std::filesystem::path> doc_files;
  for (const auto& entry : std::filesystem::directory_iterator(config.documents_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      doc_files.push_back(entry.path());
    }
  }
  std::sort(doc_files.begin(), doc_files.end());
  if (doc_files.empty()) {
    throw InsufficientCorpus("no .txt documents in " + config.documents_dir.string());
  }

  LoadedCorpus corpus;
  bool test_seen = false;
  std::string problems;
  for (const auto& path : doc_files) {
    DocumentRecord record;
    record.doc.doc_id = path.stem().string();
    record.doc.lines = split_lines(read_file(path));

    const auto con_path = config.concepts_dir / (record.doc.doc_id + ".con");
    if (std::filesystem::exists(con_path)) {
      ConceptParseResult parsed = parse_concept_text(read_file(con_path), record.doc.doc_id);
      for (const MalformedAnnotation& err : parsed.errors) {
        problems += con_path.string() + ":" + std::to_string(err.line_no) + ": " + err.reason +
                    ": " + err.raw_line + "\n";
      }
      for (const GoldEntity& entity : parsed.entities) {
        if (auto reason = validate_against_document(record.doc, entity)) {
          problems += con_path.string() + ": annotation on line " + std::to_string(entity.line) +
                      ": " + *reason + "\n";
        }
      }
      record.gold = std::move(parsed.entities);
    }

    if (record.doc.doc_id == config.test_doc_id) {
      corpus.test = std::move(record);
      test_seen = true;
    } else {
      corpus.training.push_back(std::move(record));
    }
  }
  if (!problems.empty()) {
    throw DataError("corpus contains invalid annotations:\n" + problems);
  }
  if (!test_seen) {
    throw DataError("test document '" + config.test_doc_id + "' not found in " +
                    config.documents_dir.string());
  }

  auto check_pool = [&](const std::vector<std::string>& pool, const char* what) {
    for (const std::string& id : pool) {
      if (id == config.test_doc_id) {
        throw TestLeakage(std::string(what) + " pool includes the test document '" + id + "'");
      }
    }
  };
  check_pool(config.sampling.document_pool, "document");
  check_pool(config.sampling.sentence_doc_pool, "sentence");
  check_pool(config.sampling.entity_doc_pool, "entity");
  return corpus;
}

void save_corpus_cache(const LoadedCorpus& corpus, const std::filesystem::path& path) {
  json docs = json::array();
  for (const DocumentRecord& record : corpus.training) docs.push_back(record_to_json(record));
  json j{{"documents", docs}, {"test", record_to_json(corpus.test)}};
  write_file(path, j.dump(2) + "\n");
}

LoadedCorpus load_corpus_cache(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw DataError("no parsed corpus at " + path.string() + "; run 'ingest' first");
  }
  try {
    json j = json::parse(read_file(path));
    LoadedCorpus corpus;
    for (const auto& d : j.at("documents")) corpus.training.push_back(record_from_json(d));
    corpus.test = record_from_json(j.at("test"));
    return corpus;
  } catch (const json::exception& e) {
    throw DataError("corpus cache " + path.string() + " is malformed: " + e.what());
  }
}

std::filesystem::path corpus_cache_path(const PipelineConfig& config) {
  return config.output_dir / "corpus.json";
}

std::filesystem::path run_dir(const PipelineConfig& config, const std::string& run_id) {
  return config.output_dir / run_id;
}

std::string derive_run_id(const PipelineConfig& config,
                          const std::vector<PromptStrategy>& strategies) {
  // Canonicalize to token order so any request ordering names the same run.
  std::string material;
  for (PromptStrategy s : strategies_in_token_order()) {
    if (std::find(strategies.begin(), strategies.end(), s) != strategies.end()) {
      material += strategy_token(s);
      material += ',';
    }
  }
  material += '\x1f';
  material += gateway_mode_name(config.mode);
  material += '\x1f';
  material += config.generation.model_id;
  material += '\x1f';
  material += std::to_string(config.sampling.seed);
  material += '\x1f';
  material += format4(config.tau);
  material += '\x1f';
  material += config.load_template().version();
  material += '\x1f';
  material += config.test_doc_id;
  return "run-" + sha256_hex(material).substr(0, 12);
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const PipelineConfig& config) {
  std::shared_ptr<EmbeddingProvider> inner;
  if (config.embedding_provider == "remote") {
    inner = std::make_shared<RemoteEmbeddingProvider>(
        std::make_shared<HttplibTransport>(), config.embedding_endpoint,
        "remote-" + std::to_string(config.embedding_dimension) + "d",
        static_cast<std::size_t>(config.embedding_dimension), config.embedding_api_key_env);
  } else {
    inner = std::make_shared<LocalTrigramProvider>();
  }
  auto cache = std::make_shared<EmbeddingCache>(config.cache_dir / "embeddings");
  return std::make_unique<CachingProvider>(std::move(inner), std::move(cache));
}

int cmd_ingest(const PipelineConfig& config, std::ostream& out) {
  LoadedCorpus corpus = load_corpus(config);
  out << "corpus: " << corpus.training.size() << " training documents + test document '"
      << config.test_doc_id << "'\n";

  auto tag_counts_line = [](const std::vector<std::string>& tagged_lines) {
    int problems = 0, tests = 0, treatments = 0;
    for (const std::string& line : tagged_lines) {
      problems += count_occurrences(line, "<problem>");
      tests += count_occurrences(line, "<test>");
      treatments += count_occurrences(line, "<treatment>");
    }
    return label_counts_phrase(problems, tests, treatments);
  };

  for (PromptStrategy s : kAllStrategies) {
    SampleSet samples = build_sample_set(s, corpus.training, config.sampling);
    const std::string token(strategy_token(s));
    switch (s) {
      case PromptStrategy::ZeroShot:
        out << token << ": no samples (instructions only)\n";
        break;
      case PromptStrategy::FewShotDocument: {
        std::vector<std::string> all_lines;
        for (const TaggedDocument& doc : samples.documents) {
          all_lines.insert(all_lines.end(), doc.lines.begin(), doc.lines.end());
        }
        out << token << ": " << samples.documents.size() << " document(s), "
            << tag_counts_line(all_lines) << "\n";
        break;
      }
      case PromptStrategy::FewShotSentences: {
        std::vector<std::string> all_lines;
        for (const TaggedSentence& sentence : samples.sentences) {
          all_lines.push_back(sentence.text);
        }
        out << token << ": " << samples.sentences.size() << " sentence(s), "
            << tag_counts_line(all_lines) << "\n";
        break;
      }
      case PromptStrategy::FewShotEntities: {
        auto count_for = [&samples](EntityLabel label) {
          auto it = samples.entities.find(label);
          return it == samples.entities.end() ? 0 : static_cast<int>(it->second.size());
        };
        out << token << ": "
            << label_counts_phrase(count_for(EntityLabel::Problem), count_for(EntityLabel::Test),
                                   count_for(EntityLabel::Treatment))
            << " (distinct, normalized)\n";
        break;
      }
    }
  }

  auto test_counts = mention_counts(corpus.test.gold);
  out << "test sample: "
      << label_counts_phrase(test_counts[EntityLabel::Problem], test_counts[EntityLabel::Test],
                             test_counts[EntityLabel::Treatment])
      << "\n";

  std::filesystem::create_directories(config.output_dir);
  save_corpus_cache(corpus, corpus_cache_path(config));
  out << "corpus cache: " << corpus_cache_path(config).string() << "\n";
  return 0;
}

int cmd_run(const PipelineConfig& config, const std::vector<PromptStrategy>& requested,
            const std::string& run_id_override, std::ostream& out) {
  LoadedCorpus corpus = load_corpus_cache(corpus_cache_path(config));

  // dedupe and fix the order: assembly is by strategy name, never completion time
  std::vector<PromptStrategy> strategies;
  for (PromptStrategy s : strategies_in_token_order()) {
    if (std::find(requested.begin(), requested.end(), s) != requested.end()) {
      strategies.push_back(s);
    }
  }
  if (strategies.empty()) throw UsageError("no strategies requested");

  const std::string run_id =
      run_id_override.empty() ? derive_run_id(config, strategies) : run_id_override;
  const std::filesystem::path dir = run_dir(config, run_id);
  std::filesystem::create_directories(dir);

  const PromptTemplate tmpl = config.load_template();
  CompletionCache cache(config.cache_dir / "completions");
  std::unique_ptr<Transport> transport;
  if (config.mode == GatewayMode::Replay) {
    transport = std::make_unique<FailingTransport>();  // cache gaps must not reach the network
  } else {
    transport = std::make_unique<HttplibTransport>();
  }
  LlmGateway gateway(*transport, cache, config.gateway);

  std::vector<std::future<StrategyRunResult>> futures;
  futures.reserve(strategies.size());
  for (PromptStrategy s : strategies) {
    futures.push_back(std::async(std::launch::async, [&, s]() {
      StrategyRunInput input;
      input.strategy = s;
      input.samples = build_sample_set(s, corpus.training, config.sampling);
      input.test_document = corpus.test.doc;
      input.prompt_template = tmpl;
      input.budget = config.budget;
      input.generation = config.generation;
      input.trim_fraction = config.budget.trim_fraction;
      return run_strategy(input, gateway, config.mode);
    }));
  }

  RunManifest manifest;
  std::vector<std::string> failures;
  std::string latest_record_timestamp;
  int worst_exit = 0;
  for (std::size_t i = 0; i < strategies.size(); ++i) {
    const std::string token(strategy_token(strategies[i]));
    try {
      StrategyRunResult result = futures[i].get();
      write_file(dir / entity_file_name(strategies[i]),
                 entity_file_json(run_id, tmpl.version(), strategies[i], result).dump(2) + "\n");
      manifest.strategies.push_back(strategies[i]);
      if (result.trims_applied > 0) {
        manifest.trim_events.push_back(TrimEvent{strategies[i], result.trims_applied});
      }
      latest_record_timestamp = std::max(latest_record_timestamp, result.record.timestamp);
      out << token << ": " << result.report.entities.size() << " entities ("
          << result.report.malformed.size() << " malformed, " << result.report.duplicate_count
          << " duplicates), prompt " << result.record.prompt_hash.substr(0, 12) << "\n";
    } catch (const MednerError& e) {
      failures.push_back(token + ": " + e.what());
      worst_exit = std::max(worst_exit, exit_code_for(e));
    } catch (const std::exception& e) {
      failures.push_back(token + ": " + e.what());
      worst_exit = std::max(worst_exit, 2);
    }
  }
  for (const std::string& failure : failures) out << "error: " << failure << "\n";

  if (manifest.strategies.empty()) {
    out << "run failed: no strategy produced output\n";
    return worst_exit == 0 ? 2 : worst_exit;
  }

  manifest.run_id = run_id;
  manifest.template_version = tmpl.version();
  manifest.generation = config.generation;
  manifest.tau = config.tau;
  manifest.seed = config.sampling.seed;
  manifest.mode = gateway_mode_name(config.mode);
  manifest.embedding_provider_id = make_embedding_provider(config)->id();
  manifest.completion_cache_digest = cache.digest();
  manifest.embedding_cache_digest = directory_digest(config.cache_dir / "embeddings");
  // Replayed runs reuse the recorded timestamps so the whole run directory is
  // reproducible byte for byte.
  manifest.timestamp =
      config.mode == GatewayMode::Replay ? latest_record_timestamp : utc_now_iso8601();
  manifest.save(dir / "manifest.json");
  out << "run " << run_id << ": manifest " << (dir / "manifest.json").string() << "\n";
  return worst_exit;
}

int cmd_ensemble(const PipelineConfig& config, const std::string& run_id,
                 std::optional<double> tau_override, std::ostream& out) {
  const std::filesystem::path dir = run_dir(config, run_id);
  RunManifest manifest = RunManifest::load(dir / "manifest.json");
  if (manifest.run_id != run_id) {
    throw DataError("manifest in " + dir.string() + " belongs to run '" + manifest.run_id +
                    "'; refusing to mix runs");
  }
  const double tau = tau_override.value_or(manifest.tau);
  if (tau <= 0.0 || tau > 1.0) {
    throw UsageError("tau must lie in (0, 1], got " + std::to_string(tau));
  }

  PredictionSet predictions;
  std::vector<PromptStrategy> used;
  for (PromptStrategy s : strategies_in_token_order()) {
    if (std::find(config.ensemble_strategies.begin(), config.ensemble_strategies.end(), s) ==
        config.ensemble_strategies.end()) {
      continue;
    }
    const auto path = dir / entity_file_name(s);
    if (!std::filesystem::exists(path)) continue;
    EntityFile file = load_entity_file(path, run_id, manifest.template_version, s);
    predictions.runs[s] = std::move(file.entities);
    used.push_back(s);
  }
  if (used.size() < 2) {
    throw MissingRuns("ensembling needs at least two strategy outputs for run '" + run_id +
                      "', found " + std::to_string(used.size()));
  }

  auto provider = make_embedding_provider(config);
  EnsembleResult result = run_ensemble(predictions, tau, *provider);

  json preds = json::array();
  int unknown = 0;
  for (std::size_t i = 0; i < result.predictions.size(); ++i) {
    const EnsemblePrediction& p = result.predictions[i];
    if (p.label == EntityLabel::Unknown) ++unknown;
    json members = json::array();
    for (const ClusterMember& m : result.clusters[i].members) {
      members.push_back(json{{"text", m.entity.text},
                             {"label", std::string(label_name(m.entity.label))},
                             {"source", std::string(strategy_token(m.entity.source))}});
    }
    preds.push_back(json{{"text", p.text},
                         {"label", std::string(label_name(p.label))},
                         {"support", p.support},
                         {"cluster_size", p.cluster_size},
                         {"members", members}});
  }
  json tokens = json::array();
  for (PromptStrategy s : used) tokens.push_back(std::string(strategy_token(s)));
  json j{{"run_id", run_id},
         {"template_version", manifest.template_version},
         {"tau", tau},
         {"strategies", tokens},
         {"embedding_provider_id", provider->id()},
         {"predictions", preds}};
  write_file(dir / "ensemble.json", j.dump(2) + "\n");

  const double rate =
      result.predictions.empty()
          ? 0.0
          : static_cast<double>(unknown) / static_cast<double>(result.predictions.size());
  out << "clusters: " << result.clusters.size() << ", unknown rate: " << format4(rate) << "\n";
  out << "ensemble: " << (dir / "ensemble.json").string() << "\n";
  return 0;
}

namespace {

struct EvaluationRow {
  std::string name;  // display name or "Ensemble"
  std::vector<PredictedItem> predictions;
  std::vector<MatchRecord> records;
  std::optional<ExtractionMetrics> extraction;
  std::optional<ClassificationMetrics> classification;
  std::string extraction_error;
  std::string classification_error;
};

json aggregate_to_json(const AggregateMetrics& m) {
  return json{{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

json classification_to_json(const ClassificationMetrics& m) {
  json per_label;
  for (const auto& [label, lm] : m.per_label) {
    per_label[std::string(label_name(label))] = json{{"precision", lm.precision},
                                                     {"recall", lm.recall},
                                                     {"f1", lm.f1},
                                                     {"support", lm.support},
                                                     {"zero_support", lm.zero_support}};
  }
  return json{{"per_label", per_label},
              {"macro", aggregate_to_json(m.macro)},
              {"weighted", aggregate_to_json(m.weighted)}};
}

json matches_to_json(const std::vector<MatchRecord>& records) {
  json out = json::array();
  for (const MatchRecord& r : records) {
    json item{{"predicted_text", r.predicted.text},
              {"predicted_label", std::string(label_name(r.predicted.label))}};
    if (r.gold.has_value()) {
      item["gold_text"] = r.gold->text;
      item["gold_label"] = std::string(label_name(r.gold->label));
      item["gold_line"] = r.gold->line;
      item["similarity"] = *r.similarity;
    }
    out.push_back(item);
  }
  return out;
}

std::string render_text_report(const std::string& run_id, const RunManifest& manifest,
                               int gold_total, const std::vector<EvaluationRow>& rows,
                               const TimingReport& timing) {
  std::string text;
  text += "Run " + run_id + "\n";
  text += "Template " + manifest.template_version + ", tau " + format4(manifest.tau) +
          ", model " + manifest.generation.model_id + ", gold entities " +
          std::to_string(gold_total) + "\n\n";

  constexpr std::size_t kNameWidth = 24;

  text += "Entity Extraction Performance\n";
  {
    std::string header = "Prompt";
    pad_to(header, kNameWidth);
    header += right_align("Predict", 9) + right_align("Match", 8) + right_align("Unknown", 9) +
              right_align("Accuracy", 10);
    text += header + "\n";
  }
  for (const EvaluationRow& row : rows) {
    std::string line = row.name;
    pad_to(line, kNameWidth);
    if (row.extraction.has_value()) {
      const ExtractionMetrics& m = *row.extraction;
      line += right_align(std::to_string(m.predict), 9) + right_align(std::to_string(m.match), 8) +
              right_align(std::to_string(m.unknown), 9) + right_align(format4(m.accuracy), 10);
    } else {
      line += "  error: " + row.extraction_error;
    }
    text += line + "\n";
  }

  text += "\nEntity Classification Performance\n";
  {
    std::string header = "Prompt";
    pad_to(header, kNameWidth);
    header += "Label     ";
    header += right_align("Precision", 11) + right_align("Recall", 9) + right_align("F1", 9) +
              right_align("Support", 9);
    text += header + "\n";
  }
  for (const EvaluationRow& row : rows) {
    if (!row.classification.has_value()) {
      std::string line = row.name;
      pad_to(line, kNameWidth);
      line += "  error: " +
              (row.classification_error.empty() ? row.extraction_error : row.classification_error);
      text += line + "\n";
      continue;
    }
    const ClassificationMetrics& m = *row.classification;
    for (const auto& [label, lm] : m.per_label) {
      std::string line = row.name;
      pad_to(line, kNameWidth);
      std::string label_text = display_label(label);
      if (lm.zero_support) label_text += "*";
      line += label_text;
      pad_to(line, kNameWidth + 10);
      line += right_align(format4(lm.precision), 11) + right_align(format4(lm.recall), 9) +
              right_align(format4(lm.f1), 9) + right_align(std::to_string(lm.support), 9);
      text += line + "\n";
    }
    const std::pair<const char*, const AggregateMetrics*> aggregates[] = {
        {"macro", &m.macro}, {"weighted", &m.weighted}};
    for (const auto& [agg_name, agg] : aggregates) {
      std::string line = row.name;
      pad_to(line, kNameWidth);
      line += agg_name;
      pad_to(line, kNameWidth + 10);
      line += right_align(format4(agg->precision), 11) + right_align(format4(agg->recall), 9) +
              right_align(format4(agg->f1), 9) + right_align("-", 9);
      text += line + "\n";
    }
  }

  text += "\nPrompt Execution Time\n";
  for (const TimingRow& row : timing.rows) {
    std::string line(strategy_display_name(row.strategy));
    pad_to(line, kNameWidth);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8.2f s", row.latency_seconds);
    line += buf;
    text += line + "\n";
  }
  {
    std::string line = "Total";
    pad_to(line, kNameWidth);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%8.2f s", timing.total_seconds);
    line += buf;
    text += line + "\n";
  }
  if (!rows.empty()) {
    text += "\n* zero support in the matched set\n";
  }
  text += "matching: greedy one-to-one by descending similarity\n";
  return text;
}

std::string render_csv(const std::string& run_id, const std::vector<EvaluationRow>& rows) {
  std::string csv =
      "run_id,row,predicted_text,predicted_label,gold_text,gold_label,gold_line,similarity\n";
  for (const EvaluationRow& row : rows) {
    for (const MatchRecord& r : row.records) {
      csv += csv_escape(run_id) + "," + csv_escape(row.name) + "," + csv_escape(r.predicted.text) +
             "," + std::string(label_name(r.predicted.label)) + ",";
      if (r.gold.has_value()) {
        char sim[32];
        std::snprintf(sim, sizeof(sim), "%.6f", *r.similarity);
        csv += csv_escape(r.gold->text) + "," + std::string(label_name(r.gold->label)) + "," +
               std::to_string(r.gold->line) + "," + sim;
      } else {
        csv += ",,,";
      }
      csv += "\n";
    }
  }
  return csv;
}

}  // namespace

int cmd_evaluate(const PipelineConfig& config, const std::string& run_id, std::ostream& out) {
  const std::filesystem::path dir = run_dir(config, run_id);
  RunManifest manifest = RunManifest::load(dir / "manifest.json");
  if (manifest.run_id != run_id) {
    throw DataError("manifest in " + dir.string() + " belongs to run '" + manifest.run_id +
                    "'; refusing to mix runs");
  }
  LoadedCorpus corpus = load_corpus_cache(corpus_cache_path(config));
  const std::vector<GoldEntity>& gold = corpus.test.gold;
  auto provider = make_embedding_provider(config);

  std::vector<EvaluationRow> rows;
  std::map<PromptStrategy, std::vector<CompletionRecord>> timing_records;
  for (PromptStrategy s : kAllStrategies) {  // display order, like the report tables
    if (std::find(manifest.strategies.begin(), manifest.strategies.end(), s) ==
        manifest.strategies.end()) {
      continue;
    }
    const auto path = dir / entity_file_name(s);
    if (!std::filesystem::exists(path)) continue;
    EntityFile file = load_entity_file(path, run_id, manifest.template_version, s);
    EvaluationRow row;
    row.name = std::string(strategy_display_name(s));
    for (const ExtractedEntity& e : file.entities) {
      row.predictions.push_back(PredictedItem{e.text, e.label});
    }
    rows.push_back(std::move(row));
    timing_records[s].push_back(file.record);
  }

  const auto ensemble_path = dir / "ensemble.json";
  if (std::filesystem::exists(ensemble_path)) {
    try {
      json j = json::parse(read_file(ensemble_path));
      if (j.at("run_id").get<std::string>() != run_id) {
        throw DataError("ensemble file " + ensemble_path.string() + " belongs to run '" +
                        j.at("run_id").get<std::string>() + "'; refusing to mix runs");
      }
      EvaluationRow row;
      row.name = "Ensemble";
      for (const auto& p : j.at("predictions")) {
        auto label = label_from_string(p.at("label").get<std::string>());
        row.predictions.push_back(
            PredictedItem{p.at("text").get<std::string>(), label.value_or(EntityLabel::Unknown)});
      }
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      throw DataError("ensemble file " + ensemble_path.string() + " is malformed: " + e.what());
    }
  }
  if (rows.empty()) {
    throw MissingRuns("run '" + run_id + "' has no strategy outputs to evaluate");
  }

  for (EvaluationRow& row : rows) {
    try {
      row.records = match_predictions(row.predictions, gold, manifest.tau, *provider);
      row.extraction = extraction_metrics(row.records, static_cast<int>(gold.size()));
    } catch (const DataError& e) {
      row.extraction_error = e.what();
      continue;
    }
    try {
      row.classification = classification_metrics(row.records);
    } catch (const DataError& e) {
      row.classification_error = e.what();
    }
  }

  TimingReport timing = timing_report(timing_records);

  json rows_json = json::array();
  for (const EvaluationRow& row : rows) {
    json row_json{{"name", row.name}, {"matches", matches_to_json(row.records)}};
    if (row.extraction.has_value()) {
      row_json["extraction"] = json{{"predict", row.extraction->predict},
                                    {"match", row.extraction->match},
                                    {"unknown", row.extraction->unknown},
                                    {"gold_total", row.extraction->gold_total},
                                    {"accuracy", row.extraction->accuracy}};
    } else {
      row_json["extraction_error"] = row.extraction_error;
    }
    if (row.classification.has_value()) {
      row_json["classification"] = classification_to_json(*row.classification);
    } else if (!row.classification_error.empty()) {
      row_json["classification_error"] = row.classification_error;
    }
    rows_json.push_back(row_json);
  }
  json timing_json = json::array();
  for (const TimingRow& row : timing.rows) {
    timing_json.push_back(json{{"strategy", std::string(strategy_token(row.strategy))},
                               {"display", std::string(strategy_display_name(row.strategy))},
                               {"latency_seconds", row.latency_seconds}});
  }
  json report{{"run_id", run_id},
              {"template_version", manifest.template_version},
              {"tau", manifest.tau},
              {"gold_total", static_cast<int>(gold.size())},
              {"matching_policy", "greedy one-to-one by descending similarity"},
              {"rows", rows_json},
              {"timing", json{{"rows", timing_json}, {"total_seconds", timing.total_seconds}}}};
  write_file(dir / "report.json", report.dump(2) + "\n");
  write_file(dir / "report.txt",
             render_text_report(run_id, manifest, static_cast<int>(gold.size()), rows, timing));
  write_file(dir / "matches.csv", render_csv(run_id, rows));

  out << "evaluated " << rows.size() << " row(s) against " << gold.size() << " gold entities\n";
  out << "report: " << (dir / "report.json").string() << "\n";
  return 0;
}

int cmd_report(const PipelineConfig& config, const std::string& run_id, const std::string& format,
               std::ostream& out) {
  const std::filesystem::path dir = run_dir(config, run_id);
  std::filesystem::path path;
  if (format == "json") {
    path = dir / "report.json";
  } else if (format == "text") {
    path = dir / "report.txt";
  } else if (format == "csv") {
    path = dir / "matches.csv";
  } else {
    throw UsageError("unknown report format '" + format + "' (expected json, text, or csv)");
  }
  if (!std::filesystem::exists(path)) {
    throw MissingRuns("no evaluation artifacts for run '" + run_id + "'; run 'evaluate' first");
  }
  if (format == "json") {
    try {
      json j = json::parse(read_file(path));
      if (j.at("run_id").get<std::string>() != run_id) {
        throw DataError("report " + path.string() + " belongs to run '" +
                        j.at("run_id").get<std::string>() + "'; refusing to mix runs");
      }
    } catch (const json::exception& e) {
      throw DataError("report " + path.string() + " is malformed: " + e.what());
    }
  }
  out << read_file(path);
  return 0;
}

}  // namespace medner
