#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "medner/corpus.hpp"
#include "medner/embedding.hpp"
#include "medner/ensemble.hpp"
#include "medner/errors.hpp"
#include "medner/evaluation.hpp"
#include "medner/prompt.hpp"
#include "medner/response.hpp"
#include "medner/text.hpp"
#include "medner/types.hpp"

namespace py = pybind11;
using namespace medner;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Core operations for prompt-based medical entity recognition:\n"
            "text normalization, concept annotation parsing, model response\n"
            "parsing, trigram embeddings, similarity clustering with majority\n"
            "voting, and evaluation metrics.";
  m.attr("__version__") = "0.1.0";

  // Exception translators run newest-first, so register the base first.
  auto medner_error = py::register_exception<MednerError>(m, "MednerError", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", medner_error.ptr());
  py::register_exception<DataError>(m, "DataError", medner_error.ptr());
  py::register_exception<GatewayError>(m, "GatewayError", medner_error.ptr());

  py::enum_<EntityLabel>(m, "EntityLabel",
                         "Clinical entity category. Gold annotations carry only the first "
                         "three; Unknown appears in predictions and ensemble abstentions.")
      .value("Problem", EntityLabel::Problem)
      .value("Test", EntityLabel::Test)
      .value("Treatment", EntityLabel::Treatment)
      .value("Unknown", EntityLabel::Unknown);

  py::enum_<PromptStrategy>(m, "PromptStrategy", "Prompting strategy that produced an entity.")
      .value("ZeroShot", PromptStrategy::ZeroShot)
      .value("FewShotDocument", PromptStrategy::FewShotDocument)
      .value("FewShotSentences", PromptStrategy::FewShotSentences)
      .value("FewShotEntities", PromptStrategy::FewShotEntities);

  m.attr("GOLD_LABELS") = std::vector<EntityLabel>(kGoldLabels.begin(), kGoldLabels.end());
  m.attr("ALL_LABELS") = std::vector<EntityLabel>(kAllLabels.begin(), kAllLabels.end());
  m.attr("ALL_STRATEGIES") =
      std::vector<PromptStrategy>(kAllStrategies.begin(), kAllStrategies.end());
  m.attr("DEFAULT_TAU") = kDefaultTau;

  m.def("label_name", &label_name, py::arg("label"), "Lower-case tag name of a label.");
  m.def("label_from_string", &label_from_string, py::arg("token"),
        "Case-insensitive label lookup; None for tokens outside the vocabulary.");
  m.def("strategy_token", &strategy_token, py::arg("strategy"),
        "Short token used in CLI flags and file names.");
  m.def("strategy_display_name", &strategy_display_name, py::arg("strategy"),
        "Human-readable name used in report tables.");
  m.def("strategy_from_token", &strategy_from_token, py::arg("token"),
        "Inverse of strategy_token; None for unknown tokens.");

  m.def("normalize_text", &normalize_text, py::arg("text"),
        "Canonical normalization used for dedup, matching, and embedding inputs:\n"
        "ASCII lower-case, whitespace collapsed, edge punctuation stripped.");
  m.def("estimate_tokens", &estimate_tokens, py::arg("text"),
        "Heuristic token estimator: ceil(byte_length / 4).");

  // --- corpus annotations -------------------------------------------------
  py::class_<GoldEntity>(m, "GoldEntity",
                         "A gold concept annotation: surface text plus its whitespace-token "
                         "span on a single line (tokens 0-indexed, inclusive).")
      .def(py::init([](std::string text, EntityLabel label, std::string doc_id, int line,
                       int token_start, int token_end) {
             GoldEntity e;
             e.text = std::move(text);
             e.label = label;
             e.doc_id = std::move(doc_id);
             e.line = line;
             e.token_start = token_start;
             e.token_end = token_end;
             return e;
           }),
           py::arg("text"), py::arg("label"), py::arg("doc_id") = "", py::arg("line") = 1,
           py::arg("token_start") = 0, py::arg("token_end") = 0)
      .def_readwrite("text", &GoldEntity::text)
      .def_readwrite("label", &GoldEntity::label)
      .def_readwrite("doc_id", &GoldEntity::doc_id)
      .def_readwrite("line", &GoldEntity::line)
      .def_readwrite("token_start", &GoldEntity::token_start)
      .def_readwrite("token_end", &GoldEntity::token_end)
      .def(py::self == py::self)
      .def("__repr__", [](const GoldEntity& e) {
        return "GoldEntity(text='" + e.text + "', label='" + std::string(label_name(e.label)) +
               "')";
      });

  py::class_<MalformedAnnotation>(m, "MalformedAnnotation")
      .def_readonly("line_no", &MalformedAnnotation::line_no)
      .def_readonly("reason", &MalformedAnnotation::reason)
      .def_readonly("raw_line", &MalformedAnnotation::raw_line);

  py::class_<ConceptParseResult>(m, "ConceptParseResult")
      .def_readonly("entities", &ConceptParseResult::entities)
      .def_readonly("errors", &ConceptParseResult::errors);

  m.def("parse_concept_text", &parse_concept_text, py::arg("raw"), py::arg("doc_id"),
        "Parses concept annotation lines: c=\"<text>\" <line>:<tok> <line>:<tok>||t=\"<label>\".\n"
        "Malformed lines are collected, never silently dropped and never fatal.");
  m.def("serialize_concept_line", &serialize_concept_line, py::arg("entity"),
        "Inverse of parse_concept_text for well-formed entities (byte-exact round trip).");
  m.def("tag_text", &tag_text, py::arg("line"), py::arg("entities"),
        "Wraps each gold span as <label>text</label>; untag_text recovers the line.");
  m.def("untag_text", &untag_text, py::arg("tagged"),
        "Removes <label>/</label> tags for the known label vocabulary.");
  m.def("mention_counts", &mention_counts, py::arg("gold"),
        "Per-label mention counts (not deduplicated) of a gold annotation list.");

  // --- model responses ----------------------------------------------------
  py::class_<ExtractedEntity>(m, "ExtractedEntity",
                              "One (entity, label) pair parsed from a model response. The "
                              "surface form is normalized on construction; raw_text keeps the "
                              "original input.")
      .def(py::init([](const std::string& text, EntityLabel label, PromptStrategy source,
                       int ordinal) {
             ExtractedEntity e;
             e.raw_text = text;
             e.text = normalize_text(text);
             e.label = label;
             e.source = source;
             e.ordinal = ordinal;
             return e;
           }),
           py::arg("text"), py::arg("label") = EntityLabel::Unknown,
           py::arg("source") = PromptStrategy::ZeroShot, py::arg("ordinal") = 0)
      .def_readwrite("text", &ExtractedEntity::text)
      .def_readwrite("raw_text", &ExtractedEntity::raw_text)
      .def_readwrite("label", &ExtractedEntity::label)
      .def_readwrite("source", &ExtractedEntity::source)
      .def_readwrite("ordinal", &ExtractedEntity::ordinal)
      .def(py::self == py::self)
      .def("__repr__", [](const ExtractedEntity& e) {
        return "ExtractedEntity(text='" + e.text + "', label='" +
               std::string(label_name(e.label)) + "')";
      });

  py::class_<MalformedLine>(m, "MalformedLine")
      .def_readonly("line_no", &MalformedLine::line_no)
      .def_readonly("raw_line", &MalformedLine::raw_line)
      .def_readonly("reason", &MalformedLine::reason);

  py::class_<ParseWarning>(m, "ParseWarning")
      .def_readonly("line_no", &ParseWarning::line_no)
      .def_readonly("message", &ParseWarning::message);

  py::class_<ParseReport>(m, "ParseReport")
      .def_readonly("entities", &ParseReport::entities)
      .def_readonly("malformed", &ParseReport::malformed)
      .def_readonly("warnings", &ParseReport::warnings)
      .def_readonly("duplicate_count", &ParseReport::duplicate_count)
      .def_readonly("blank_count", &ParseReport::blank_count);

  m.def("matches_entity_grammar", &matches_entity_grammar, py::arg("line"),
        "True when the line fits the '<entity text> | <label>' grammar.");
  m.def("parse_response", &parse_response, py::arg("response_text"), py::arg("source"),
        "Parses ' | '-delimited entity lines. Unrecognized labels map to Unknown\n"
        "with a warning; duplicates collapse into duplicate_count; nothing is fatal.");
  m.def("strip_preamble", &strip_preamble, py::arg("response_text"),
        "Drops leading/trailing lines that match no entity grammar plus code fences.");

  // --- embeddings ---------------------------------------------------------
  py::class_<EmbeddingVector>(m, "EmbeddingVector")
      .def(py::init([](std::vector<double> values, std::string provider_id) {
             return EmbeddingVector{std::move(values), std::move(provider_id)};
           }),
           py::arg("values"), py::arg("provider_id") = "")
      .def_readwrite("values", &EmbeddingVector::values)
      .def_readwrite("provider_id", &EmbeddingVector::provider_id)
      .def_property_readonly("dimension", &EmbeddingVector::dimension);

  m.def("cosine_similarity", &cosine_similarity, py::arg("a"), py::arg("b"),
        "dot(a,b) / (|a||b|), clamped to [-1, 1].");

  py::class_<LocalTrigramProvider>(m, "LocalTrigramProvider",
                                   "Deterministic offline embedder: character-trigram hashed "
                                   "term frequencies over the normalized text, dimension 512, "
                                   "L2-normalized.")
      .def(py::init<>())
      .def_property_readonly("id", &LocalTrigramProvider::id)
      .def_property_readonly("dimension", &LocalTrigramProvider::dimension)
      .def("embed", &LocalTrigramProvider::embed, py::arg("text"))
      .def("embed_batch", &LocalTrigramProvider::embed_batch, py::arg("texts"));

  // --- ensemble -----------------------------------------------------------
  py::class_<EnsemblePrediction>(m, "EnsemblePrediction",
                                 "One voted cluster: representative text, the winning label "
                                 "(Unknown on abstention), the winning label's frequency, and "
                                 "the full cluster size.")
      .def_readonly("text", &EnsemblePrediction::text)
      .def_readonly("label", &EnsemblePrediction::label)
      .def_readonly("support", &EnsemblePrediction::support)
      .def_readonly("cluster_size", &EnsemblePrediction::cluster_size)
      .def(py::self == py::self)
      .def("__repr__", [](const EnsemblePrediction& p) {
        return "EnsemblePrediction(text='" + p.text + "', label='" +
               std::string(label_name(p.label)) + "', support=" + std::to_string(p.support) +
               ", cluster_size=" + std::to_string(p.cluster_size) + ")";
      });

  m.def(
      "run_ensemble",
      [](const std::map<PromptStrategy, std::vector<ExtractedEntity>>& runs, double tau) {
        PredictionSet set;
        set.runs = runs;
        LocalTrigramProvider provider;
        return run_ensemble(set, tau, provider).predictions;
      },
      py::arg("runs"), py::arg("tau") = kDefaultTau,
      "Flattens per-strategy entity lists in strategy token order, embeds them\n"
      "with the local trigram provider, leader-clusters at threshold tau, and\n"
      "majority-votes each cluster. Returns predictions in cluster creation order.");

  m.def(
      "cluster_texts",
      [](const std::vector<std::string>& texts, double tau) {
        LocalTrigramProvider provider;
        const std::vector<EmbeddingVector> vectors = provider.embed_batch(texts);
        std::vector<ClusterMember> members(texts.size());
        for (std::size_t i = 0; i < texts.size(); ++i) {
          members[i].entity.text = texts[i];
          members[i].entity.raw_text = texts[i];
          members[i].entity.ordinal = static_cast<int>(i);
          members[i].vector = vectors[i];
        }
        std::vector<std::vector<int>> clusters;
        for (const EntityCluster& cluster : cluster_entities(members, tau)) {
          std::vector<int> indices;
          for (const ClusterMember& member : cluster.members) {
            indices.push_back(member.entity.ordinal);
          }
          clusters.push_back(std::move(indices));
        }
        return clusters;
      },
      py::arg("texts"), py::arg("tau") = kDefaultTau,
      "Greedy leader clustering of raw strings under the local trigram embedder.\n"
      "Returns input indices grouped by cluster, in cluster creation order.");

  // --- evaluation ---------------------------------------------------------
  py::class_<PredictedItem>(m, "PredictedItem",
                            "A predicted surface form plus its label. The text is normalized "
                            "on construction, matching what the extraction pipeline emits.")
      .def(py::init([](const std::string& text, EntityLabel label) {
             PredictedItem item;
             item.text = normalize_text(text);
             item.label = label;
             return item;
           }),
           py::arg("text"), py::arg("label") = EntityLabel::Unknown)
      .def_readwrite("text", &PredictedItem::text)
      .def_readwrite("label", &PredictedItem::label)
      .def(py::self == py::self)
      .def("__repr__", [](const PredictedItem& item) {
        return "PredictedItem(text='" + item.text + "', label='" +
               std::string(label_name(item.label)) + "')";
      });

  py::class_<MatchRecord>(m, "MatchRecord",
                          "One matcher row: the prediction, the gold entity it matched (None "
                          "if unmatched), and the similarity that sealed the match.")
      .def_readonly("predicted", &MatchRecord::predicted)
      .def_readonly("gold", &MatchRecord::gold)
      .def_readonly("similarity", &MatchRecord::similarity);

  m.def(
      "match_predictions",
      [](const std::vector<PredictedItem>& predictions, const std::vector<GoldEntity>& gold,
         double tau) {
        LocalTrigramProvider provider;
        return match_predictions(predictions, gold, tau, provider);
      },
      py::arg("predictions"), py::arg("gold"), py::arg("tau") = kDefaultTau,
      "One-to-one greedy matching under the local trigram embedder: candidate\n"
      "pairs with similarity >= tau are accepted in descending similarity, each\n"
      "side used at most once. Records come back in prediction order.");

  py::class_<ExtractionMetrics>(m, "ExtractionMetrics")
      .def_readonly("predict", &ExtractionMetrics::predict)
      .def_readonly("match", &ExtractionMetrics::match)
      .def_readonly("unknown", &ExtractionMetrics::unknown)
      .def_readonly("gold_total", &ExtractionMetrics::gold_total)
      .def_readonly("accuracy", &ExtractionMetrics::accuracy);

  py::class_<LabelMetrics>(m, "LabelMetrics")
      .def_readonly("precision", &LabelMetrics::precision)
      .def_readonly("recall", &LabelMetrics::recall)
      .def_readonly("f1", &LabelMetrics::f1)
      .def_readonly("support", &LabelMetrics::support)
      .def_readonly("zero_support", &LabelMetrics::zero_support);

  py::class_<AggregateMetrics>(m, "AggregateMetrics")
      .def_readonly("precision", &AggregateMetrics::precision)
      .def_readonly("recall", &AggregateMetrics::recall)
      .def_readonly("f1", &AggregateMetrics::f1);

  py::class_<ClassificationMetrics>(m, "ClassificationMetrics")
      .def_readonly("per_label", &ClassificationMetrics::per_label)
      .def_readonly("macro", &ClassificationMetrics::macro)
      .def_readonly("weighted", &ClassificationMetrics::weighted);

  m.def("extraction_metrics", &extraction_metrics, py::arg("records"), py::arg("gold_total"),
        "Counts over match records; accuracy is match / gold_total.");
  m.def("classification_metrics", &classification_metrics, py::arg("records"),
        "Confusion-matrix metrics over the matched records (unmatched ones are\n"
        "ignored). Gold labels are truth; Unknown predictions are never correct.");
}
