#include <doctest.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "corpus_gen.hpp"
#include "medner/corpus.hpp"
#include "medner/errors.hpp"
#include "medner/text.hpp"

using namespace medner;
using namespace medner::testsupport;

namespace {

DocumentRecord make_record(const std::string& doc_id,
                           const std::vector<std::string>& lines,
                           const std::vector<GoldEntity>& gold) {
  DocumentRecord record;
  record.doc.doc_id = doc_id;
  record.doc.lines = lines;
  record.gold = gold;
  return record;
}

GoldEntity make_gold(const std::string& text, EntityLabel label, const std::string& doc_id,
                     int line, int start, int end) {
  GoldEntity entity;
  entity.text = text;
  entity.label = label;
  entity.doc_id = doc_id;
  entity.line = line;
  entity.token_start = start;
  entity.token_end = end;
  return entity;
}

}  // namespace

TEST_CASE("parse_concept_text reads well-formed annotation lines") {
  const auto result =
      parse_concept_text("c=\"hypertension\" 12:4 12:4||t=\"problem\"\n", "doc-1");
  REQUIRE(result.entities.size() == 1);
  CHECK(result.errors.empty());
  const GoldEntity& e = result.entities[0];
  CHECK(e.text == "hypertension");
  CHECK(e.label == EntityLabel::Problem);
  CHECK(e.doc_id == "doc-1");
  CHECK(e.line == 12);
  CHECK(e.token_start == 4);
  CHECK(e.token_end == 4);
}

TEST_CASE("parse_concept_text on an empty stream yields nothing") {
  const auto result = parse_concept_text("", "doc-1");
  CHECK(result.entities.empty());
  CHECK(result.errors.empty());
}

TEST_CASE("parse_concept_text collects malformed lines instead of dropping them") {
  // missing end offset
  auto result = parse_concept_text("c=\"aspirin\" 3:1||t=\"treatment\"\n", "doc-1");
  CHECK(result.entities.empty());
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].line_no == 1);

  // unknown label
  result = parse_concept_text("c=\"aspirin\" 3:1 3:1||t=\"drug\"\n", "doc-1");
  CHECK(result.entities.empty());
  REQUIRE(result.errors.size() == 1);

  // multi-line span, reversed tokens, 0-indexed line
  result = parse_concept_text(
      "c=\"a\" 3:1 4:1||t=\"test\"\n"
      "c=\"b\" 3:2 3:1||t=\"test\"\n"
      "c=\"c\" 0:1 0:1||t=\"test\"\n",
      "doc-1");
  CHECK(result.entities.empty());
  CHECK(result.errors.size() == 3);

  // good lines around a bad one still parse
  result = parse_concept_text(
      "c=\"x\" 1:0 1:0||t=\"problem\"\n"
      "garbage\n"
      "c=\"y\" 2:0 2:0||t=\"test\"\n",
      "doc-1");
  CHECK(result.entities.size() == 2);
  REQUIRE(result.errors.size() == 1);
  CHECK(result.errors[0].line_no == 2);
  CHECK(result.errors[0].raw_line == "garbage");
}

TEST_CASE("parse then serialize round-trips well-formed lines byte-identically") {
  const auto lines = synthetic_concept_lines(50, 2024);
  for (const std::string& line : lines) {
    const auto result = parse_concept_text(line, "doc-1");
    REQUIRE(result.entities.size() == 1);
    REQUIRE(result.errors.empty());
    CHECK(serialize_concept_line(result.entities[0]) == line);
  }
}

TEST_CASE("validate_against_document checks line, span, and normalized text") {
  ClinicalDocument doc;
  doc.doc_id = "doc-1";
  doc.lines = {"patient has hypertension", "started Aspirin today"};

  CHECK(!validate_against_document(
      doc, make_gold("hypertension", EntityLabel::Problem, "doc-1", 1, 2, 2)));
  // annotation text is compared after normalization, so case differences pass
  CHECK(!validate_against_document(doc,
                                   make_gold("aspirin", EntityLabel::Treatment, "doc-1", 2, 1, 1)));
  CHECK(validate_against_document(doc,
                                  make_gold("hypertension", EntityLabel::Problem, "doc-1", 3, 0, 0))
            .has_value());
  CHECK(validate_against_document(doc,
                                  make_gold("hypertension", EntityLabel::Problem, "doc-1", 1, 2, 5))
            .has_value());
  CHECK(validate_against_document(doc, make_gold("nope", EntityLabel::Problem, "doc-1", 1, 2, 2))
            .has_value());
}

TEST_CASE("tag_text wraps gold spans in lower-case label tags") {
  const std::string line = "patient has hypertension";
  const auto tagged =
      tag_text(line, {make_gold("hypertension", EntityLabel::Problem, "doc-1", 1, 2, 2)});
  CHECK(tagged == "patient has <problem>hypertension</problem>");
  CHECK(untag_text(tagged) == line);
}

TEST_CASE("tag_text with no entities is the identity") {
  CHECK(tag_text("nothing to see", {}) == "nothing to see");
}

TEST_CASE("tag_text wraps multiple spans preserving order and spacing") {
  const std::string line = "ordered chest x-ray and started insulin drip";
  const auto tagged = tag_text(line, {
                                         make_gold("chest x-ray", EntityLabel::Test, "d", 1, 1, 2),
                                         make_gold("insulin drip", EntityLabel::Treatment, "d", 1, 5, 6),
                                     });
  CHECK(tagged ==
        "ordered <test>chest x-ray</test> and started <treatment>insulin drip</treatment>");
  CHECK(untag_text(tagged) == line);
}

TEST_CASE("tag_text rejects overlapping spans") {
  const std::string line = "severe chest pain today";
  CHECK_THROWS_AS(tag_text(line,
                           {
                               make_gold("severe chest", EntityLabel::Problem, "d", 1, 0, 1),
                               make_gold("chest pain", EntityLabel::Problem, "d", 1, 1, 2),
                           }),
                  OverlappingSpans);
}

TEST_CASE("tag/untag round-trips every line of the synthetic corpus") {
  SyntheticCorpusSpec spec;
  // scaled-down corpus keeps this case fast; shape checks run elsewhere
  spec.entity_problem = 40;
  spec.entity_test = 25;
  spec.entity_treatment = 30;
  spec.entity_docs = 7;
  spec.sentences = 20;
  spec.sentence_docs = 4;
  spec.sentence_problem = 12;
  spec.sentence_test = 18;
  spec.sentence_treatment = 14;
  const SyntheticCorpus corpus = generate_corpus(spec);

  auto check_record = [](const DocumentRecord& record) {
    std::map<int, std::vector<GoldEntity>> by_line;
    for (const GoldEntity& entity : record.gold) by_line[entity.line].push_back(entity);
    for (const auto& [line_no, gold] : by_line) {
      const std::string& line = record.doc.line_at(line_no);
      CHECK(untag_text(tag_text(line, gold)) == line);
    }
  };
  for (const DocumentRecord& record : corpus.training) check_record(record);
  check_record(corpus.test);
}

TEST_CASE("build_sample_set returns an empty SampleSet for zero-shot") {
  const auto corpus = std::vector<DocumentRecord>{make_record(
      "doc-1", {"x"}, {make_gold("x", EntityLabel::Problem, "doc-1", 1, 0, 0)})};
  SamplingConfig config;
  config.test_doc_id = "held-out";
  const SampleSet samples = build_sample_set(PromptStrategy::ZeroShot, corpus, config);
  CHECK(samples.strategy == PromptStrategy::ZeroShot);
  CHECK(samples.empty());
}

TEST_CASE("build_sample_set refuses a pool containing the test document") {
  const auto corpus = std::vector<DocumentRecord>{make_record(
      "held-out", {"x"}, {make_gold("x", EntityLabel::Problem, "held-out", 1, 0, 0)})};
  SamplingConfig config;
  config.test_doc_id = "held-out";
  CHECK_THROWS_AS(build_sample_set(PromptStrategy::FewShotDocument, corpus, config), TestLeakage);
}

TEST_CASE("build_sample_set reports unsatisfiable counts") {
  const auto corpus = std::vector<DocumentRecord>{make_record(
      "doc-1", {"a b"}, {make_gold("a", EntityLabel::Problem, "doc-1", 1, 0, 0)})};
  SamplingConfig config;
  config.test_doc_id = "held-out";
  config.sentence_count = 100;
  config.sentence_doc_count = 5;
  CHECK_THROWS_AS(build_sample_set(PromptStrategy::FewShotSentences, corpus, config),
                  InsufficientCorpus);

  SamplingConfig pool_config = config;
  pool_config.entity_doc_pool = {"no-such-doc"};
  CHECK_THROWS_AS(build_sample_set(PromptStrategy::FewShotEntities, corpus, pool_config),
                  InsufficientCorpus);
}

TEST_CASE("build_sample_set dedupes and sorts entity lists after normalization") {
  const auto corpus = std::vector<DocumentRecord>{
      make_record("doc-1", {"Aspirin given", "aspirin  given", "zinc given"},
                  {
                      make_gold("Aspirin", EntityLabel::Treatment, "doc-1", 1, 0, 0),
                      make_gold("aspirin", EntityLabel::Treatment, "doc-1", 2, 0, 0),
                      make_gold("zinc", EntityLabel::Treatment, "doc-1", 3, 0, 0),
                  })};
  SamplingConfig config;
  config.test_doc_id = "held-out";
  const SampleSet samples = build_sample_set(PromptStrategy::FewShotEntities, corpus, config);
  REQUIRE(samples.entities.count(EntityLabel::Treatment) == 1);
  const auto& treatments = samples.entities.at(EntityLabel::Treatment);
  CHECK(treatments == std::vector<std::string>{"aspirin", "zinc"});
}

TEST_CASE("sentence sampling is deterministic for a fixed seed") {
  SyntheticCorpusSpec spec;
  spec.entity_problem = 10;
  spec.entity_test = 10;
  spec.entity_treatment = 10;
  spec.entity_docs = 3;
  spec.sentences = 40;
  spec.sentence_docs = 4;
  spec.sentence_problem = 20;
  spec.sentence_test = 15;
  spec.sentence_treatment = 10;
  const SyntheticCorpus corpus = generate_corpus(spec);

  SamplingConfig config = corpus.sampling;
  config.sentence_count = 10;  // force an actual selection out of the 40
  const SampleSet first = build_sample_set(PromptStrategy::FewShotSentences, corpus.training, config);
  const SampleSet second =
      build_sample_set(PromptStrategy::FewShotSentences, corpus.training, config);
  REQUIRE(first.sentences.size() == 10);
  for (std::size_t i = 0; i < first.sentences.size(); ++i) {
    CHECK(first.sentences[i].text == second.sentences[i].text);
    CHECK(first.sentences[i].doc_id == second.sentences[i].doc_id);
  }

  config.seed += 1;
  const SampleSet reseeded =
      build_sample_set(PromptStrategy::FewShotSentences, corpus.training, config);
  const auto key = [](const SampleSet& s) {
    std::string out;
    for (const auto& sentence : s.sentences) out += sentence.doc_id + ":" + sentence.text + "\n";
    return out;
  };
  CHECK(key(first) != key(reseeded));
}

TEST_CASE("mention_counts tallies per label") {
  const std::vector<GoldEntity> gold = {
      make_gold("a", EntityLabel::Problem, "d", 1, 0, 0),
      make_gold("b", EntityLabel::Problem, "d", 2, 0, 0),
      make_gold("c", EntityLabel::Test, "d", 3, 0, 0),
  };
  auto counts = mention_counts(gold);
  CHECK(counts[EntityLabel::Problem] == 2);
  CHECK(counts[EntityLabel::Test] == 1);
  CHECK(counts[EntityLabel::Treatment] == 0);
}
