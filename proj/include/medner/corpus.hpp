#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "medner/types.hpp"

namespace medner {

/// One clinical record; lines are 1-indexed as in the annotation format.
struct ClinicalDocument {
  std::string doc_id;
  std::vector<std::string> lines;

  const std::string& line_at(int line_no) const;  // 1-indexed, throws DataError
  std::string text() const;                       // lines joined with '\n'
};

/// A gold concept annotation: surface text plus its whitespace-token span
/// on a single line (tokens 0-indexed, inclusive).
struct GoldEntity {
  std::string text;
  EntityLabel label = EntityLabel::Problem;
  std::string doc_id;
  int line = 1;
  int token_start = 0;
  int token_end = 0;

  bool operator==(const GoldEntity&) const = default;
};

struct MalformedAnnotation {
  int line_no = 0;
  std::string reason;
  std::string raw_line;
};

struct ConceptParseResult {
  std::vector<GoldEntity> entities;
  std::vector<MalformedAnnotation> errors;
};

/// Parses i2b2-style concept lines: c="<text>" <line>:<tok> <line>:<tok>||t="<label>".
/// Malformed lines are collected, never silently dropped and never fatal.
ConceptParseResult parse_concept_file(std::istream& raw, const std::string& doc_id);
ConceptParseResult parse_concept_text(std::string_view raw, const std::string& doc_id);

/// Inverse of parse_concept_file for well-formed entities (byte-exact round trip).
std::string serialize_concept_line(const GoldEntity& entity);

/// Checks a parsed annotation against its document: line exists, token span is
/// in range, and the annotation text matches the normalized token slice.
/// Returns a reason on failure.
std::optional<std::string> validate_against_document(const ClinicalDocument& doc,
                                                     const GoldEntity& entity);

/// Wraps each gold span on `line` as <label>text</label>, lower-case tag names.
/// Non-entity text is byte-identical; untag_text recovers the original line.
/// Throws OverlappingSpans when two spans intersect.
std::string tag_text(const std::string& line, const std::vector<GoldEntity>& entities);

/// Removes <label>/</label> tags for the known label vocabulary.
std::string untag_text(std::string_view tagged);

struct TaggedDocument {
  std::string doc_id;
  std::vector<std::string> lines;  // already tagged
};

struct TaggedSentence {
  std::string doc_id;
  int line = 1;
  std::string text;  // already tagged
};

/// Strategy-specific training material. Only the collections relevant to the
/// strategy are populated; entity lists are normalized, deduplicated, and
/// sorted lexicographically (the deterministic order the trim rule relies on).
struct SampleSet {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::vector<TaggedDocument> documents;
  std::vector<TaggedSentence> sentences;
  std::map<EntityLabel, std::vector<std::string>> entities;

  bool empty() const;
};

struct DocumentRecord {
  ClinicalDocument doc;
  std::vector<GoldEntity> gold;
};

struct SamplingConfig {
  std::string test_doc_id;
  std::uint64_t seed = 0;
  int document_count = 1;        // FewShotDocument
  int sentence_count = 100;      // FewShotSentences
  int sentence_doc_count = 5;    // FewShotSentences
  // Optional explicit doc-id pools; empty means "draw from the whole corpus".
  std::vector<std::string> document_pool;
  std::vector<std::string> sentence_doc_pool;
  std::vector<std::string> entity_doc_pool;
};

/// Draws the strategy-specific samples. The corpus must not contain the test
/// document (TestLeakage) and must satisfy the requested counts
/// (InsufficientCorpus).
SampleSet build_sample_set(PromptStrategy strategy,
                           const std::vector<DocumentRecord>& corpus,
                           const SamplingConfig& config);

/// Per-label mention counts (not deduplicated) of a gold annotation list.
std::map<EntityLabel, int> mention_counts(const std::vector<GoldEntity>& gold);

}  // namespace medner
