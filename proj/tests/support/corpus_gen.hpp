#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "medner/corpus.hpp"

namespace medner::testsupport {

/// Shape of the synthetic corpus: per-pool document counts and the per-label
/// totals each sampling strategy must reproduce. Defaults mirror the corpus
/// the pipeline targets (one training document, 100 annotated sentences from
/// five documents, all entities from 73 documents, one 190-entity test
/// document).
struct SyntheticCorpusSpec {
  // entity pool: distinct normalized entities per label, spread over the docs
  int entity_problem = 2567;
  int entity_test = 1206;
  int entity_treatment = 1582;
  int entity_docs = 73;

  // sentence pool: mention totals across exactly `sentences` annotated lines
  int sentences = 100;
  int sentence_docs = 5;
  int sentence_problem = 60;
  int sentence_test = 90;
  int sentence_treatment = 71;

  // single-document pool
  int doc_problem = 53;
  int doc_test = 54;
  int doc_treatment = 52;

  // held-out test document
  int test_problem = 72;
  int test_test = 66;
  int test_treatment = 52;
};

/// The generated corpus, its sampling configuration (pools wired to the
/// generated ids), and the raw concept lines the generator itself formatted —
/// an independent oracle for the annotation grammar round trip.
struct SyntheticCorpus {
  std::vector<DocumentRecord> training;
  DocumentRecord test;
  SamplingConfig sampling;
  std::map<std::string, std::vector<std::string>> concept_lines;  // by doc id
};

/// Deterministically builds a corpus realizing exactly the counts in `spec`.
/// Every entity string is unique corpus-wide and already in normalized form,
/// so deduplicated counts equal raw counts by construction; the generator
/// throws if its own bookkeeping disagrees with the spec.
SyntheticCorpus generate_corpus(const SyntheticCorpusSpec& spec);

/// Well-formed concept annotation lines with varied texts, spans, and labels,
/// formatted by the generator itself (not by the library under test).
std::vector<std::string> synthetic_concept_lines(int count, std::uint64_t seed);

/// Occurrences of the exact substring `<tag>` in `text`.
int count_tag(const std::string& text, const std::string& tag);

}  // namespace medner::testsupport
