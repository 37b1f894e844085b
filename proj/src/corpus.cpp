#include "medner/corpus.hpp"

#include <algorithm>
#include <istream>
#include <regex>
#include <set>
#include <sstream>

#include "medner/errors.hpp"
#include "medner/text.hpp"

namespace medner {

namespace {

const std::regex kConceptLine(
    R"re(c="(.*)" (\d+):(\d+) (\d+):(\d+)\|\|t="([a-z]+)")re");

struct ByteRange {
  std::size_t begin;
  std::size_t end;
  EntityLabel label;
};

}  // namespace

const std::string& ClinicalDocument::line_at(int line_no) const {
  if (line_no < 1 || static_cast<std::size_t>(line_no) > lines.size()) {
    throw DataError("line " + std::to_string(line_no) + " out of range for document " + doc_id);
  }
  return lines[static_cast<std::size_t>(line_no) - 1];
}

std::string ClinicalDocument::text() const {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

ConceptParseResult parse_concept_text(std::string_view raw, const std::string& doc_id) {
  std::istringstream stream{std::string(raw)};
  return parse_concept_file(stream, doc_id);
}

ConceptParseResult parse_concept_file(std::istream& raw, const std::string& doc_id) {
  ConceptParseResult result;
  std::string line;
  int line_no = 0;
  while (std::getline(raw, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;

    std::smatch m;
    if (!std::regex_match(line, m, kConceptLine)) {
      result.errors.push_back({line_no, "does not match concept grammar", line});
      continue;
    }
    const auto label = label_from_string(m[6].str());
    if (!label || *label == EntityLabel::Unknown) {
      result.errors.push_back({line_no, "label '" + m[6].str() + "' not in vocabulary", line});
      continue;
    }
    const int start_line = std::stoi(m[2].str());
    const int start_tok = std::stoi(m[3].str());
    const int end_line = std::stoi(m[4].str());
    const int end_tok = std::stoi(m[5].str());
    if (start_line != end_line) {
      result.errors.push_back({line_no, "entity spans multiple lines", line});
      continue;
    }
    if (start_line < 1) {
      result.errors.push_back({line_no, "line numbers are 1-indexed", line});
      continue;
    }
    if (start_tok > end_tok) {
      result.errors.push_back({line_no, "token_start exceeds token_end", line});
      continue;
    }
    GoldEntity entity;
    entity.text = m[1].str();
    entity.label = *label;
    entity.doc_id = doc_id;
    entity.line = start_line;
    entity.token_start = start_tok;
    entity.token_end = end_tok;
    result.entities.push_back(std::move(entity));
  }
  return result;
}

std::string serialize_concept_line(const GoldEntity& entity) {
  std::string out = "c=\"" + entity.text + "\" ";
  out += std::to_string(entity.line) + ":" + std::to_string(entity.token_start);
  out += " ";
  out += std::to_string(entity.line) + ":" + std::to_string(entity.token_end);
  out += "||t=\"" + std::string(label_name(entity.label)) + "\"";
  return out;
}

std::optional<std::string> validate_against_document(const ClinicalDocument& doc,
                                                     const GoldEntity& entity) {
  if (entity.line < 1 || static_cast<std::size_t>(entity.line) > doc.lines.size()) {
    return "line " + std::to_string(entity.line) + " not in document";
  }
  const std::string& line = doc.lines[static_cast<std::size_t>(entity.line) - 1];
  const auto spans = token_spans(line);
  if (entity.token_start < 0 || static_cast<std::size_t>(entity.token_end) >= spans.size()) {
    return "token span " + std::to_string(entity.token_start) + ":" +
           std::to_string(entity.token_end) + " out of range";
  }
  const std::size_t begin = spans[static_cast<std::size_t>(entity.token_start)].begin;
  const std::size_t end = spans[static_cast<std::size_t>(entity.token_end)].end;
  const std::string slice = line.substr(begin, end - begin);
  if (normalize_text(slice) != normalize_text(entity.text)) {
    return "annotation text '" + entity.text + "' does not match token slice '" + slice + "'";
  }
  return std::nullopt;
}

std::string tag_text(const std::string& line, const std::vector<GoldEntity>& entities) {
  const auto spans = token_spans(line);
  std::vector<ByteRange> ranges;
  ranges.reserve(entities.size());
  for (const GoldEntity& entity : entities) {
    if (entity.token_start < 0 || static_cast<std::size_t>(entity.token_end) >= spans.size()) {
      throw DataError("entity token span out of range on line: " + line);
    }
    ranges.push_back({spans[static_cast<std::size_t>(entity.token_start)].begin,
                      spans[static_cast<std::size_t>(entity.token_end)].end, entity.label});
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const ByteRange& a, const ByteRange& b) { return a.begin < b.begin; });
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].begin < ranges[i - 1].end) {
      throw OverlappingSpans("overlapping gold spans on line: " + line);
    }
  }
  std::string out;
  std::size_t cursor = 0;
  for (const ByteRange& range : ranges) {
    out += line.substr(cursor, range.begin - cursor);
    const std::string_view name = label_name(range.label);
    out += "<";
    out += name;
    out += ">";
    out += line.substr(range.begin, range.end - range.begin);
    out += "</";
    out += name;
    out += ">";
    cursor = range.end;
  }
  out += line.substr(cursor);
  return out;
}

std::string untag_text(std::string_view tagged) {
  std::string out(tagged);
  for (EntityLabel label : kAllLabels) {
    const std::string open = "<" + std::string(label_name(label)) + ">";
    const std::string close = "</" + std::string(label_name(label)) + ">";
    for (const std::string& tag : {open, close}) {
      std::size_t pos = 0;
      while ((pos = out.find(tag, pos)) != std::string::npos) {
        out.erase(pos, tag.size());
      }
    }
  }
  return out;
}

bool SampleSet::empty() const {
  return documents.empty() && sentences.empty() && entities.empty();
}

std::map<EntityLabel, int> mention_counts(const std::vector<GoldEntity>& gold) {
  std::map<EntityLabel, int> counts;
  for (const GoldEntity& entity : gold) counts[entity.label]++;
  return counts;
}

namespace {

// gold annotations for one line, used when tagging whole documents
std::map<int, std::vector<GoldEntity>> gold_by_line(const std::vector<GoldEntity>& gold) {
  std::map<int, std::vector<GoldEntity>> by_line;
  for (const GoldEntity& entity : gold) by_line[entity.line].push_back(entity);
  return by_line;
}

TaggedDocument tag_document(const DocumentRecord& record) {
  TaggedDocument tagged;
  tagged.doc_id = record.doc.doc_id;
  const auto by_line = gold_by_line(record.gold);
  for (std::size_t i = 0; i < record.doc.lines.size(); ++i) {
    const auto it = by_line.find(static_cast<int>(i) + 1);
    if (it == by_line.end()) {
      tagged.lines.push_back(record.doc.lines[i]);
    } else {
      tagged.lines.push_back(tag_text(record.doc.lines[i], it->second));
    }
  }
  return tagged;
}

std::vector<const DocumentRecord*> resolve_pool(const std::vector<DocumentRecord>& corpus,
                                                const std::vector<std::string>& explicit_ids,
                                                const char* what) {
  std::vector<const DocumentRecord*> pool;
  if (explicit_ids.empty()) {
    for (const DocumentRecord& record : corpus) pool.push_back(&record);
  } else {
    for (const std::string& id : explicit_ids) {
      const auto it = std::find_if(corpus.begin(), corpus.end(),
                                   [&](const DocumentRecord& r) { return r.doc.doc_id == id; });
      if (it == corpus.end()) {
        throw InsufficientCorpus(std::string(what) + " pool references unknown doc id '" + id + "'");
      }
      pool.push_back(&*it);
    }
  }
  std::sort(pool.begin(), pool.end(), [](const DocumentRecord* a, const DocumentRecord* b) {
    return a->doc.doc_id < b->doc.doc_id;
  });
  return pool;
}

}  // namespace

SampleSet build_sample_set(PromptStrategy strategy,
                           const std::vector<DocumentRecord>& corpus,
                           const SamplingConfig& config) {
  if (corpus.empty()) throw InsufficientCorpus("corpus is empty");
  for (const DocumentRecord& record : corpus) {
    if (!config.test_doc_id.empty() && record.doc.doc_id == config.test_doc_id) {
      throw TestLeakage("test document '" + config.test_doc_id + "' present in the sampling pool");
    }
  }

  SampleSet samples;
  samples.strategy = strategy;

  switch (strategy) {
    case PromptStrategy::ZeroShot:
      return samples;

    case PromptStrategy::FewShotDocument: {
      auto pool = resolve_pool(corpus, config.document_pool, "document");
      std::erase_if(pool, [](const DocumentRecord* r) { return r->gold.empty(); });
      if (static_cast<int>(pool.size()) < config.document_count) {
        throw InsufficientCorpus("document sample needs " + std::to_string(config.document_count) +
                                 " annotated documents, pool has " + std::to_string(pool.size()));
      }
      deterministic_shuffle(pool, config.seed);
      pool.resize(static_cast<std::size_t>(config.document_count));
      std::sort(pool.begin(), pool.end(), [](const DocumentRecord* a, const DocumentRecord* b) {
        return a->doc.doc_id < b->doc.doc_id;
      });
      for (const DocumentRecord* record : pool) samples.documents.push_back(tag_document(*record));
      return samples;
    }

    case PromptStrategy::FewShotSentences: {
      auto pool = resolve_pool(corpus, config.sentence_doc_pool, "sentence");
      std::erase_if(pool, [](const DocumentRecord* r) { return r->gold.empty(); });
      if (static_cast<int>(pool.size()) < config.sentence_doc_count) {
        throw InsufficientCorpus("sentence sample needs " + std::to_string(config.sentence_doc_count) +
                                 " annotated documents, pool has " + std::to_string(pool.size()));
      }
      deterministic_shuffle(pool, config.seed);
      pool.resize(static_cast<std::size_t>(config.sentence_doc_count));
      std::sort(pool.begin(), pool.end(), [](const DocumentRecord* a, const DocumentRecord* b) {
        return a->doc.doc_id < b->doc.doc_id;
      });

      // candidate sentences: every line with at least one entity
      struct Candidate {
        const DocumentRecord* record;
        int line;
        const std::vector<GoldEntity>* gold;
      };
      std::vector<Candidate> candidates;
      std::vector<std::map<int, std::vector<GoldEntity>>> per_doc;
      per_doc.reserve(pool.size());
      for (const DocumentRecord* record : pool) {
        per_doc.push_back(gold_by_line(record->gold));
        for (const auto& [line_no, gold] : per_doc.back()) {
          candidates.push_back({record, line_no, &gold});
        }
      }
      if (static_cast<int>(candidates.size()) < config.sentence_count) {
        throw InsufficientCorpus("sentence sample needs " + std::to_string(config.sentence_count) +
                                 " annotated sentences, pool has " + std::to_string(candidates.size()));
      }
      deterministic_shuffle(candidates, config.seed + 1);
      candidates.resize(static_cast<std::size_t>(config.sentence_count));
      std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.record->doc.doc_id != b.record->doc.doc_id)
          return a.record->doc.doc_id < b.record->doc.doc_id;
        return a.line < b.line;
      });
      for (const Candidate& candidate : candidates) {
        TaggedSentence sentence;
        sentence.doc_id = candidate.record->doc.doc_id;
        sentence.line = candidate.line;
        sentence.text = tag_text(candidate.record->doc.line_at(candidate.line), *candidate.gold);
        samples.sentences.push_back(std::move(sentence));
      }
      return samples;
    }

    case PromptStrategy::FewShotEntities: {
      const auto pool = resolve_pool(corpus, config.entity_doc_pool, "entity");
      std::map<EntityLabel, std::set<std::string>> seen;
      for (const DocumentRecord* record : pool) {
        for (const GoldEntity& entity : record->gold) {
          std::string normalized = normalize_text(entity.text);
          if (normalized.empty()) continue;
          seen[entity.label].insert(std::move(normalized));
        }
      }
      for (const auto& [label, texts] : seen) {
        samples.entities[label] = std::vector<std::string>(texts.begin(), texts.end());
      }
      return samples;
    }
  }
  return samples;
}

}  // namespace medner
