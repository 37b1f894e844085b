#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "medner/types.hpp"

namespace medner {

/// One (entity, label) pair parsed from a model response.
struct ExtractedEntity {
  std::string text;      // normalized surface form, non-empty
  std::string raw_text;  // as emitted by the model
  EntityLabel label = EntityLabel::Unknown;
  PromptStrategy source = PromptStrategy::ZeroShot;
  int ordinal = 0;  // position within the response

  bool operator==(const ExtractedEntity&) const = default;
};

struct MalformedLine {
  int line_no = 0;
  std::string raw_line;
  std::string reason;
};

struct ParseWarning {
  int line_no = 0;
  std::string message;
};

struct ParseReport {
  std::vector<ExtractedEntity> entities;
  std::vector<MalformedLine> malformed;
  std::vector<ParseWarning> warnings;
  int duplicate_count = 0;
  int blank_count = 0;
};

/// True when the line fits the `<entity text> | <label>` grammar, regardless
/// of whether the label token is in the vocabulary.
bool matches_entity_grammar(std::string_view line);

/// Parses ` | `-delimited entity lines. Unrecognized label tokens map to
/// Unknown with a warning; exact duplicate (text, label) pairs collapse into
/// duplicate_count; nothing is fatal.
ParseReport parse_response(std::string_view response_text, PromptStrategy source);

/// Drops leading/trailing lines that match no entity grammar plus any code
/// fence markers. Idempotent, and never changes the extracted pairs.
std::string strip_preamble(std::string_view response_text);

}  // namespace medner
