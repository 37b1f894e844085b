#include "medner/response.hpp"

#include <set>
#include <utility>

#include "medner/text.hpp"

namespace medner {

namespace {

struct SplitLine {
  std::string entity;
  std::string label_token;
};

// Splits at the last '|'; the label is always the final field.
std::optional<SplitLine> split_entity_line(std::string_view line) {
  const std::size_t bar = line.rfind('|');
  if (bar == std::string_view::npos) return std::nullopt;
  SplitLine parts;
  parts.entity = trim(line.substr(0, bar));
  parts.label_token = trim(line.substr(bar + 1));
  if (parts.entity.empty() || parts.label_token.empty()) return std::nullopt;
  return parts;
}

bool is_fence_marker(std::string_view line) {
  return trim(line).rfind("```", 0) == 0;
}

}  // namespace

bool matches_entity_grammar(std::string_view line) {
  const auto parts = split_entity_line(line);
  if (!parts) return false;
  return !normalize_text(parts->entity).empty();
}

ParseReport parse_response(std::string_view response_text, PromptStrategy source) {
  ParseReport report;
  std::set<std::pair<std::string, EntityLabel>> seen;
  int line_no = 0;
  int ordinal = 0;
  for (const std::string& line : split_lines(response_text)) {
    ++line_no;
    if (trim(line).empty()) {
      ++report.blank_count;
      continue;
    }
    const auto parts = split_entity_line(line);
    if (!parts) {
      report.malformed.push_back({line_no, line, "no ' | ' delimiter"});
      continue;
    }
    std::string normalized = normalize_text(parts->entity);
    if (normalized.empty()) {
      report.malformed.push_back({line_no, line, "entity text empty after normalization"});
      continue;
    }
    auto label = label_from_string(parts->label_token);
    if (!label) {
      report.warnings.push_back(
          {line_no, "label '" + parts->label_token + "' not in vocabulary, mapped to unknown"});
      label = EntityLabel::Unknown;
    }
    if (!seen.emplace(normalized, *label).second) {
      ++report.duplicate_count;
      continue;
    }
    ExtractedEntity entity;
    entity.text = std::move(normalized);
    entity.raw_text = parts->entity;
    entity.label = *label;
    entity.source = source;
    entity.ordinal = ordinal++;
    report.entities.push_back(std::move(entity));
  }
  return report;
}

std::string strip_preamble(std::string_view response_text) {
  std::vector<std::string> lines = split_lines(response_text);
  std::erase_if(lines, [](const std::string& line) {
    return is_fence_marker(line) && !matches_entity_grammar(line);
  });

  std::size_t begin = 0;
  while (begin < lines.size() && !matches_entity_grammar(lines[begin])) ++begin;
  std::size_t end = lines.size();
  while (end > begin && !matches_entity_grammar(lines[end - 1])) --end;

  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (i > begin) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

}  // namespace medner
