#include "medner/prompt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "medner/errors.hpp"
#include "medner/text.hpp"

namespace medner {

namespace {

// Keep in sync with templates/default_v1.tmpl (checked by a unit test).
constexpr std::string_view kDefaultTemplate = R"(version = v1

[task_definition]
You are a clinical language assistant. Read the clinical text at the end of
this prompt, extract every medical entity it mentions, and classify each
entity into exactly one category.

[context]
The text is an excerpt from a de-identified electronic health record, such as
a discharge summary. Sentences may contain zero, one, or several entities,
and the writing may use abbreviations and shorthand.

[category_definitions]
The categories are:
problem: a disease, symptom, or other clinical finding, for example <problem>hypertension</problem>.
test: a diagnostic, laboratory, or imaging procedure, for example <test>glucose</test>.
treatment: a medication, therapy, or other intervention, for example <treatment>aspirin</treatment>.

[output_format]
Respond with one entity per line, in exactly this form:
<entity text> | <label>
where <label> is problem, test, or treatment. Do not add numbering,
explanations, or any other text.

[unknown_instruction]
If you find an entity but cannot confidently assign one of the three
categories, label it unknown instead of guessing.

[few_shot_document]
The following annotated clinical document shows entities wrapped in XML-style
tags. Not every sentence contains an entity, and a sentence may contain
several entities from different categories.
"""
{FEW_SHOT_BLOCK}
"""

[few_shot_sentences]
The following annotated clinical sentences show entities wrapped in XML-style
tags. Every sentence contains at least one entity.
"""
{FEW_SHOT_BLOCK}
"""

[few_shot_entities]
The following lists show known entities for each category, one category per
line, wrapped in XML-style tags and separated by commas.
"""
{FEW_SHOT_BLOCK}
"""

[test_input]
Extract and classify the entities from the following clinical text:
{TEST_INPUT}
)";

constexpr std::string_view kFewShotPlaceholder = "{FEW_SHOT_BLOCK}";
constexpr std::string_view kTestInputPlaceholder = "{TEST_INPUT}";

std::string_view few_shot_section_name(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::FewShotDocument:
      return "few_shot_document";
    case PromptStrategy::FewShotSentences:
      return "few_shot_sentences";
    case PromptStrategy::FewShotEntities:
      return "few_shot_entities";
    case PromptStrategy::ZeroShot:
      break;
  }
  throw DataError("zero-shot has no few-shot section");
}

std::string substitute(std::string text, std::string_view placeholder, std::string_view value) {
  const std::size_t pos = text.find(placeholder);
  if (pos == std::string::npos) {
    throw DataError("template section is missing placeholder " + std::string(placeholder));
  }
  text.replace(pos, placeholder.size(), value);
  return text;
}

std::string strip_trailing_blank_lines(std::string block) {
  while (!block.empty() && (block.back() == '\n' || block.back() == ' ' || block.back() == '\t')) {
    block.pop_back();
  }
  return block;
}

}  // namespace

std::size_t estimate_tokens(std::string_view text) {
  return (text.size() + 3) / 4;
}

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate tmpl;
  tmpl.source_ = std::string(text);

  std::string current_name;
  std::string current_body;
  auto flush = [&]() {
    if (current_name.empty()) return;
    tmpl.sections_.emplace_back(current_name, strip_trailing_blank_lines(current_body));
    current_name.clear();
    current_body.clear();
  };

  for (const std::string& line : split_lines(text)) {
    const std::string trimmed = trim(line);
    if (current_name.empty() && tmpl.version_.empty()) {
      if (trimmed.empty() || trimmed[0] == '#') continue;
      if (trimmed.rfind("version", 0) == 0) {
        const std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos) throw DataError("template version line needs '='");
        tmpl.version_ = trim(trimmed.substr(eq + 1));
        continue;
      }
    }
    if (trimmed.size() >= 2 && trimmed.front() == '[' && trimmed.back() == ']') {
      flush();
      current_name = trimmed.substr(1, trimmed.size() - 2);
      continue;
    }
    if (current_name.empty()) {
      if (trimmed.empty()) continue;
      throw DataError("template text before first [section]: " + line);
    }
    current_body += line;
    current_body.push_back('\n');
  }
  flush();

  if (tmpl.version_.empty()) throw DataError("template has no version line");
  for (const char* required :
       {"task_definition", "context", "category_definitions", "output_format",
        "unknown_instruction", "few_shot_document", "few_shot_sentences", "few_shot_entities",
        "test_input"}) {
    if (!tmpl.has_section(required)) {
      throw DataError("template is missing section [" + std::string(required) + "]");
    }
  }
  return tmpl;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open template file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

const PromptTemplate& PromptTemplate::builtin_default() {
  static const PromptTemplate tmpl = PromptTemplate::parse(kDefaultTemplate);
  return tmpl;
}

const std::string& PromptTemplate::section(std::string_view name) const {
  for (const auto& [section_name, body] : sections_) {
    if (section_name == name) return body;
  }
  throw DataError("template has no section [" + std::string(name) + "]");
}

bool PromptTemplate::has_section(std::string_view name) const {
  return std::any_of(sections_.begin(), sections_.end(),
                     [&](const auto& s) { return s.first == name; });
}

const std::string& PromptArtifact::section(std::string_view name) const {
  for (const auto& [section_name, body] : sections) {
    if (section_name == name) return body;
  }
  throw DataError("prompt has no section [" + std::string(name) + "]");
}

bool PromptArtifact::has_section(std::string_view name) const {
  return std::any_of(sections.begin(), sections.end(),
                     [&](const auto& s) { return s.first == name; });
}

std::string PromptArtifact::text() const {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += sections[i].second;
  }
  return out;
}

std::string render_few_shot_block(const SampleSet& samples) {
  switch (samples.strategy) {
    case PromptStrategy::ZeroShot:
      return "";
    case PromptStrategy::FewShotDocument: {
      std::string out;
      for (std::size_t d = 0; d < samples.documents.size(); ++d) {
        if (d > 0) out += "\n\n";
        const TaggedDocument& doc = samples.documents[d];
        for (std::size_t i = 0; i < doc.lines.size(); ++i) {
          if (i > 0) out.push_back('\n');
          out += doc.lines[i];
        }
      }
      return out;
    }
    case PromptStrategy::FewShotSentences: {
      std::string out;
      for (std::size_t i = 0; i < samples.sentences.size(); ++i) {
        if (i > 0) out.push_back('\n');
        out += samples.sentences[i].text;
      }
      return out;
    }
    case PromptStrategy::FewShotEntities: {
      std::string out;
      bool first_line = true;
      for (EntityLabel label : kGoldLabels) {
        const auto it = samples.entities.find(label);
        if (it == samples.entities.end() || it->second.empty()) continue;
        if (!first_line) out.push_back('\n');
        first_line = false;
        const std::string_view name = label_name(label);
        for (std::size_t i = 0; i < it->second.size(); ++i) {
          if (i > 0) out += ", ";
          out += "<";
          out += name;
          out += ">";
          out += it->second[i];
          out += "</";
          out += name;
          out += ">";
        }
      }
      return out;
    }
  }
  return "";
}

SampleSet trim_entity_samples(const SampleSet& samples, double fraction) {
  if (samples.strategy != PromptStrategy::FewShotEntities) {
    throw DataError("trim rule applies only to entity sample sets");
  }
  if (fraction <= 0.0 || fraction >= 1.0) {
    throw DataError("trim fraction must lie in (0,1)");
  }
  SampleSet trimmed = samples;
  for (auto& [label, list] : trimmed.entities) {
    const auto removed =
        static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(list.size())));
    list.resize(list.size() - std::min(removed, list.size()));
  }
  return trimmed;
}

namespace {

PromptArtifact render(PromptStrategy strategy, const SampleSet& samples,
                      const ClinicalDocument& test_document, const PromptTemplate& tmpl) {
  PromptArtifact artifact;
  artifact.strategy = strategy;
  artifact.template_version = tmpl.version();

  for (const char* name :
       {"task_definition", "context", "category_definitions", "output_format",
        "unknown_instruction"}) {
    artifact.sections.emplace_back(name, tmpl.section(name));
  }
  if (strategy != PromptStrategy::ZeroShot) {
    const std::string block = render_few_shot_block(samples);
    artifact.sections.emplace_back(
        "few_shot_block",
        substitute(tmpl.section(few_shot_section_name(strategy)), kFewShotPlaceholder, block));
  }
  artifact.sections.emplace_back(
      "test_input", substitute(tmpl.section("test_input"), kTestInputPlaceholder,
                               test_document.text()));
  artifact.token_estimate = estimate_tokens(artifact.text());
  return artifact;
}

}  // namespace

PromptArtifact build_prompt(PromptStrategy strategy, const SampleSet& samples,
                            const ClinicalDocument& test_document,
                            const PromptTemplate& tmpl, const TokenBudget& budget) {
  if (samples.strategy != strategy) {
    throw DataError("sample set was built for a different strategy");
  }
  if (test_document.lines.empty()) {
    throw DataError("test document is empty");
  }

  PromptArtifact artifact = render(strategy, samples, test_document, tmpl);
  if (budget.max_tokens == 0 || artifact.token_estimate <= budget.max_tokens) {
    return artifact;
  }
  if (strategy != PromptStrategy::FewShotEntities) {
    throw BudgetUnsatisfiable("prompt estimate " + std::to_string(artifact.token_estimate) +
                              " exceeds budget " + std::to_string(budget.max_tokens) +
                              " and strategy has no trim rule");
  }
  const SampleSet trimmed = trim_entity_samples(samples, budget.trim_fraction);
  artifact = render(strategy, trimmed, test_document, tmpl);
  if (artifact.token_estimate > budget.max_tokens) {
    throw BudgetUnsatisfiable("prompt estimate " + std::to_string(artifact.token_estimate) +
                              " still exceeds budget " + std::to_string(budget.max_tokens) +
                              " after trimming");
  }
  return artifact;
}

}  // namespace medner
