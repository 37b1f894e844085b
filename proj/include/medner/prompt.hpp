#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "medner/corpus.hpp"
#include "medner/types.hpp"

namespace medner {

/// Heuristic token estimator: ceil(byte_length / 4). Deterministic and
/// monotone in length; not a model tokenizer.
std::size_t estimate_tokens(std::string_view text);

struct TokenBudget {
  std::size_t max_tokens = 0;   // 0 disables the budget check
  double trim_fraction = 0.10;  // applied once when FewShotEntities overflows
};

/// Prompt skeleton parsed from a versioned template file. The body is split
/// into named sections; few-shot sections carry the {FEW_SHOT_BLOCK}
/// placeholder, the test_input section carries {TEST_INPUT}.
class PromptTemplate {
 public:
  static PromptTemplate parse(std::string_view text);
  static PromptTemplate load(const std::filesystem::path& path);
  /// Compiled-in copy of templates/default_v1.tmpl.
  static const PromptTemplate& builtin_default();

  const std::string& version() const { return version_; }
  const std::string& section(std::string_view name) const;  // throws DataError
  bool has_section(std::string_view name) const;
  const std::string& source_text() const { return source_; }

 private:
  std::string version_;
  std::string source_;
  std::vector<std::pair<std::string, std::string>> sections_;
};

/// A fully rendered prompt. Sections appear in template order; few_shot_block
/// is present iff the strategy is not ZeroShot and test_input is always last.
struct PromptArtifact {
  PromptStrategy strategy = PromptStrategy::ZeroShot;
  std::vector<std::pair<std::string, std::string>> sections;
  std::size_t token_estimate = 0;
  std::string template_version;

  const std::string& section(std::string_view name) const;  // throws DataError
  bool has_section(std::string_view name) const;
  /// Sections joined with blank lines; what gets sent to the model.
  std::string text() const;
};

/// Removes ceil(fraction * size) items from the tail of each per-label list.
/// The deterministic ordering is the lexicographic order SampleSet maintains.
SampleSet trim_entity_samples(const SampleSet& samples, double fraction);

/// Renders the template for a strategy. If the estimate exceeds the budget and
/// the strategy is FewShotEntities, the trim rule is applied once before
/// returning; a prompt still over budget raises BudgetUnsatisfiable.
PromptArtifact build_prompt(PromptStrategy strategy, const SampleSet& samples,
                            const ClinicalDocument& test_document,
                            const PromptTemplate& tmpl, const TokenBudget& budget);

/// The few-shot payload rendered between triple quotes, exposed for tests.
std::string render_few_shot_block(const SampleSet& samples);

}  // namespace medner
