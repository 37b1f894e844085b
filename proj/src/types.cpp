#include "medner/types.hpp"

#include <algorithm>

#include "medner/text.hpp"

namespace medner {

std::string_view label_name(EntityLabel label) {
  switch (label) {
    case EntityLabel::Problem:
      return "problem";
    case EntityLabel::Test:
      return "test";
    case EntityLabel::Treatment:
      return "treatment";
    case EntityLabel::Unknown:
      return "unknown";
  }
  return "unknown";
}

std::optional<EntityLabel> label_from_string(std::string_view token) {
  const std::string lowered = to_lower_ascii(token);
  for (EntityLabel label : kAllLabels) {
    if (lowered == label_name(label)) return label;
  }
  return std::nullopt;
}

std::string_view strategy_token(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::ZeroShot:
      return "zero";
    case PromptStrategy::FewShotDocument:
      return "doc";
    case PromptStrategy::FewShotSentences:
      return "sent";
    case PromptStrategy::FewShotEntities:
      return "ent";
  }
  return "zero";
}

std::string_view strategy_display_name(PromptStrategy strategy) {
  switch (strategy) {
    case PromptStrategy::ZeroShot:
      return "Zero-shot";
    case PromptStrategy::FewShotDocument:
      return "Few-shot 1 (document)";
    case PromptStrategy::FewShotSentences:
      return "Few-shot 2 (sentences)";
    case PromptStrategy::FewShotEntities:
      return "Few-shot 3 (entities)";
  }
  return "Zero-shot";
}

std::optional<PromptStrategy> strategy_from_token(std::string_view token) {
  const std::string lowered = to_lower_ascii(token);
  for (PromptStrategy strategy : kAllStrategies) {
    if (lowered == strategy_token(strategy)) return strategy;
  }
  return std::nullopt;
}

std::array<PromptStrategy, 4> strategies_in_token_order() {
  std::array<PromptStrategy, 4> order = kAllStrategies;
  std::sort(order.begin(), order.end(), [](PromptStrategy a, PromptStrategy b) {
    return strategy_token(a) < strategy_token(b);
  });
  return order;
}

}  // namespace medner
