#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace medner {

/// Clinical entity category. Gold annotations carry only the first three;
/// Unknown appears in model predictions and ensemble abstentions.
enum class EntityLabel { Problem, Test, Treatment, Unknown };

constexpr std::array<EntityLabel, 3> kGoldLabels = {
    EntityLabel::Problem, EntityLabel::Test, EntityLabel::Treatment};

constexpr std::array<EntityLabel, 4> kAllLabels = {
    EntityLabel::Problem, EntityLabel::Test, EntityLabel::Treatment,
    EntityLabel::Unknown};

std::string_view label_name(EntityLabel label);

/// Case-insensitive lookup; returns nullopt for tokens outside the vocabulary.
std::optional<EntityLabel> label_from_string(std::string_view token);

/// Prompting strategies. The ensemble is a composition of the three few-shot
/// variants, not a renderable strategy of its own.
enum class PromptStrategy { ZeroShot, FewShotDocument, FewShotSentences, FewShotEntities };

constexpr std::array<PromptStrategy, 4> kAllStrategies = {
    PromptStrategy::ZeroShot, PromptStrategy::FewShotDocument,
    PromptStrategy::FewShotSentences, PromptStrategy::FewShotEntities};

/// Short token used in CLI flags, file names, and for deterministic ordering.
std::string_view strategy_token(PromptStrategy strategy);

/// Human-readable name used in report tables.
std::string_view strategy_display_name(PromptStrategy strategy);

std::optional<PromptStrategy> strategy_from_token(std::string_view token);

/// Strategies sorted by token ("doc" < "ent" < "sent" < "zero"); the canonical
/// scan order for ensemble flattening and result assembly.
std::array<PromptStrategy, 4> strategies_in_token_order();

}  // namespace medner
