"""Prompt-based medical entity recognition over clinical text.

The heavy lifting lives in the compiled `medner._core` extension; this
package re-exports its public surface.
"""

from medner._core import (
    ALL_LABELS,
    ALL_STRATEGIES,
    DEFAULT_TAU,
    GOLD_LABELS,
    AggregateMetrics,
    ClassificationMetrics,
    ConceptParseResult,
    DataError,
    EmbeddingVector,
    EnsemblePrediction,
    EntityLabel,
    ExtractedEntity,
    ExtractionMetrics,
    GatewayError,
    GoldEntity,
    LabelMetrics,
    LocalTrigramProvider,
    MalformedAnnotation,
    MalformedLine,
    MatchRecord,
    MednerError,
    ParseReport,
    ParseWarning,
    PredictedItem,
    PromptStrategy,
    UsageError,
    __version__,
    classification_metrics,
    cluster_texts,
    cosine_similarity,
    estimate_tokens,
    extraction_metrics,
    label_from_string,
    label_name,
    match_predictions,
    matches_entity_grammar,
    mention_counts,
    normalize_text,
    parse_concept_text,
    parse_response,
    run_ensemble,
    serialize_concept_line,
    strategy_display_name,
    strategy_from_token,
    strategy_token,
    strip_preamble,
    tag_text,
    untag_text,
)

__all__ = [
    "ALL_LABELS",
    "ALL_STRATEGIES",
    "DEFAULT_TAU",
    "GOLD_LABELS",
    "AggregateMetrics",
    "ClassificationMetrics",
    "ConceptParseResult",
    "DataError",
    "EmbeddingVector",
    "EnsemblePrediction",
    "EntityLabel",
    "ExtractedEntity",
    "ExtractionMetrics",
    "GatewayError",
    "GoldEntity",
    "LabelMetrics",
    "LocalTrigramProvider",
    "MalformedAnnotation",
    "MalformedLine",
    "MatchRecord",
    "MednerError",
    "ParseReport",
    "ParseWarning",
    "PredictedItem",
    "PromptStrategy",
    "UsageError",
    "__version__",
    "classification_metrics",
    "cluster_texts",
    "cosine_similarity",
    "estimate_tokens",
    "extraction_metrics",
    "label_from_string",
    "label_name",
    "match_predictions",
    "matches_entity_grammar",
    "mention_counts",
    "normalize_text",
    "parse_concept_text",
    "parse_response",
    "run_ensemble",
    "serialize_concept_line",
    "strategy_display_name",
    "strategy_from_token",
    "strategy_token",
    "strip_preamble",
    "tag_text",
    "untag_text",
]
