#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "medner/corpus.hpp"
#include "medner/embedding.hpp"
#include "medner/gateway.hpp"
#include "medner/types.hpp"

namespace medner {

/// One row fed to the matcher: a predicted surface form plus its label,
/// whether it came from a single strategy run or from the ensemble.
struct PredictedItem {
  std::string text;
  EntityLabel label = EntityLabel::Unknown;

  bool operator==(const PredictedItem&) const = default;
};

struct MatchRecord {
  PredictedItem predicted;
  std::optional<GoldEntity> gold;    // present iff matched
  std::optional<double> similarity;  // present iff matched, always >= tau
};

/// One-to-one greedy matching: every (prediction, gold) pair with similarity
/// >= tau is a candidate; candidates are accepted in descending similarity
/// (ties: prediction order, then gold order); each side is used at most once.
/// Records come back in prediction order.
std::vector<MatchRecord> match_predictions(const std::vector<PredictedItem>& predictions,
                                           const std::vector<GoldEntity>& gold, double tau,
                                           EmbeddingProvider& provider);

struct ExtractionMetrics {
  int predict = 0;
  int match = 0;
  int unknown = 0;  // predictions carrying the Unknown label
  int gold_total = 0;
  double accuracy = 0.0;  // match / gold_total
};

ExtractionMetrics extraction_metrics(const std::vector<MatchRecord>& records, int gold_total);

struct LabelMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;            // matched pairs whose gold label is this one
  bool zero_support = false;  // no matched pair carries this gold label
};

struct AggregateMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

struct ClassificationMetrics {
  std::map<EntityLabel, LabelMetrics> per_label;  // Problem, Test, Treatment
  AggregateMetrics macro;                         // unweighted mean over the three labels
  AggregateMetrics weighted;                      // support-weighted mean
};

/// Confusion-matrix metrics over the matched records (unmatched ones are
/// ignored). Gold labels are truth; predicted labels, Unknown included, are
/// the system output, and Unknown is never a true positive.
ClassificationMetrics classification_metrics(const std::vector<MatchRecord>& records);

struct TimingRow {
  PromptStrategy strategy;
  double latency_seconds = 0.0;
};

struct TimingReport {
  std::vector<TimingRow> rows;  // strategy display order
  double total_seconds = 0.0;
};

TimingReport timing_report(const std::map<PromptStrategy, std::vector<CompletionRecord>>& records);

}  // namespace medner
