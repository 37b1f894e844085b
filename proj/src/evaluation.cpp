#include "medner/evaluation.hpp"

#include <algorithm>
#include <cstddef>
#include <tuple>

#include "medner/errors.hpp"
#include "medner/text.hpp"

namespace medner {

namespace {

struct Candidate {
  double similarity;
  std::size_t pred_index;
  std::size_t gold_index;
};

}  // namespace

std::vector<MatchRecord> match_predictions(const std::vector<PredictedItem>& predictions,
                                           const std::vector<GoldEntity>& gold, double tau,
                                           EmbeddingProvider& provider) {
  if (gold.empty()) {
    throw ZeroGold("cannot match predictions against an empty gold set");
  }
  if (tau <= 0.0 || tau > 1.0) {
    throw DataError("similarity threshold must lie in (0, 1], got " + std::to_string(tau));
  }

  // Embed predictions and gold in a single batch so cached providers see one
  // request; gold surface forms are normalized the same way predictions were.
  std::vector<std::string> texts;
  texts.reserve(predictions.size() + gold.size());
  for (const auto& p : predictions) texts.push_back(p.text);
  for (const auto& g : gold) texts.push_back(normalize_text(g.text));
  std::vector<EmbeddingVector> vectors = provider.embed_batch(texts);

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    for (std::size_t j = 0; j < gold.size(); ++j) {
      double sim = cosine_similarity(vectors[i], vectors[predictions.size() + j]);
      if (sim >= tau) candidates.push_back(Candidate{sim, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    return std::tie(b.similarity, a.pred_index, a.gold_index) <
           std::tie(a.similarity, b.pred_index, b.gold_index);
  });

  std::vector<bool> pred_used(predictions.size(), false);
  std::vector<bool> gold_used(gold.size(), false);
  std::vector<MatchRecord> records(predictions.size());
  for (std::size_t i = 0; i < predictions.size(); ++i) records[i].predicted = predictions[i];
  for (const auto& c : candidates) {
    if (pred_used[c.pred_index] || gold_used[c.gold_index]) continue;
    pred_used[c.pred_index] = true;
    gold_used[c.gold_index] = true;
    records[c.pred_index].gold = gold[c.gold_index];
    records[c.pred_index].similarity = c.similarity;
  }
  return records;
}

ExtractionMetrics extraction_metrics(const std::vector<MatchRecord>& records, int gold_total) {
  if (gold_total <= 0) {
    throw ZeroGold("extraction metrics need a positive gold count, got " +
                   std::to_string(gold_total));
  }
  ExtractionMetrics m;
  m.predict = static_cast<int>(records.size());
  m.gold_total = gold_total;
  for (const auto& r : records) {
    if (r.gold.has_value()) ++m.match;
    if (r.predicted.label == EntityLabel::Unknown) ++m.unknown;
  }
  m.accuracy = static_cast<double>(m.match) / static_cast<double>(gold_total);
  return m;
}

ClassificationMetrics classification_metrics(const std::vector<MatchRecord>& records) {
  int matched = 0;
  std::map<EntityLabel, int> tp, fp, fn, support;
  for (EntityLabel l : kGoldLabels) tp[l] = fp[l] = fn[l] = support[l] = 0;

  for (const auto& r : records) {
    if (!r.gold.has_value()) continue;
    ++matched;
    EntityLabel truth = r.gold->label;
    EntityLabel predicted = r.predicted.label;
    ++support[truth];
    if (predicted == truth && predicted != EntityLabel::Unknown) {
      ++tp[truth];
    } else {
      ++fn[truth];
      if (predicted != EntityLabel::Unknown) ++fp[predicted];
    }
  }
  if (matched == 0) {
    throw EmptyMatchSet("classification metrics need at least one matched pair");
  }

  ClassificationMetrics out;
  for (EntityLabel l : kGoldLabels) {
    LabelMetrics lm;
    lm.support = support[l];
    lm.zero_support = support[l] == 0;
    int p_denom = tp[l] + fp[l];
    int r_denom = tp[l] + fn[l];
    lm.precision = p_denom == 0 ? 0.0 : static_cast<double>(tp[l]) / p_denom;
    lm.recall = r_denom == 0 ? 0.0 : static_cast<double>(tp[l]) / r_denom;
    lm.f1 = lm.precision + lm.recall == 0.0
                ? 0.0
                : 2.0 * lm.precision * lm.recall / (lm.precision + lm.recall);
    out.per_label[l] = lm;

    out.macro.precision += lm.precision / kGoldLabels.size();
    out.macro.recall += lm.recall / kGoldLabels.size();
    out.macro.f1 += lm.f1 / kGoldLabels.size();

    double weight = static_cast<double>(lm.support) / matched;
    out.weighted.precision += weight * lm.precision;
    out.weighted.recall += weight * lm.recall;
    out.weighted.f1 += weight * lm.f1;
  }
  return out;
}

TimingReport timing_report(
    const std::map<PromptStrategy, std::vector<CompletionRecord>>& records) {
  TimingReport report;
  for (const auto& [strategy, recs] : records) {
    double latency = 0.0;
    for (const auto& r : recs) latency += r.latency_seconds;
    report.rows.push_back(TimingRow{strategy, latency});
    report.total_seconds += latency;
  }
  return report;
}

}  // namespace medner
