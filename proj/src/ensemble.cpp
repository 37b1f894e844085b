#include "medner/ensemble.hpp"

#include <algorithm>
#include <array>

#include "medner/errors.hpp"

namespace medner {

std::set<PromptStrategy> EntityCluster::sources() const {
  std::set<PromptStrategy> out;
  for (const auto& m : members) out.insert(m.entity.source);
  return out;
}

std::vector<EntityCluster> cluster_entities(const std::vector<ClusterMember>& items, double tau) {
  if (tau <= 0.0 || tau > 1.0) {
    throw DataError("similarity threshold must lie in (0, 1], got " + std::to_string(tau));
  }
  std::vector<EntityCluster> clusters;
  for (const auto& item : items) {
    bool placed = false;
    for (auto& cluster : clusters) {
      double sim = cosine_similarity(cluster.members.front().vector, item.vector);
      if (sim >= tau) {
        cluster.members.push_back(item);
        placed = true;
        break;
      }
    }
    if (!placed) clusters.push_back(EntityCluster{{item}});
  }
  return clusters;
}

EnsemblePrediction majority_vote(const EntityCluster& cluster) {
  if (cluster.members.empty()) {
    throw DataError("cannot vote on an empty cluster");
  }
  std::array<int, 3> counts{};  // Problem, Test, Treatment
  for (const auto& m : cluster.members) {
    switch (m.entity.label) {
      case EntityLabel::Problem: ++counts[0]; break;
      case EntityLabel::Test: ++counts[1]; break;
      case EntityLabel::Treatment: ++counts[2]; break;
      case EntityLabel::Unknown: break;  // never a candidate
    }
  }

  EnsemblePrediction pred;
  pred.text = cluster.representative_text();
  pred.cluster_size = static_cast<int>(cluster.members.size());

  int best = 0;
  int best_index = -1;
  bool tied = false;
  for (int i = 0; i < 3; ++i) {
    if (counts[i] > best) {
      best = counts[i];
      best_index = i;
      tied = false;
    } else if (counts[i] == best && counts[i] > 0) {
      tied = true;
    }
  }

  if (best >= 2 && !tied) {
    pred.label = kGoldLabels[static_cast<std::size_t>(best_index)];
    pred.support = best;
  }  // else abstain: Unknown with support 0
  return pred;
}

EnsembleResult run_ensemble(const PredictionSet& predictions, double tau,
                            EmbeddingProvider& provider) {
  if (predictions.runs.size() < 2) {
    throw DataError("ensembling needs entity runs from at least two strategies, got " +
                    std::to_string(predictions.runs.size()));
  }
  for (const auto& [strategy, entities] : predictions.runs) {
    for (const auto& e : entities) {
      if (e.source != strategy) {
        throw DataError("entity '" + e.text + "' filed under strategy '" +
                        std::string(strategy_token(strategy)) + "' but tagged with source '" +
                        std::string(strategy_token(e.source)) + "'");
      }
    }
  }

  // Flatten in strategy token order (doc < ent < sent < zero), then per-run
  // ordinal, so clustering sees a deterministic scan order.
  std::vector<ExtractedEntity> flat;
  for (PromptStrategy s : strategies_in_token_order()) {
    auto it = predictions.runs.find(s);
    if (it == predictions.runs.end()) continue;
    std::vector<ExtractedEntity> run = it->second;
    std::stable_sort(run.begin(), run.end(),
                     [](const ExtractedEntity& a, const ExtractedEntity& b) {
                       return a.ordinal < b.ordinal;
                     });
    flat.insert(flat.end(), run.begin(), run.end());
  }

  std::vector<std::string> texts;
  texts.reserve(flat.size());
  for (const auto& e : flat) texts.push_back(e.text);
  std::vector<EmbeddingVector> vectors = provider.embed_batch(texts);

  std::vector<ClusterMember> members;
  members.reserve(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    members.push_back(ClusterMember{flat[i], vectors[i]});
  }

  EnsembleResult result;
  result.clusters = cluster_entities(members, tau);
  result.predictions.reserve(result.clusters.size());
  for (const auto& cluster : result.clusters) {
    result.predictions.push_back(majority_vote(cluster));
  }
  return result;
}

}  // namespace medner
