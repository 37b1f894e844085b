#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "medner/embedding.hpp"
#include "medner/response.hpp"
#include "medner/types.hpp"

namespace medner {

/// Per-strategy entity outputs feeding one ensemble run.
struct PredictionSet {
  std::map<PromptStrategy, std::vector<ExtractedEntity>> runs;
};

struct ClusterMember {
  ExtractedEntity entity;
  EmbeddingVector vector;
};

/// A leader cluster: the first member is the representative every candidate
/// was compared against at insertion time.
struct EntityCluster {
  std::vector<ClusterMember> members;

  const std::string& representative_text() const { return members.front().entity.text; }
  std::set<PromptStrategy> sources() const;
};

struct EnsemblePrediction {
  std::string text;  // representative entity string
  EntityLabel label = EntityLabel::Unknown;
  int support = 0;       // count of the winning label; 0 on abstention
  int cluster_size = 0;  // all members, Unknown-labeled ones included

  bool operator==(const EnsemblePrediction&) const = default;
};

/// Greedy leader clustering: scan in order, join the first existing cluster
/// whose representative has cosine similarity >= tau, else open a new cluster.
/// Result order is cluster creation order.
std::vector<EntityCluster> cluster_entities(const std::vector<ClusterMember>& items, double tau);

/// Majority vote with abstention: Unknown member labels never win; a label
/// wins only with a unique maximal frequency >= 2, otherwise the prediction
/// abstains (Unknown, support 0).
EnsemblePrediction majority_vote(const EntityCluster& cluster);

struct EnsembleResult {
  std::vector<EntityCluster> clusters;
  std::vector<EnsemblePrediction> predictions;  // cluster creation order
};

/// Flattens runs by strategy token order then ordinal, embeds every member
/// through the provider, clusters, and votes. Deterministic given inputs and
/// provider.
EnsembleResult run_ensemble(const PredictionSet& predictions, double tau,
                            EmbeddingProvider& provider);

constexpr double kDefaultTau = 0.92;

}  // namespace medner
