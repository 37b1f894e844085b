#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "medner/gateway.hpp"
#include "medner/types.hpp"

namespace medner {

struct TrimEvent {
  PromptStrategy strategy = PromptStrategy::FewShotEntities;
  int trims_applied = 0;

  bool operator==(const TrimEvent&) const = default;
};

/// Everything needed to re-execute a run bit-identically in replay mode:
/// the manifest plus the referenced caches fully determine the outputs.
struct RunManifest {
  std::string run_id;
  std::string template_version;
  std::vector<PromptStrategy> strategies;  // strategies with entity files
  GenerationConfig generation;
  double tau = 0.92;
  std::uint64_t seed = 0;
  std::string mode;  // record / replay / live
  std::string embedding_provider_id;
  std::string completion_cache_digest;
  std::string embedding_cache_digest;
  std::string timestamp;  // UTC, ISO-8601
  std::vector<TrimEvent> trim_events;

  std::string to_json() const;  // stable key order, round-trips exactly
  static RunManifest from_json(const std::string& text);

  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

}  // namespace medner
