#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "medner/config.hpp"
#include "medner/corpus.hpp"
#include "medner/embedding.hpp"
#include "medner/manifest.hpp"
#include "medner/types.hpp"

namespace medner {

struct LoadedCorpus {
  std::vector<DocumentRecord> training;
  DocumentRecord test;
};

/// Reads <doc_id>.txt / <doc_id>.con pairs from the configured directories,
/// validates every annotation against its document (errors cite file and
/// line), and splits off the test document.
LoadedCorpus load_corpus(const PipelineConfig& config);

/// The parsed-corpus artifact `ingest` writes and later commands read.
void save_corpus_cache(const LoadedCorpus& corpus, const std::filesystem::path& path);
LoadedCorpus load_corpus_cache(const std::filesystem::path& path);

std::filesystem::path corpus_cache_path(const PipelineConfig& config);
std::filesystem::path run_dir(const PipelineConfig& config, const std::string& run_id);

/// Content-derived default run id, stable across invocations of the same
/// configuration so replayed runs land in the same directory. Strategy order
/// and duplicates in `strategies` do not affect the id.
std::string derive_run_id(const PipelineConfig& config,
                          const std::vector<PromptStrategy>& strategies);

/// Local or remote embedder per config, wrapped in the embedding cache.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const PipelineConfig& config);

int cmd_ingest(const PipelineConfig& config, std::ostream& out);
int cmd_run(const PipelineConfig& config, const std::vector<PromptStrategy>& strategies,
            const std::string& run_id_override, std::ostream& out);
int cmd_ensemble(const PipelineConfig& config, const std::string& run_id,
                 std::optional<double> tau_override, std::ostream& out);
int cmd_evaluate(const PipelineConfig& config, const std::string& run_id, std::ostream& out);
int cmd_report(const PipelineConfig& config, const std::string& run_id,
               const std::string& format, std::ostream& out);

}  // namespace medner
