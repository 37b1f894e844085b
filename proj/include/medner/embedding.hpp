#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "medner/transport.hpp"

namespace medner {

struct EmbeddingVector {
  std::vector<double> values;
  std::string provider_id;

  std::size_t dimension() const { return values.size(); }
};

/// dot(a,b) / (|a||b|), clamped to [-1, 1]. Throws DimensionMismatch and
/// ZeroVector.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::string id() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) = 0;

  /// Single-text convenience over embed_batch.
  EmbeddingVector embed(const std::string& text);
};

/// Deterministic offline embedder: character-trigram hashed term frequencies
/// over the normalized text (padded with one space on each side), dimension
/// 512, L2-normalized. Lets the whole pipeline run with no model or network.
class LocalTrigramProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 512;

  std::string id() const override { return "local-trigram-512"; }
  std::size_t dimension() const override { return kDimension; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;
};

/// Clinical-domain encoder behind an HTTP endpoint.
/// Wire format: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(std::shared_ptr<Transport> transport, std::string endpoint,
                          std::string provider_id, std::size_t dimension,
                          std::string api_key_env = "MEDNER_EMBED_API_KEY");

  std::string id() const override { return provider_id_; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::shared_ptr<Transport> transport_;
  std::string endpoint_;
  std::string provider_id_;
  std::size_t dimension_;
  std::string api_key_env_;
};

/// One JSON vector per (provider_id, text) key in a content-addressed
/// directory; writes are serialized, readers need no lock.
class EmbeddingCache {
 public:
  explicit EmbeddingCache(std::filesystem::path dir);

  std::optional<EmbeddingVector> load(const std::string& provider_id,
                                      const std::string& text) const;
  void store(const std::string& text, const EmbeddingVector& vector);
  static std::string key_for(const std::string& provider_id, const std::string& text);
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mutex_;
};

/// Wraps a provider with an EmbeddingCache; only cache misses hit the inner
/// provider.
class CachingProvider final : public EmbeddingProvider {
 public:
  CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                  std::shared_ptr<EmbeddingCache> cache);

  std::string id() const override { return inner_->id(); }
  std::size_t dimension() const override { return inner_->dimension(); }
  std::vector<EmbeddingVector> embed_batch(const std::vector<std::string>& texts) override;

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::shared_ptr<EmbeddingCache> cache_;
};

}  // namespace medner
