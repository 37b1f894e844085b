#include "medner/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "medner/errors.hpp"
#include "medner/hash.hpp"
#include "medner/text.hpp"

namespace medner {

namespace {

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("embedding dimensions differ: " + std::to_string(a.dimension()) +
                            " vs " + std::to_string(b.dimension()));
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    dot += a.values[i] * b.values[i];
    norm_a += a.values[i] * a.values[i];
    norm_b += b.values[i] * b.values[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ZeroVector("cosine similarity of a zero vector is undefined");
  }
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

EmbeddingVector EmbeddingProvider::embed(const std::string& text) {
  return embed_batch({text}).front();
}

std::vector<EmbeddingVector> LocalTrigramProvider::embed_batch(
    const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(texts.size());
  for (const std::string& text : texts) {
    const std::string normalized = normalize_text(text);
    if (normalized.empty()) {
      throw EmptyText("cannot embed text that is empty after normalization: '" + text + "'");
    }
    EmbeddingVector vec;
    vec.provider_id = id();
    vec.values.assign(kDimension, 0.0);
    const std::string padded = " " + normalized + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const std::uint64_t bucket = fnv1a64(std::string_view(padded).substr(i, 3)) % kDimension;
      vec.values[bucket] += 1.0;
    }
    double norm = 0.0;
    for (double v : vec.values) norm += v * v;
    norm = std::sqrt(norm);
    for (double& v : vec.values) v /= norm;
    vectors.push_back(std::move(vec));
  }
  return vectors;
}

RemoteEmbeddingProvider::RemoteEmbeddingProvider(std::shared_ptr<Transport> transport,
                                                 std::string endpoint, std::string provider_id,
                                                 std::size_t dimension, std::string api_key_env)
    : transport_(std::move(transport)),
      endpoint_(std::move(endpoint)),
      provider_id_(std::move(provider_id)),
      dimension_(dimension),
      api_key_env_(std::move(api_key_env)) {}

std::vector<EmbeddingVector> RemoteEmbeddingProvider::embed_batch(
    const std::vector<std::string>& texts) {
  for (const std::string& text : texts) {
    if (normalize_text(text).empty()) {
      throw EmptyText("cannot embed text that is empty after normalization: '" + text + "'");
    }
  }
  nlohmann::json request;
  request["texts"] = texts;

  HttpHeaders headers{{"Content-Type", "application/json"}};
  if (const char* key = std::getenv(api_key_env_.c_str()); key != nullptr && *key != '\0') {
    headers.emplace_back("Authorization", std::string("Bearer ") + key);
  }

  HttpResponse response;
  try {
    response = transport_->post(endpoint_, request.dump(), headers);
  } catch (const TransportFailure& e) {
    throw ProviderUnavailable(std::string("embedding endpoint unreachable: ") + e.what());
  }
  if (response.status != 200) {
    throw ProviderUnavailable("embedding endpoint returned status " +
                              std::to_string(response.status));
  }

  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(response.body);
  } catch (const nlohmann::json::exception& e) {
    throw ProviderUnavailable(std::string("embedding response is not valid JSON: ") + e.what());
  }
  if (!parsed.contains("vectors") || !parsed["vectors"].is_array() ||
      parsed["vectors"].size() != texts.size()) {
    throw ProviderUnavailable("embedding response missing a vector per input text");
  }

  std::vector<EmbeddingVector> vectors;
  vectors.reserve(texts.size());
  for (const auto& row : parsed["vectors"]) {
    EmbeddingVector vec;
    vec.provider_id = provider_id_;
    vec.values = row.get<std::vector<double>>();
    if (dimension_ != 0 && vec.dimension() != dimension_) {
      throw DimensionMismatch("endpoint returned dimension " + std::to_string(vec.dimension()) +
                              ", expected " + std::to_string(dimension_));
    }
    vectors.push_back(std::move(vec));
  }
  return vectors;
}

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

std::string EmbeddingCache::key_for(const std::string& provider_id, const std::string& text) {
  return sha256_hex(provider_id + '\x1f' + text);
}

std::optional<EmbeddingVector> EmbeddingCache::load(const std::string& provider_id,
                                                    const std::string& text) const {
  const std::filesystem::path path = dir_ / key_for(provider_id, text);
  std::ifstream in(path);
  if (!in) return std::nullopt;
  nlohmann::json record;
  try {
    in >> record;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (record.value("provider_id", "") != provider_id || record.value("text", "") != text) {
    return std::nullopt;  // key collision or stale file
  }
  EmbeddingVector vec;
  vec.provider_id = provider_id;
  vec.values = record.at("values").get<std::vector<double>>();
  return vec;
}

void EmbeddingCache::store(const std::string& text, const EmbeddingVector& vector) {
  nlohmann::json record;
  record["provider_id"] = vector.provider_id;
  record["text"] = text;
  record["values"] = vector.values;

  const std::filesystem::path path = dir_ / key_for(vector.provider_id, text);
  const std::filesystem::path tmp = path.string() + ".tmp";
  std::lock_guard<std::mutex> lock(write_mutex_);
  {
    std::ofstream out(tmp);
    out << record.dump(2) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingProvider> inner,
                                 std::shared_ptr<EmbeddingCache> cache)
    : inner_(std::move(inner)), cache_(std::move(cache)) {}

std::vector<EmbeddingVector> CachingProvider::embed_batch(const std::vector<std::string>& texts) {
  std::vector<EmbeddingVector> result(texts.size());
  std::vector<std::string> misses;
  std::vector<std::size_t> miss_slots;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (auto cached = cache_->load(inner_->id(), texts[i])) {
      result[i] = std::move(*cached);
    } else {
      misses.push_back(texts[i]);
      miss_slots.push_back(i);
    }
  }
  if (!misses.empty()) {
    std::vector<EmbeddingVector> fresh = inner_->embed_batch(misses);
    for (std::size_t i = 0; i < misses.size(); ++i) {
      cache_->store(misses[i], fresh[i]);
      result[miss_slots[i]] = std::move(fresh[i]);
    }
  }
  return result;
}

}  // namespace medner
