#include <doctest.h>

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "medner/embedding.hpp"
#include "medner/errors.hpp"
#include "medner/text.hpp"
#include "stub_provider.hpp"
#include "temp_dir.hpp"

using namespace medner;
using namespace medner::testsupport;

namespace {

EmbeddingVector vec(std::vector<double> values) {
  return EmbeddingVector{std::move(values), "test"};
}

}  // namespace

TEST_CASE("cosine similarity of the hand-computed case (1,0)x(1,1)") {
  CHECK(cosine_similarity(vec({1, 0}), vec({1, 1})) == doctest::Approx(0.70711).epsilon(1e-5));
}

TEST_CASE("cosine similarity basics") {
  CHECK(cosine_similarity(vec({3, 4}), vec({3, 4})) == doctest::Approx(1.0));
  CHECK(cosine_similarity(vec({1, 0}), vec({0, 1})) == doctest::Approx(0.0));
  CHECK(cosine_similarity(vec({1, 0}), vec({-1, 0})) == doctest::Approx(-1.0));
}

TEST_CASE("cosine similarity rejects mismatched dimensions and zero vectors") {
  CHECK_THROWS_AS(cosine_similarity(vec({1, 0}), vec({1, 0, 0})), DimensionMismatch);
  CHECK_THROWS_AS(cosine_similarity(vec({0, 0}), vec({1, 0})), ZeroVector);
}

TEST_CASE("cosine similarity is symmetric, self-1, and scale-invariant") {
  SplitMix64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const std::size_t dim = 2 + rng.next_below(6);
    const auto a = vec(random_unit_vector(rng, dim));
    const auto b = vec(random_unit_vector(rng, dim));

    CHECK(std::abs(cosine_similarity(a, b) - cosine_similarity(b, a)) < 1e-9);
    CHECK(std::abs(cosine_similarity(a, a) - 1.0) < 1e-9);

    const double alpha = 0.1 + 5.0 * random_unit_interval(rng);
    auto scaled = a;
    for (double& v : scaled.values) v *= alpha;
    CHECK(std::abs(cosine_similarity(scaled, b) - cosine_similarity(a, b)) < 1e-9);
  }
}

TEST_CASE("local trigram provider is deterministic, unit-norm, and case-insensitive") {
  LocalTrigramProvider provider;
  CHECK(provider.id() == "local-trigram-512");
  CHECK(provider.dimension() == 512);

  const auto first = provider.embed("chest pain");
  const auto second = provider.embed("chest pain");
  CHECK(first.values == second.values);
  CHECK(first.dimension() == 512);

  double norm = 0.0;
  for (double v : first.values) norm += v * v;
  CHECK(norm == doctest::Approx(1.0));

  // embeds the normalized text, so case and padding do not matter
  const auto shouted = provider.embed("  CHEST   PAIN ");
  CHECK(cosine_similarity(first, shouted) == doctest::Approx(1.0));

  // unrelated strings are far apart, near-identical ones are close
  const auto other = provider.embed("angiography");
  CHECK(cosine_similarity(first, other) < 0.5);
  const auto variant = provider.embed("chest pains");
  CHECK(cosine_similarity(first, variant) > 0.8);
}

TEST_CASE("local trigram provider rejects text that normalizes to nothing") {
  LocalTrigramProvider provider;
  CHECK_THROWS_AS(provider.embed("  .,; "), EmptyText);
}

TEST_CASE("embedding cache round-trips vectors by (provider, text)") {
  ScopedTempDir tmp("medner-embcache");
  EmbeddingCache cache(tmp.path());

  EmbeddingVector vector;
  vector.provider_id = "prov-a";
  vector.values = {0.25, -1.5, 3.0};
  cache.store("some text", vector);

  const auto loaded = cache.load("prov-a", "some text");
  REQUIRE(loaded.has_value());
  CHECK(loaded->values == vector.values);
  CHECK(loaded->provider_id == "prov-a");

  CHECK_FALSE(cache.load("prov-b", "some text").has_value());
  CHECK_FALSE(cache.load("prov-a", "other text").has_value());
}

TEST_CASE("caching provider only forwards cache misses") {
  ScopedTempDir tmp("medner-cachingprov");
  auto stub = std::make_shared<StubEmbeddingProvider>(2);
  stub->set("alpha", {1.0, 0.0});
  stub->set("beta", {0.0, 1.0});
  auto cache = std::make_shared<EmbeddingCache>(tmp.path());
  CachingProvider provider(stub, cache);

  CHECK(provider.id() == "stub");
  CHECK(provider.dimension() == 2);

  auto first = provider.embed_batch({"alpha", "beta", "alpha"});
  CHECK(first.size() == 3);
  CHECK(stub->embedded_texts() == 3);  // duplicate within one batch still misses twice

  auto second = provider.embed_batch({"alpha", "beta"});
  CHECK(stub->embedded_texts() == 3);  // all hits now
  CHECK(second[0].values == std::vector<double>{1.0, 0.0});
  CHECK(second[1].values == std::vector<double>{0.0, 1.0});
}

TEST_CASE("remote provider parses vectors and reports endpoint failures") {
  // wire-level tests are in the gateway suite; here only the error taxonomy
  auto transport = std::make_shared<FailingTransport>();
  RemoteEmbeddingProvider provider(transport, "https://embeddings.invalid/v1", "clinical-encoder",
                                   3);
  CHECK(provider.id() == "clinical-encoder");
  CHECK_THROWS_AS(provider.embed_batch({"chest pain"}), ProviderUnavailable);
}
