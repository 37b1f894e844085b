#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace medner {

/// Canonical normalization used for dedup, matching, and embedding inputs:
/// ASCII lower-case, internal whitespace collapsed to single spaces, then
/// leading/trailing punctuation and whitespace stripped until stable.
/// Idempotent: normalize(normalize(s)) == normalize(s).
std::string normalize_text(std::string_view text);

/// Byte ranges [begin, end) of whitespace-delimited tokens in a line.
struct TokenSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

std::vector<TokenSpan> token_spans(std::string_view line);

std::string to_lower_ascii(std::string_view text);

/// Splits on '\n'; a trailing newline does not produce an extra empty line.
std::vector<std::string> split_lines(std::string_view text);

std::string trim(std::string_view text);

std::vector<std::string> split_csv(std::string_view text);

/// splitmix64: tiny fully-specified PRNG so sampling is bit-identical across
/// machines and standard libraries (std::shuffle is implementation-defined).
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform value in [0, bound) via rejection sampling; bound > 0.
  std::uint64_t next_below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

/// Deterministic Fisher-Yates shuffle driven by SplitMix64.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
  SplitMix64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace medner
