#include "medner/text.hpp"

#include <cctype>

namespace medner {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_punct(unsigned char c) { return std::ispunct(c) != 0; }

}  // namespace

std::string to_lower_ascii(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

std::string normalize_text(std::string_view text) {
  std::string s = to_lower_ascii(text);

  // collapse whitespace runs to single spaces, trimming the ends
  std::string collapsed;
  collapsed.reserve(s.size());
  bool pending_space = false;
  for (unsigned char c : s) {
    if (is_space(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) {
      collapsed.push_back(' ');
      pending_space = false;
    }
    collapsed.push_back(static_cast<char>(c));
  }

  // strip leading/trailing punctuation; stripping may expose more whitespace
  // or punctuation, so iterate until stable
  std::size_t begin = 0;
  std::size_t end = collapsed.size();
  while (begin < end) {
    const unsigned char front = static_cast<unsigned char>(collapsed[begin]);
    const unsigned char back = static_cast<unsigned char>(collapsed[end - 1]);
    if (is_punct(front) || is_space(front)) {
      ++begin;
    } else if (is_punct(back) || is_space(back)) {
      --end;
    } else {
      break;
    }
  }
  return collapsed.substr(begin, end - begin);
}

std::vector<TokenSpan> token_spans(std::string_view line) {
  std::vector<TokenSpan> spans;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t start = i;
    while (i < line.size() && !is_space(static_cast<unsigned char>(line[i]))) ++i;
    spans.push_back({start, i});
  }
  return spans;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < text.size()) lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string trim(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  while (begin < end && is_space(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && is_space(static_cast<unsigned char>(text[end - 1]))) --end;
  return std::string(text.substr(begin, end - begin));
}

std::vector<std::string> split_csv(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    std::string_view piece = comma == std::string_view::npos
                                 ? text.substr(start)
                                 : text.substr(start, comma - start);
    std::string trimmed = trim(piece);
    if (!trimmed.empty()) parts.push_back(std::move(trimmed));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return parts;
}

std::uint64_t SplitMix64::next() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next_below(std::uint64_t bound) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
  std::uint64_t value = next();
  while (value >= limit) value = next();
  return value % bound;
}

}  // namespace medner
