#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace medner {

/// SHA-256 of the input as 64 lower-case hex characters.
std::string sha256_hex(std::string_view data);

/// Digest of a directory: sha256 over the sorted "name:sha256(content)" lines
/// of its regular files. Stable across machines; empty/missing dirs hash to
/// the digest of the empty string.
std::string directory_digest(const std::filesystem::path& dir);

}  // namespace medner
