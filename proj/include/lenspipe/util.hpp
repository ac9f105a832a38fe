#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace lenspipe {

// FNV-1a, used for content-addressed cache keys and per-query RNG streams.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::uint64_t v);

std::string base64_encode(const std::vector<std::uint8_t>& data);
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Lowercased alphanumeric word tokens.
std::vector<std::string> tokenize_words(std::string_view text);

}  // namespace lenspipe
