#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace legalstyle {

/// 64-bit FNV-1a, optionally salted with a seed. Used wherever the mock
/// backend and synthetic generators need a stable hash.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0) noexcept;

/// SplitMix64 finalizer; spreads bits of a hash or counter.
std::uint64_t mix64(std::uint64_t x) noexcept;

std::string sha256_hex(std::string_view data);

}  // namespace legalstyle
