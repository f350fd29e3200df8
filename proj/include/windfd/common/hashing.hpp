#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace windfd {

/// Incremental 64-bit FNV-1a. Used for checksums, config hashes and
/// content hashes of on-disk artifacts.
class Fnv1a {
 public:
  static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
  static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

  void update(const void* data, std::size_t size) noexcept {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= bytes[i];
      state_ *= kPrime;
    }
  }
  void update(std::string_view text) noexcept { update(text.data(), text.size()); }

  std::uint64_t digest() const noexcept { return state_; }

 private:
  std::uint64_t state_ = kOffset;
};

std::uint64_t fnv1a(std::string_view text) noexcept;

/// 16 lowercase hex digits.
std::string to_hex(std::uint64_t value);

/// Content hash of a whole file (throws std::runtime_error if unreadable).
std::uint64_t hash_file(const std::filesystem::path& path);

}  // namespace windfd
