#pragma once

#include <cmath>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ridgelearn {

// Reproducible random streams.
//
// Generator: xoshiro256** with its 256-bit state filled by SplitMix64. A child
// stream is keyed by (master seed, label tuple): every label is folded into a
// 64-bit key with SplitMix64 finalisation (strings via FNV-1a first), so a
// grid cell or trial can be replayed without replaying any other draw.
// Normal variates use the Box-Muller transform on 53-bit uniforms. None of
// this depends on <random> distributions, whose output is
// implementation-defined.

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix64(std::uint64_t x) {
  std::uint64_t s = x;
  return splitmix64(s);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace detail

/// One component of a stream key: an integer or a short string tag.
class StreamLabel {
 public:
  template <std::integral T>
  StreamLabel(T v) : value_(static_cast<std::uint64_t>(v)) {}  // NOLINT(implicit)
  StreamLabel(std::string_view s) : value_(std::string(s)) {}   // NOLINT(implicit)
  StreamLabel(const char* s) : value_(std::string(s)) {}        // NOLINT(implicit)
  StreamLabel(const std::string& s) : value_(s) {}              // NOLINT(implicit)

  bool is_integer() const { return std::holds_alternative<std::uint64_t>(value_); }
  std::uint64_t integer() const { return std::get<std::uint64_t>(value_); }
  const std::string& text() const { return std::get<std::string>(value_); }

 private:
  std::variant<std::uint64_t, std::string> value_;
};

class Stream {
 public:
  explicit Stream(std::uint64_t key = 0) : key_(key) {
    std::uint64_t sm = key;
    for (auto& w : s_) w = detail::splitmix64(sm);
  }

  std::uint64_t key() const noexcept { return key_; }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_low() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool coin() { return (next_u64() >> 63) != 0; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Lemire-style rejection keeps the draw exact.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open_low();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  /// Child stream keyed by this stream's key and `label`; does not advance *this.
  Stream child(const StreamLabel& label) const { return Stream(fold(key_, label)); }

  static std::uint64_t fold(std::uint64_t key, const StreamLabel& label) {
    const std::uint64_t lk = label.is_integer()
                                 ? detail::mix64(label.integer() ^ 0x5851F42D4C957F2DULL)
                                 : detail::mix64(detail::fnv1a(label.text()));
    return detail::mix64(detail::mix64(key) ^ lk);
  }

 private:
  std::uint64_t key_;
  std::uint64_t s_[4]{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Deterministic child stream for (master_seed, labels).
inline Stream derive_stream(std::uint64_t master_seed, const std::vector<StreamLabel>& labels) {
  std::uint64_t key = detail::mix64(master_seed);
  for (const auto& l : labels) key = Stream::fold(key, l);
  return Stream(key);
}

}  // namespace ridgelearn
