#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace synthlab {

/// Deterministic splittable RNG. A stream is identified by a root seed plus a
/// derivation path of labels; identical (seed, path) always replays the same
/// sequence, and sibling streams are statistically independent.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(mix(seed + kGamma)), counter_(0) {}

  RngStream child(std::string_view label) const {
    return RngStream(FromDerived{}, mix(seed_ ^ hash_label(label)));
  }
  RngStream child(std::string_view label, std::uint64_t index) const {
    return RngStream(FromDerived{}, mix(mix(seed_ ^ hash_label(label)) + index * kGamma));
  }

  std::uint64_t next_u64() {
    counter_ += kGamma;
    return mix(seed_ ^ counter_);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, n).
  std::size_t uniform_int(std::size_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be positive");
    return static_cast<std::size_t>(next_u64() % n);
  }

  /// Index drawn with probability proportional to non-negative weights.
  std::size_t pick_weighted(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw std::invalid_argument("pick_weighted: weights sum to zero");
    double r = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
      r -= weights[i];
      if (r < 0.0) return i;
    }
    return weights.size() - 1;
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[uniform_int(i)]);
    }
  }

 private:
  struct FromDerived {};
  RngStream(FromDerived, std::uint64_t derived) : seed_(derived), counter_(0) {}

  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  static std::uint64_t hash_label(std::string_view label) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : label) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    return h;
  }

  std::uint64_t seed_;
  std::uint64_t counter_;
};

}  // namespace synthlab
