#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace softmix {

// Counter-based splittable generator. A stream is identified by a 64-bit
// key; outputs are a strong integer hash of (key, counter), so streams can
// be split by label without sharing state. Same key => same sequence on
// every platform, which gives bitwise-reproducible runs regardless of
// thread count or evaluation order.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : key_(mix(seed ^ kDomainRoot)) {}

  // Derives an independent child stream from a label and optional index.
  RngStream child(std::string_view label, std::uint64_t index = 0) const {
    std::uint64_t h = key_;
    for (char c : label) h = mix(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return RngStream(h ^ mix(index ^ kDomainChild), Tag{});
  }

  std::uint64_t next_u64() {
    counter_ += kGolden;
    return mix(key_ + counter_);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1); safe as a log argument.
  double uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller. Consumes two uniforms per call.
  double normal() {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = normal();
    return out;
  }

  // Integer in [0, bound) by rejection-free scaling (bound << 2^64 here,
  // so modulo bias is negligible for benchmark use; not used for crypto).
  std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

 private:
  struct Tag {};
  RngStream(std::uint64_t key, Tag) : key_(key) {}

  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
  static constexpr std::uint64_t kDomainRoot = 0x736F66746D6978ULL;   // "softmix"
  static constexpr std::uint64_t kDomainChild = 0x6368696C64ULL;      // "child"
  static constexpr double kPi = 3.14159265358979323846;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace softmix
