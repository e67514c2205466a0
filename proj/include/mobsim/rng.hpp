#pragma once

#include <cmath>
#include <cstdint>

namespace mobsim {

// SplitMix64 (Steele, Lea & Flood 2014; fixed-increment variant by Vigna).
// Every dynasty owns one stream, so simulation results do not depend on how
// dynasties are scheduled across worker threads.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1) with 53 significant bits.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
  }

  // Standard normal via Box-Muller; the sine variate of each pair is cached.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(next_unit()));
    const double a = 2.0 * 3.14159265358979323846 * next_unit();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derives the sub-stream for one indexed unit of work (a dynasty) from the
// master seed. The index is whitened through an extra SplitMix64 step so that
// adjacent indices yield decorrelated streams.
inline SplitMix64 derive_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
  SplitMix64 mixer(master_seed ^ (0xA0761D6478BD642FULL * (stream_index + 1)));
  return SplitMix64(mixer.next_u64());
}

}  // namespace mobsim
