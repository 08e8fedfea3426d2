#pragma once
// Counter-based random streams (Philox 4x32-10) plus the inverse-CDF and
// rejection samplers used by the scenario generators.
//
// A Stream is keyed by (seed, stream_id): streams with distinct ids are
// independent, and a stream's output depends only on its key and how many
// values were drawn — never on scheduling. derive_seed() hashes
// (seed, index) into a fresh seed so replications get independent
// stream families.

#include <array>
#include <cmath>
#include <cstdint>

#include "cvarsaa/stats.hpp"

namespace cvarsaa::rng {

// One 10-round Philox 4x32 block: 128-bit counter, 64-bit key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
    ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
           std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

// Deterministic sub-seed for replicate/grid indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  const auto out = philox4x32(
      {std::uint32_t(index), std::uint32_t(index >> 32), 0x5EEDBA5Eu, 0xC0FFEE00u},
      {std::uint32_t(seed), std::uint32_t(seed >> 32)});
  return out[0] | (std::uint64_t(out[1]) << 32);
}

class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t stream_id)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        id_lo_(std::uint32_t(stream_id)),
        id_hi_(std::uint32_t(stream_id >> 32)) {}

  std::uint64_t next_u64() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const auto out = philox4x32(
        {std::uint32_t(pos_), std::uint32_t(pos_ >> 32), id_lo_, id_hi_}, key_);
    ++pos_;
    spare_ = out[2] | (std::uint64_t(out[3]) << 32);
    have_spare_ = true;
    return out[0] | (std::uint64_t(out[1]) << 32);
  }

  // Uniform on the open interval (0,1): 53-bit resolution, never 0 or 1,
  // so inverse-CDF transforms stay finite.
  double uniform() { return (double(next_u64() >> 11) + 0.5) * 0x1p-53; }

  double normal() { return stats::norm_quantile(uniform()); }

  double exponential() { return -std::log(uniform()); }

  // Gamma(shape, 1) by Marsaglia-Tsang squeeze; shape < 1 via the boost
  // Gamma(a) = Gamma(a+1) * U^(1/a).
  double gamma(double shape) {
    if (shape < 1.0) return gamma(shape + 1.0) * std::pow(uniform(), 1.0 / shape);
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      const double x = normal();
      const double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint32_t id_lo_, id_hi_;
  std::uint64_t pos_ = 0;
  std::uint64_t spare_ = 0;
  bool have_spare_ = false;
};

// Stream-id convention used by the samplers: column j of a scenario matrix
// draws from stream j; auxiliary per-matrix streams (e.g. the Clayton
// frailty) live at ids >= kAuxStreamBase so they never collide with columns.
constexpr std::uint64_t kAuxStreamBase = std::uint64_t(1) << 32;

}  // namespace cvarsaa::rng
