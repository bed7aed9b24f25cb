#pragma once

#include <cstdint>

namespace cnrm {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the output at draw i is a fixed mix of
/// (seed + i*gamma), so a stream is fully determined by its seed and the
/// draw index. Used for all stochastic components of the project.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0,1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on the open interval (0,1).
  double next_open_unit() {
    double u = next_unit();
    while (u == 0.0) u = next_unit();
    return u;
  }

 private:
  std::uint64_t state_;
};

/// Independent substream seed for (master_seed, stream_id). Replications and
/// time steps each get their own id, so ensembles are order-independent.
constexpr std::uint64_t derive_stream(std::uint64_t master_seed, std::uint64_t stream_id) {
  return mix64(master_seed ^ mix64(stream_id ^ 0x5bd1e995a4c2f1d3ULL));
}

}  // namespace cnrm
