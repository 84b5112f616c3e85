#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

namespace rayleigh {

// SplitMix64. The distributions below are implemented here rather than with
// <random> so that sampled states are identical on every platform.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal (Box-Muller, cosine branch only).
  double normal();

 private:
  std::uint64_t state_;
};

struct SampledState {
  Eigen::VectorXd q;
  Eigen::VectorXd v;
};

// Uniformly distributed unit vector.
Eigen::VectorXd random_direction(SplitMix64& rng, std::size_t dim);

// q uniform in [-2, 2]^dof; |v| log-uniform in [0.1, 10] with uniform
// direction.
SampledState sample_state(SplitMix64& rng, std::size_t dof);

}  // namespace rayleigh
