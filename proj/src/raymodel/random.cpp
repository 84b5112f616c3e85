#include "rayleigh/random.hpp"

#include <cmath>
#include <numbers>

namespace rayleigh {

double SplitMix64::normal() {
  // 1 - uniform() lies in (0, 1], keeping the log finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::VectorXd random_direction(SplitMix64& rng, std::size_t dim) {
  Eigen::VectorXd d(static_cast<Eigen::Index>(dim));
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = rng.normal();
    norm = d.norm();
  } while (norm < 1e-12);
  return d / norm;
}

SampledState sample_state(SplitMix64& rng, std::size_t dof) {
  SampledState s;
  s.q.resize(static_cast<Eigen::Index>(dof));
  for (Eigen::Index i = 0; i < s.q.size(); ++i) s.q[i] = rng.uniform(-2.0, 2.0);
  const double speed = std::pow(10.0, rng.uniform(-1.0, 1.0));
  s.v = speed * random_direction(rng, dof);
  return s;
}

}  // namespace rayleigh
