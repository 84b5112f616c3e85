#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rayleigh/random.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh {

// Outcome of a sampled structural check. Failures are reported, not thrown;
// only evaluation errors propagate.
struct CheckReport {
  std::string check;
  bool pass = true;
  // homogeneity / euler: largest relative violation.
  // positivity: smallest sampled D.
  double worst = 0.0;
  std::size_t samples = 0;
  std::optional<SampledState> witness;  // state that produced `worst`
  std::string detail;

  // homogeneity only: (lambda, max relative violation at that lambda)
  std::vector<std::pair<double, double>> by_lambda;
};

inline constexpr std::uint64_t kDefaultCheckSeed = 20130417;

// expr(q, s v) = s^n expr(q, v) for s in {0.5, 2, 3}, to
// 1e-9 (1 + |s^n expr|), and expr(q, 0) = 0.
CheckReport homogeneity_check(const SystemSpec& sys, const DissipationTerm& term,
                              std::size_t samples,
                              std::uint64_t seed = kDefaultCheckSeed);

// v . dR/dv = D to tolerance * (1 + |D|).
CheckReport euler_identity_check(const SystemSpec& sys, std::size_t samples,
                                 std::uint64_t seed = kDefaultCheckSeed,
                                 double tolerance = 1e-8);

// min D >= -1e-12 over sampled states.
CheckReport positivity_scan(const SystemSpec& sys, std::size_t samples,
                            std::uint64_t seed = kDefaultCheckSeed);

}  // namespace rayleigh
