#pragma once

// Test-side oracles. Nothing here calls the library's own derivative or
// quadrature code, so comparisons against it are independent.

#include <cmath>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rayleigh/dynamics.hpp"
#include "rayleigh/eval.hpp"
#include "rayleigh/expr.hpp"
#include "rayleigh/system.hpp"

namespace rayleigh::testing {

inline ParamTable params(std::initializer_list<std::pair<const char*, double>> entries) {
  ParamTable p;
  for (const auto& [name, value] : entries) p.set(name, value);
  return p;
}

inline Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) out[i++] = x;
  return out;
}

inline Expr bound(const std::string& source, std::size_t dof, const ParamTable& p = {}) {
  return parse(source).bind(dof, p);
}

// Central difference of an arbitrary scalar function of one vector.
inline Eigen::VectorXd central_difference(const std::function<double(const Eigen::VectorXd&)>& f,
                                          const Eigen::VectorXd& x, double h) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Eigen::VectorXd xp = x;
    Eigen::VectorXd xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

// m q'' + c q' + k q = 0, c^2 < 4 m k.
struct Underdamped {
  double m = 1.0, k = 1.0, c = 0.2, q0 = 1.0, v0 = 0.0;

  double gamma() const { return c / (2.0 * m); }
  double omega() const { return std::sqrt(k / m - gamma() * gamma()); }
  double q(double t) const {
    const double b = (v0 + gamma() * q0) / omega();
    return std::exp(-gamma() * t) * (q0 * std::cos(omega() * t) + b * std::sin(omega() * t));
  }
  double v(double t) const {
    const double b = (v0 + gamma() * q0) / omega();
    const double w = omega();
    return std::exp(-gamma() * t) * ((b * w - gamma() * q0) * std::cos(w * t) -
                                     (q0 * w + gamma() * b) * std::sin(w * t));
  }
};

// One-dof oscillator 0.5 m v^2 + 0.5 k q^2 with optional D = c v1^2.
inline SystemSpec oscillator(double c, double m = 1.0, double k = 1.0) {
  std::vector<DissipationTerm> terms;
  if (c != 0.0) terms.push_back({parse("c*v1^2"), 2.0, {}});
  return SystemSpec(1, {parse("m")}, parse("0.5*k*q1^2"),
                    DissipationSpec::homogeneous_sum(std::move(terms)),
                    params({{"m", m}, {"k", k}, {"c", c}}));
}

inline State state(double t, std::initializer_list<double> q, std::initializer_list<double> v) {
  return State{t, vec(q), vec(v)};
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  static std::mt19937_64 rng(std::random_device{}());
  auto dir = std::filesystem::temp_directory_path() /
             ("rayleigh_" + name + "_" + std::to_string(rng()));
  std::filesystem::create_directories(dir);
  return dir;
}

// Random (q, v) contexts drawn with a generator independent of the
// library's sampler.
struct ContextSampler {
  explicit ContextSampler(std::uint64_t seed) : rng(seed) {}

  Eigen::VectorXd uniform(std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = d(rng);
    return x;
  }

  std::mt19937_64 rng;
};

}  // namespace rayleigh::testing
