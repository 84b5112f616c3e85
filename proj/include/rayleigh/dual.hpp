#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>

namespace rayleigh {

// Forward-mode dual number carrying up to kMaxDirections tangent directions.
// Gradients over more variables are computed in chunks by the callers.
class DualScalar {
 public:
  static constexpr std::size_t kMaxDirections = 16;

  constexpr DualScalar() = default;
  constexpr DualScalar(double value, std::size_t directions = 0)  // NOLINT
      : value_(value), n_(directions) {}

  static DualScalar variable(double value, std::size_t directions,
                             std::size_t seed) {
    assert(seed < directions && directions <= kMaxDirections);
    DualScalar d(value, directions);
    d.tangent_[seed] = 1.0;
    return d;
  }

  double value() const noexcept { return value_; }
  std::size_t directions() const noexcept { return n_; }
  double tangent(std::size_t i) const noexcept { return tangent_[i]; }
  double& tangent(std::size_t i) noexcept { return tangent_[i]; }

  // f(x) with f'(x) = slope.
  DualScalar chain(double value, double slope) const {
    DualScalar r(value, n_);
    for (std::size_t i = 0; i < n_; ++i) r.tangent_[i] = slope * tangent_[i];
    return r;
  }

  // As chain(), but a zero tangent stays zero even when the slope is
  // infinite (x^0.5 at x = 0 against a constant direction).
  DualScalar chain_guarded(double value, double slope) const {
    DualScalar r(value, n_);
    for (std::size_t i = 0; i < n_; ++i)
      r.tangent_[i] = tangent_[i] == 0.0 ? 0.0 : slope * tangent_[i];
    return r;
  }

  bool has_tangent() const noexcept {
    for (std::size_t i = 0; i < n_; ++i)
      if (tangent_[i] != 0.0) return true;
    return false;
  }

  friend DualScalar operator+(const DualScalar& a, const DualScalar& b) {
    DualScalar r(a.value_ + b.value_, widest(a, b));
    for (std::size_t i = 0; i < r.n_; ++i)
      r.tangent_[i] = a.tangent_[i] + b.tangent_[i];
    return r;
  }
  friend DualScalar operator-(const DualScalar& a, const DualScalar& b) {
    DualScalar r(a.value_ - b.value_, widest(a, b));
    for (std::size_t i = 0; i < r.n_; ++i)
      r.tangent_[i] = a.tangent_[i] - b.tangent_[i];
    return r;
  }
  friend DualScalar operator*(const DualScalar& a, const DualScalar& b) {
    DualScalar r(a.value_ * b.value_, widest(a, b));
    for (std::size_t i = 0; i < r.n_; ++i)
      r.tangent_[i] = a.tangent_[i] * b.value_ + a.value_ * b.tangent_[i];
    return r;
  }
  friend DualScalar operator/(const DualScalar& a, const DualScalar& b) {
    const double inv = 1.0 / b.value_;
    const double q = a.value_ * inv;
    DualScalar r(q, widest(a, b));
    for (std::size_t i = 0; i < r.n_; ++i)
      r.tangent_[i] = (a.tangent_[i] - q * b.tangent_[i]) * inv;
    return r;
  }
  friend DualScalar operator-(const DualScalar& a) {
    DualScalar r(-a.value_, a.n_);
    for (std::size_t i = 0; i < r.n_; ++i) r.tangent_[i] = -a.tangent_[i];
    return r;
  }

 private:
  static std::size_t widest(const DualScalar& a, const DualScalar& b) {
    return a.n_ > b.n_ ? a.n_ : b.n_;
  }

  double value_ = 0.0;
  std::size_t n_ = 0;
  std::array<double, kMaxDirections> tangent_{};
};

}  // namespace rayleigh
