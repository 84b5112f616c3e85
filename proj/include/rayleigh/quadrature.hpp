#pragma once

#include <cstddef>
#include <vector>

namespace rayleigh {

// n-point Gauss-Legendre rule on [-1, 1], nodes ascending.
class GaussLegendreRule {
 public:
  explicit GaussLegendreRule(std::size_t n);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<double>& nodes() const noexcept { return nodes_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  // Composite rule: [a, b] split into `panels` equal panels. Calls
  // f(x, w) for every node x with its scaled weight w. The nodes never touch
  // the endpoints.
  template <class F>
  void for_each_node(double a, double b, std::size_t panels, F&& f) const {
    const double width = (b - a) / static_cast<double>(panels);
    const double half = 0.5 * width;
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = a + (static_cast<double>(p) + 0.5) * width;
      for (std::size_t i = 0; i < nodes_.size(); ++i)
        f(mid + half * nodes_[i], half * weights_[i]);
    }
  }

  template <class F>
  double integrate(F&& f, double a, double b, std::size_t panels) const {
    double sum = 0.0;
    for_each_node(a, b, panels, [&](double x, double w) { sum += w * f(x); });
    return sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

}  // namespace rayleigh
