#pragma once

#include <span>
#include <vector>

namespace monocert {

/// Piecewise cubic Hermite interpolant that preserves monotone data.
/// Without slopes, node slopes follow the PCHIP weighted harmonic mean;
/// supplied slopes are limited by the Fritsch–Carlson condition.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  /// xs strictly increasing, at least two nodes. Throws PreconditionViolated.
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys);
  MonotoneCubic(std::vector<double> xs, std::vector<double> ys, std::vector<double> slopes);

  /// Outside [x_front, x_back] the end tangents are used.
  [[nodiscard]] double value(double x) const;
  [[nodiscard]] double derivative(double x) const;

  [[nodiscard]] double x_min() const { return xs_.front(); }
  [[nodiscard]] double x_max() const { return xs_.back(); }
  [[nodiscard]] const std::vector<double>& xs() const noexcept { return xs_; }
  [[nodiscard]] const std::vector<double>& ys() const noexcept { return ys_; }
  [[nodiscard]] const std::vector<double>& slopes() const noexcept { return d_; }

 private:
  void check_nodes() const;
  void limit_slopes();
  [[nodiscard]] std::size_t interval(double x) const;

  std::vector<double> xs_, ys_, d_;
};

}  // namespace monocert
