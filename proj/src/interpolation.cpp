#include "monocert/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "monocert/error.hpp"

namespace monocert {

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys)
    : xs_(std::move(xs)), ys_(std::move(ys)) {
  check_nodes();
  const std::size_t n = xs_.size();
  std::vector<double> h(n - 1), delta(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = xs_[k + 1] - xs_[k];
    delta[k] = (ys_[k + 1] - ys_[k]) / h[k];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = delta[0];
    return;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (delta[k - 1] * delta[k] <= 0.0) continue;
    const double w1 = 2 * h[k] + h[k - 1];
    const double w2 = h[k] + 2 * h[k - 1];
    d_[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
  }
  // one-sided three-point ends, clipped to keep the shape
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) {
      d = 0.0;
    } else if (d0 * d1 < 0.0 && std::abs(d) > std::abs(3 * d0)) {
      d = 3 * d0;
    }
    return d;
  };
  d_[0] = end_slope(h[0], h[1], delta[0], delta[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
}

MonotoneCubic::MonotoneCubic(std::vector<double> xs, std::vector<double> ys, std::vector<double> slopes)
    : xs_(std::move(xs)), ys_(std::move(ys)), d_(std::move(slopes)) {
  check_nodes();
  if (d_.size() != xs_.size()) throw Error(ErrorCode::PreconditionViolated, "slope count mismatch");
  limit_slopes();
}

void MonotoneCubic::check_nodes() const {
  if (xs_.size() < 2 || xs_.size() != ys_.size()) {
    throw Error(ErrorCode::PreconditionViolated, "interpolation needs at least two matching nodes");
  }
  for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
    if (!(xs_[k + 1] > xs_[k])) {
      throw Error(ErrorCode::PreconditionViolated, "interpolation nodes must be strictly increasing");
    }
  }
}

void MonotoneCubic::limit_slopes() {
  for (std::size_t k = 0; k + 1 < xs_.size(); ++k) {
    const double delta = (ys_[k + 1] - ys_[k]) / (xs_[k + 1] - xs_[k]);
    if (delta == 0.0) {
      d_[k] = d_[k + 1] = 0.0;
      continue;
    }
    if (d_[k] * delta < 0.0) d_[k] = 0.0;
    if (d_[k + 1] * delta < 0.0) d_[k + 1] = 0.0;
    const double a = d_[k] / delta;
    const double b = d_[k + 1] / delta;
    const double r = a * a + b * b;
    if (r > 9.0) {
      const double tau = 3.0 / std::sqrt(r);
      d_[k] = tau * a * delta;
      d_[k + 1] = tau * b * delta;
    }
  }
}

std::size_t MonotoneCubic::interval(double x) const {
  const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
  if (it == xs_.begin()) return 0;
  return std::min(static_cast<std::size_t>(it - xs_.begin()) - 1, xs_.size() - 2);
}

double MonotoneCubic::value(double x) const {
  if (x <= xs_.front()) return ys_.front() + d_.front() * (x - xs_.front());
  if (x >= xs_.back()) return ys_.back() + d_.back() * (x - xs_.back());
  const std::size_t k = interval(x);
  const double h = xs_[k + 1] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * ys_[k] + (t3 - 2 * t2 + t) * h * d_[k] + (-2 * t3 + 3 * t2) * ys_[k + 1] +
         (t3 - t2) * h * d_[k + 1];
}

double MonotoneCubic::derivative(double x) const {
  if (x <= xs_.front()) return d_.front();
  if (x >= xs_.back()) return d_.back();
  const std::size_t k = interval(x);
  const double h = xs_[k + 1] - xs_[k];
  const double t = (x - xs_[k]) / h;
  const double t2 = t * t;
  return (6 * t2 - 6 * t) / h * ys_[k] + (3 * t2 - 4 * t + 1) * d_[k] + (-6 * t2 + 6 * t) / h * ys_[k + 1] +
         (3 * t2 - 2 * t) * d_[k + 1];
}

}  // namespace monocert
