#include "igflow/interp.hpp"

#include <algorithm>
#include <cmath>

#include "igflow/errors.hpp"

namespace igflow {

namespace {

double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

PchipCurve::PchipCurve(std::span<const double> x, std::span<const double> y)
    : x_(x.begin(), x.end()), y_(y.begin(), y.end()) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ConfigError("pchip: need at least two matching knots");
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(x_[i + 1] > x_[i])) throw NonMonotoneError("pchip: knots must be strictly increasing");

  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    d[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  m_.assign(n, 0.0);
  if (n == 2) {
    m_[0] = m_[1] = d[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (d[i - 1] * d[i] <= 0.0) {
      m_[i] = 0.0;
    } else {
      const double w1 = 2.0 * h[i] + h[i - 1];
      const double w2 = h[i] + 2.0 * h[i - 1];
      m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (sign(m) != sign(d0)) m = 0.0;
    else if (sign(d0) != sign(d1) && std::abs(m) > 3.0 * std::abs(d0)) m = 3.0 * d0;
    return m;
  };
  m_[0] = end_slope(h[0], h[1], d[0], d[1]);
  m_[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
}

double PchipCurve::operator()(double q) const {
  const std::size_t n = x_.size();
  if (q <= x_.front()) q = x_.front();
  if (q >= x_.back()) q = x_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), q);
  std::size_t i = (it == x_.begin()) ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  if (i >= n - 1) i = n - 2;
  const double h = x_[i + 1] - x_[i];
  const double t = (q - x_[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y_[i] + h10 * h * m_[i] + h01 * y_[i + 1] + h11 * h * m_[i + 1];
}

}  // namespace igflow
