// Independent oracles used to freeze expected values. These deliberately
// avoid the library's own evaluation paths: long direct summation with
// compensated accumulation instead of recurrence-plus-expansion, and a
// second-order ray ODE instead of the Hamiltonian system.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

inline constexpr double kEulerGamma = 0.57721566490153286061;
inline constexpr double kPiSquaredOver6 = 1.6449340668482264365;

class KahanSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// digamma(x) = digamma(x + N) - sum_{k<N} 1/(x+k) with N large enough that
/// only the unquestionable leading asymptotic terms matter.
inline double digamma(double x) {
  const std::size_t n = 1000000;
  KahanSum sum;
  for (std::size_t k = 0; k < n; ++k) sum.add(1.0 / (x + static_cast<double>(k)));
  const double y = x + static_cast<double>(n);
  const double tail = std::log(y) - 0.5 / y - 1.0 / (12.0 * y * y);
  return tail - sum.value();
}

/// trigamma(x) = sum_{k>=0} 1/(x+k)^2, tail by Euler-Maclaurin.
inline double trigamma(double x) {
  const std::size_t n = 1000000;
  KahanSum sum;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = x + static_cast<double>(k);
    sum.add(1.0 / (d * d));
  }
  const double y = x + static_cast<double>(n);
  return sum.value() + 1.0 / y + 0.5 / (y * y) + 1.0 / (6.0 * y * y * y);
}

/// tetragamma(x) = -2 sum_{k>=0} 1/(x+k)^3, tail by Euler-Maclaurin.
inline double tetragamma(double x) {
  const std::size_t n = 1000000;
  KahanSum sum;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = x + static_cast<double>(k);
    sum.add(1.0 / (d * d * d));
  }
  const double y = x + n;
  const double tail = 0.5 / (y * y) + 0.5 / (y * y * y) + 0.25 / (y * y * y * y);
  return -2.0 * (sum.value() + tail);
}

/// Reference ray path from the second-order ray equation
/// d/ds(n dq/ds) = grad n, rewritten with |dq/ds| = 1 as
/// dv/ds = (grad n - (grad n . v) v) / n. Plain hand-rolled RK4.
struct RayOracle {
  std::vector<std::vector<double>> q;  // per step
  std::vector<double> s;
};

inline RayOracle trace_eikonal(
    const std::function<double(const std::vector<double>&)>& n,
    const std::function<std::vector<double>(const std::vector<double>&)>& grad_n,
    std::vector<double> q0, std::vector<double> v0, double s_end, double h) {
  const std::size_t dim = q0.size();
  // normalize v0
  double norm = 0.0;
  for (double v : v0) norm += v * v;
  norm = std::sqrt(norm);
  for (double& v : v0) v /= norm;

  auto rhs = [&](const std::vector<double>& y, std::vector<double>& dy) {
    const std::vector<double> qq(y.begin(), y.begin() + dim);
    const std::vector<double> vv(y.begin() + dim, y.end());
    const std::vector<double> g = grad_n(qq);
    const double nv = n(qq);
    double gv = 0.0;
    for (std::size_t i = 0; i < dim; ++i) gv += g[i] * vv[i];
    for (std::size_t i = 0; i < dim; ++i) {
      dy[i] = vv[i];
      dy[dim + i] = (g[i] - gv * vv[i]) / nv;
    }
  };

  std::vector<double> y(q0);
  y.insert(y.end(), v0.begin(), v0.end());
  RayOracle out;
  out.q.push_back(q0);
  out.s.push_back(0.0);
  double s = 0.0;
  std::vector<double> k1(2 * dim), k2(2 * dim), k3(2 * dim), k4(2 * dim), tmp(2 * dim);
  while (s < s_end - 1e-12) {
    const double hh = std::min(h, s_end - s);
    rhs(y, k1);
    for (std::size_t i = 0; i < 2 * dim; ++i) tmp[i] = y[i] + 0.5 * hh * k1[i];
    rhs(tmp, k2);
    for (std::size_t i = 0; i < 2 * dim; ++i) tmp[i] = y[i] + 0.5 * hh * k2[i];
    rhs(tmp, k3);
    for (std::size_t i = 0; i < 2 * dim; ++i) tmp[i] = y[i] + hh * k3[i];
    rhs(tmp, k4);
    for (std::size_t i = 0; i < 2 * dim; ++i)
      y[i] += (hh / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
    s += hh;
    out.q.emplace_back(y.begin(), y.begin() + dim);
    out.s.push_back(s);
  }
  return out;
}

}  // namespace oracles
