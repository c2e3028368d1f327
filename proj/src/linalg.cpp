#include "igflow/linalg.hpp"

#include <cmath>
#include <cstdlib>

#include "igflow/util.hpp"

namespace igflow {

MetricMatrix MetricMatrix::identity(int n) {
  MetricMatrix g(n);
  for (int i = 0; i < n; ++i) g(i, i) = 1.0;
  return g;
}

MetricMatrix operator+(const MetricMatrix& a, const MetricMatrix& b) {
  MetricMatrix c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) + b(i, j);
  return c;
}

MetricMatrix operator-(const MetricMatrix& a, const MetricMatrix& b) {
  MetricMatrix c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = a(i, j) - b(i, j);
  return c;
}

MetricMatrix operator*(double s, const MetricMatrix& a) {
  MetricMatrix c(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) c(i, j) = s * a(i, j);
  return c;
}

MetricMatrix mat_mul(const MetricMatrix& a, const MetricMatrix& b) {
  const int n = a.dim();
  MetricMatrix c(n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += a(i, j) * b(j, k);
      c(i, k) = s;
    }
  return c;
}

double symmetry_residual(const MetricMatrix& g) {
  double worst = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = i + 1; j < g.dim(); ++j)
      worst = std::max(worst, std::abs(g(i, j) - g(j, i)));
  return worst;
}

bool cholesky(const MetricMatrix& g, MetricMatrix& lower) {
  const int n = g.dim();
  lower = MetricMatrix(n);
  for (int j = 0; j < n; ++j) {
    double d = g(j, j);
    for (int k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    lower(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (int k = 0; k < j; ++k) s -= lower(i, k) * lower(j, k);
      lower(i, j) = s / lower(j, j);
    }
  }
  return true;
}

void validate_metric(const MetricMatrix& g, double sym_tol) {
  if (!all_finite(g.data())) throw NonFiniteError("metric has non-finite entries");
  if (symmetry_residual(g) > sym_tol) throw SingularMetricError("metric is not symmetric");
  MetricMatrix lower;
  if (!cholesky(g, lower)) throw SingularMetricError("metric is not positive definite");
}

MetricMatrix inverse_spd(const MetricMatrix& g) {
  const int n = g.dim();
  MetricMatrix lower;
  if (!cholesky(g, lower)) throw SingularMetricError("cannot invert: matrix is not positive definite");
  // Solve L L^T X = I column by column.
  MetricMatrix inv(n);
  std::vector<double> y(n), x(n);
  for (int col = 0; col < n; ++col) {
    for (int i = 0; i < n; ++i) {
      double s = (i == col) ? 1.0 : 0.0;
      for (int k = 0; k < i; ++k) s -= lower(i, k) * y[k];
      y[i] = s / lower(i, i);
    }
    for (int i = n - 1; i >= 0; --i) {
      double s = y[i];
      for (int k = i + 1; k < n; ++k) s -= lower(k, i) * x[k];
      x[i] = s / lower(i, i);
    }
    for (int i = 0; i < n; ++i) inv(i, col) = x[i];
  }
  // Symmetrize to kill rounding skew.
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

std::vector<double> mat_vec(const MetricMatrix& g, std::span<const double> x) {
  const int n = g.dim();
  std::vector<double> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += g(i, j) * x[j];
    out[i] = s;
  }
  return out;
}

double quad_form(const MetricMatrix& g, std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (int i = 0; i < g.dim(); ++i)
    for (int j = 0; j < g.dim(); ++j) s += x[i] * g(i, j) * y[j];
  return s;
}

double identity_residual(const MetricMatrix& a, const MetricMatrix& b) {
  const MetricMatrix c = mat_mul(a, b);
  double worst = 0.0;
  for (int i = 0; i < c.dim(); ++i)
    for (int k = 0; k < c.dim(); ++k)
      worst = std::max(worst, std::abs(c(i, k) - (i == k ? 1.0 : 0.0)));
  return worst;
}

double max_abs(std::span<const double> a) {
  double worst = 0.0;
  for (double v : a) worst = std::max(worst, std::abs(v));
  return worst;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace igflow
