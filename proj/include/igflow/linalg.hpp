#pragma once

#include <span>
#include <vector>

#include "igflow/errors.hpp"

namespace igflow {

/// Dense m-by-m matrix holding a metric tensor evaluated at a point.
/// Row-major storage; m stays small (the model dimension).
class MetricMatrix {
 public:
  MetricMatrix() = default;
  explicit MetricMatrix(int n) : n_(n), a_(static_cast<std::size_t>(n) * n, 0.0) {}

  static MetricMatrix identity(int n);

  int dim() const { return n_; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const double> data() const { return a_; }

 private:
  int n_ = 0;
  std::vector<double> a_;
};

MetricMatrix operator+(const MetricMatrix& a, const MetricMatrix& b);
MetricMatrix operator-(const MetricMatrix& a, const MetricMatrix& b);
MetricMatrix operator*(double s, const MetricMatrix& a);
MetricMatrix mat_mul(const MetricMatrix& a, const MetricMatrix& b);

double symmetry_residual(const MetricMatrix& g);

/// Throws unless g is finite, symmetric within sym_tol and positive definite
/// (all Cholesky pivots strictly positive).
void validate_metric(const MetricMatrix& g, double sym_tol = 1e-12);

/// Cholesky factorization g = L L^T. Returns false if a pivot is not
/// strictly positive.
bool cholesky(const MetricMatrix& g, MetricMatrix& lower);

MetricMatrix inverse_spd(const MetricMatrix& g);

std::vector<double> mat_vec(const MetricMatrix& g, std::span<const double> x);
double quad_form(const MetricMatrix& g, std::span<const double> x, std::span<const double> y);

/// max_{i,k} |(a b)_{ik} - delta_{ik}|
double identity_residual(const MetricMatrix& a, const MetricMatrix& b);

double max_abs(std::span<const double> a);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace igflow
