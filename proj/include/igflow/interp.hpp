#pragma once

#include <span>
#include <vector>

namespace igflow {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes).
/// Knots must be strictly increasing; evaluation clamps to the knot range.
class PchipCurve {
 public:
  PchipCurve() = default;
  PchipCurve(std::span<const double> x, std::span<const double> y);

  double operator()(double q) const;

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace igflow
