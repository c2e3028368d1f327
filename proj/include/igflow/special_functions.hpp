#pragma once

namespace igflow {

/// Digamma (order 0) or trigamma (order 1) at x > 0.
/// Upward recurrence to the asymptotic regime, then a Bernoulli-coefficient
/// expansion; relative error stays at or below ~1e-12 in double precision.
double polygamma(int order, double x);

double digamma(double x);
double trigamma(double x);

namespace detail {
/// Second derivative of digamma. Internal: the Gamma model's analytic metric
/// derivatives need it; not part of the public polygamma contract.
double tetragamma(double x);
}  // namespace detail

}  // namespace igflow
