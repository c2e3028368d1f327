#include "igflow/special_functions.hpp"

#include <cmath>

#include "igflow/errors.hpp"

namespace igflow {

namespace {

// Asymptotic tails, valid once the argument has been pushed past the
// switchover by the recurrences. Eight Bernoulli terms each.

double digamma_asymptotic(double y) {
  const double r = 1.0 / y;
  const double r2 = r * r;
  // ln y - 1/(2y) - 1/(12y^2) + 1/(120y^4) - 1/(252y^6) + 1/(240y^8)
  //      - 1/(132y^10) + 691/(32760y^12) - 1/(12y^14) + 3617/(8160y^16)
  const double tail =
      1.0 / 12.0 -
      r2 * (1.0 / 120.0 -
            r2 * (1.0 / 252.0 -
                  r2 * (1.0 / 240.0 -
                        r2 * (1.0 / 132.0 -
                              r2 * (691.0 / 32760.0 -
                                    r2 * (1.0 / 12.0 - r2 * (3617.0 / 8160.0)))))));
  return std::log(y) - 0.5 * r - r2 * tail;
}

double trigamma_asymptotic(double y) {
  const double r = 1.0 / y;
  const double r2 = r * r;
  // 1/y + 1/(2y^2) + 1/(6y^3) - 1/(30y^5) + 1/(42y^7) - 1/(30y^9)
  //     + 5/(66y^11) - 691/(2730y^13) + 7/(6y^15) - 3617/(510y^17)
  const double tail =
      1.0 / 6.0 -
      r2 * (1.0 / 30.0 -
            r2 * (1.0 / 42.0 -
                  r2 * (1.0 / 30.0 -
                        r2 * (5.0 / 66.0 -
                              r2 * (691.0 / 2730.0 -
                                    r2 * (7.0 / 6.0 - r2 * (3617.0 / 510.0)))))));
  return r + 0.5 * r2 + r * r2 * tail;
}

double tetragamma_asymptotic(double y) {
  const double r = 1.0 / y;
  const double r2 = r * r;
  // -1/y^2 - 1/y^3 - 1/(2y^4) + 1/(6y^6) - 1/(6y^8) + 3/(10y^10)
  //        - 5/(6y^12) + 691/(210y^14) - 35/(2y^16) + 3617/(30y^18)
  const double tail =
      0.5 -
      r2 * (1.0 / 6.0 -
            r2 * (1.0 / 6.0 -
                  r2 * (3.0 / 10.0 -
                        r2 * (5.0 / 6.0 -
                              r2 * (691.0 / 210.0 -
                                    r2 * (35.0 / 2.0 - r2 * (3617.0 / 30.0)))))));
  return -r2 - r * r2 - r2 * r2 * tail;
}

}  // namespace

double digamma(double x) {
  if (!(x > 0.0)) throw DomainError("digamma requires x > 0");
  double acc = 0.0;
  while (x < 6.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  return digamma_asymptotic(x) + acc;
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma requires x > 0");
  double acc = 0.0;
  while (x < 6.0) {
    acc += 1.0 / (x * x);
    x += 1.0;
  }
  return trigamma_asymptotic(x) + acc;
}

double polygamma(int order, double x) {
  if (order == 0) return digamma(x);
  if (order == 1) return trigamma(x);
  throw DomainError("polygamma supports orders 0 and 1 only");
}

namespace detail {

double tetragamma(double x) {
  if (!(x > 0.0)) throw DomainError("tetragamma requires x > 0");
  double acc = 0.0;
  // Push further out than digamma/trigamma: the derivative series loses
  // roughly one digit per differentiation at a given switchover.
  while (x < 8.0) {
    acc -= 2.0 / (x * x * x);
    x += 1.0;
  }
  return tetragamma_asymptotic(x) + acc;
}

}  // namespace detail

}  // namespace igflow
