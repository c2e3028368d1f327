#include "igflow/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "igflow/util.hpp"

namespace igflow {

namespace {

bool eval_rhs(const OdeRhs& rhs, double u, const std::vector<double>& y,
              std::vector<double>& dy, std::string& why) {
  try {
    rhs(u, y, dy);
  } catch (const DomainError& e) {
    why = e.what();
    return false;
  } catch (const NonFiniteError& e) {
    why = e.what();
    return false;
  }
  if (!all_finite(dy)) {
    why = "non-finite derivative";
    return false;
  }
  return true;
}

[[noreturn]] void throw_exit(double u, const std::string& why) {
  throw DomainExitError("flow left the domain near parameter " + std::to_string(u) +
                        ": " + why);
}

OdeResult run_rk4(const OdeRhs& rhs, std::vector<double> y0,
                  std::pair<double, double> span, const IntegratorConfig& cfg) {
  OdeResult res;
  res.u.push_back(span.first);
  res.y.push_back(y0);
  const std::size_t n = y0.size();
  std::vector<double> y = std::move(y0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n), ynew(n);
  std::string why;

  double u = span.first;
  long step_index = 0;
  while (u < span.second) {
    if (++step_index > cfg.max_steps)
      throw StepLimitError("rk4: exceeded max_steps = " + std::to_string(cfg.max_steps));
    // Keep the grid exact: u_i = u0 + i*h until the clipped final step.
    double u_next = span.first + static_cast<double>(step_index) * cfg.step;
    if (u_next > span.second - 0.25 * cfg.step || u_next > span.second) u_next = span.second;
    const double h = u_next - u;

    bool ok = eval_rhs(rhs, u, y, k1, why);
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k1[i];
      ok = eval_rhs(rhs, u + 0.5 * h, tmp, k2, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * h * k2[i];
      ok = eval_rhs(rhs, u + 0.5 * h, tmp, k3, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * k3[i];
      ok = eval_rhs(rhs, u + h, tmp, k4, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i)
        ynew[i] = y[i] + (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
      if (!all_finite(ynew)) {
        ok = false;
        why = "non-finite state";
      }
    }
    if (!ok) {
      if (cfg.domain_guard == DomainGuard::stop_with_error) throw_exit(u, why);
      res.status = FlowStatus::domain_exit;
      return res;
    }
    y = ynew;
    u = u_next;
    res.u.push_back(u);
    res.y.push_back(y);
  }
  return res;
}

OdeResult run_rkf45(const OdeRhs& rhs, std::vector<double> y0,
                    std::pair<double, double> span, const IntegratorConfig& cfg) {
  // Fehlberg 4(5) coefficients.
  static constexpr double a2 = 1.0 / 4, a3 = 3.0 / 8, a4 = 12.0 / 13, a5 = 1.0, a6 = 1.0 / 2;
  static constexpr double b21 = 1.0 / 4;
  static constexpr double b31 = 3.0 / 32, b32 = 9.0 / 32;
  static constexpr double b41 = 1932.0 / 2197, b42 = -7200.0 / 2197, b43 = 7296.0 / 2197;
  static constexpr double b51 = 439.0 / 216, b52 = -8.0, b53 = 3680.0 / 513,
                          b54 = -845.0 / 4104;
  static constexpr double b61 = -8.0 / 27, b62 = 2.0, b63 = -3544.0 / 2565,
                          b64 = 1859.0 / 4104, b65 = -11.0 / 40;
  static constexpr double c1 = 16.0 / 135, c3 = 6656.0 / 12825, c4 = 28561.0 / 56430,
                          c5 = -9.0 / 50, c6 = 2.0 / 55;
  static constexpr double e1 = 1.0 / 360, e3 = -128.0 / 4275, e4 = -2197.0 / 75240,
                          e5 = 1.0 / 50, e6 = 2.0 / 55;

  OdeResult res;
  res.u.push_back(span.first);
  res.y.push_back(y0);
  const std::size_t n = y0.size();
  std::vector<double> y = std::move(y0);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), tmp(n), ynew(n);
  std::string why;

  double u = span.first;
  double h = std::min(cfg.step, span.second - span.first);
  const double h_min = 1e-14 * std::max(1.0, std::abs(span.second - span.first));
  long attempts = 0;
  while (u < span.second) {
    if (++attempts > cfg.max_steps)
      throw StepLimitError("rkf45: exceeded max_steps = " + std::to_string(cfg.max_steps));
    h = std::min(h, span.second - u);
    if (h < h_min) {
      // Persistent underflow marks a solution blowing up in finite time;
      // under the truncating guard that is a domain exit, not a hard error.
      if (cfg.domain_guard == DomainGuard::truncate_trajectory) {
        res.status = FlowStatus::domain_exit;
        return res;
      }
      throw StepLimitError("rkf45: step size underflow near parameter " + std::to_string(u));
    }

    bool ok = eval_rhs(rhs, u, y, k1, why);
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * b21 * k1[i];
      ok = eval_rhs(rhs, u + a2 * h, tmp, k2, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (b31 * k1[i] + b32 * k2[i]);
      ok = eval_rhs(rhs, u + a3 * h, tmp, k3, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (b41 * k1[i] + b42 * k2[i] + b43 * k3[i]);
      ok = eval_rhs(rhs, u + a4 * h, tmp, k4, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (b51 * k1[i] + b52 * k2[i] + b53 * k3[i] + b54 * k4[i]);
      ok = eval_rhs(rhs, u + a5 * h, tmp, k5, why);
    }
    if (ok) {
      for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (b61 * k1[i] + b62 * k2[i] + b63 * k3[i] + b64 * k4[i] +
                             b65 * k5[i]);
      ok = eval_rhs(rhs, u + a6 * h, tmp, k6, why);
    }
    if (!ok) {
      if (cfg.domain_guard == DomainGuard::stop_with_error) throw_exit(u, why);
      res.status = FlowStatus::domain_exit;
      return res;
    }

    double err_ratio = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ynew[i] = y[i] + h * (c1 * k1[i] + c3 * k3[i] + c4 * k4[i] + c5 * k5[i] + c6 * k6[i]);
      const double err =
          std::abs(h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]));
      const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err_ratio = std::max(err_ratio, err / scale);
    }
    if (!std::isfinite(err_ratio)) {
      h *= 0.5;
      continue;
    }
    if (err_ratio <= 1.0) {
      if (!all_finite(ynew)) {
        if (cfg.domain_guard == DomainGuard::stop_with_error) throw_exit(u, "non-finite state");
        res.status = FlowStatus::domain_exit;
        return res;
      }
      u += h;
      y = ynew;
      res.u.push_back(u);
      res.y.push_back(y);
    }
    const double factor = (err_ratio > 0.0)
                              ? std::clamp(0.9 * std::pow(err_ratio, -0.2), 0.2, 5.0)
                              : 5.0;
    h *= factor;
  }
  return res;
}

}  // namespace

OdeResult integrate_ode(const OdeRhs& rhs, std::vector<double> y0,
                        std::pair<double, double> span, const IntegratorConfig& cfg) {
  if (!(cfg.step > 0.0)) throw ConfigError("integrator step must be positive");
  if (!(cfg.abs_tol > 0.0) || !(cfg.rel_tol > 0.0))
    throw ConfigError("integrator tolerances must be positive");
  if (!(span.second >= span.first)) throw ConfigError("span must satisfy end >= start");
  if (!all_finite(y0)) throw NonFiniteError("initial state has non-finite entries");
  if (span.second == span.first) {
    OdeResult res;
    res.u.push_back(span.first);
    res.y.push_back(std::move(y0));
    return res;
  }
  return cfg.method == IntegratorMethod::rk4_fixed ? run_rk4(rhs, std::move(y0), span, cfg)
                                                   : run_rkf45(rhs, std::move(y0), span, cfg);
}

}  // namespace igflow
