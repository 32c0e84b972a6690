#pragma once

// Mean-field description of the rumour process on G(n, k, c/(n-2k-1)):
// the ignorant/spreader/stifler masses (x, y, z) obey
//
//   x' = -(2k+c)^2 a x y
//   y' =  (2k+c)^2 a x y - (2k+c)(1-a)(y+z) y - (2k+c) a y
//   z' =  (2k+c)(1-a)(y+z) y + (2k+c) a y
//
// with a = E[1/(X+2k)], X ~ Poisson(c). The final stifler mass solves
// z = 1 - exp(-lambda z), lambda = (2k+c) a + 1 - a, and has the closed form
// z_inf = 1 + W0(-lambda e^-lambda) / lambda.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mtsw/error.hpp"

namespace mtsw {

inline constexpr double kDefaultSeriesTol = 1e-14;

/// E[f(X)] for X ~ Poisson(mean). `f_bound` bounds |f| and is used to stop
/// once the neglected tail can contribute less than tol. Terms are evaluated
/// in log space so large means do not underflow.
template <typename Fn>
double poisson_expectation(double mean, Fn&& f, double f_bound, double tol = kDefaultSeriesTol) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw DomainError("Poisson mean must be finite and >= 0");
  if (mean == 0.0) return f(0.0);
  const double log_mean = std::log(mean);
  double mass = 0.0;
  double sum = 0.0;
  for (std::uint64_t x = 0;; ++x) {
    const double xd = static_cast<double>(x);
    const double pmf = std::exp(-mean + xd * log_mean - std::lgamma(xd + 1.0));
    mass += pmf;
    sum += pmf * f(xd);
    if (mass >= 1.0 - tol) break;
    // Past the mode the pmf decays at least geometrically with ratio mean/(x+1).
    if (xd + 1.0 > mean) {
      const double ratio = mean / (xd + 2.0);
      const double tail = pmf * (mean / (xd + 1.0)) / (1.0 - ratio);
      if (tail * f_bound < tol) break;
    }
    if (x > 100000 + static_cast<std::uint64_t>(10.0 * mean)) break;
  }
  return sum;
}

/// Probability that a uniform neighbour choice hits one specified local
/// neighbour in the large-n limit: E[1/(X+2k)], X ~ Poisson(c).
inline double alpha(std::uint32_t k, double c, double tol = kDefaultSeriesTol) {
  if (k < 1) throw DomainError("k must be >= 1");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  const double two_k = 2.0 * k;
  return poisson_expectation(
      c, [two_k](double x) { return 1.0 / (x + two_k); }, 1.0 / two_k, tol);
}

struct MeanFieldParams {
  std::uint32_t k = 1;
  double c = 0.0;
  double alpha = 0.5;
  double lambda = 1.0;

  /// alpha_override replaces the Poisson average, e.g. 1/(2k+c) for the
  /// degenerate case where every vertex has exactly c shortcuts.
  static MeanFieldParams make(std::uint32_t k, double c,
                              std::optional<double> alpha_override = std::nullopt) {
    if (k < 1) throw DomainError("k must be >= 1");
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("c must be finite and >= 0");
    MeanFieldParams p;
    p.k = k;
    p.c = c;
    p.alpha = alpha_override ? *alpha_override : mtsw::alpha(k, c);
    if (!(p.alpha > 0.0 && p.alpha <= 1.0)) throw DomainError("alpha must lie in (0, 1]");
    p.lambda = (2.0 * k + c) * p.alpha + 1.0 - p.alpha;
    return p;
  }

  [[nodiscard]] double mean_degree() const noexcept { return 2.0 * k + c; }
};

struct MeanFieldState {
  double x = 1.0;
  double y = 0.0;
  double z = 0.0;

  friend MeanFieldState operator+(MeanFieldState a, const MeanFieldState& b) noexcept {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
  }
  friend MeanFieldState operator*(double s, MeanFieldState a) noexcept {
    return {s * a.x, s * a.y, s * a.z};
  }
  [[nodiscard]] double total() const noexcept { return x + y + z; }
};

/// One initial spreader in a population of n_ref.
inline MeanFieldState initial_state(double n_ref = 1e4) {
  if (!(n_ref >= 1.0)) throw DomainError("n_ref must be >= 1");
  return {1.0 - 1.0 / n_ref, 1.0 / n_ref, 0.0};
}

inline MeanFieldState ode_rhs(const MeanFieldState& s, const MeanFieldParams& p) noexcept {
  const double d = p.mean_degree();
  const double contact = d * d * p.alpha * s.x * s.y;
  const double stifle = d * (1.0 - p.alpha) * (s.y + s.z) * s.y + d * p.alpha * s.y;
  return {-contact, contact - stifle, stifle};
}

struct TimedState {
  double t = 0.0;
  MeanFieldState state;
};

/// dt resolving the fastest rate in the system, 1e-3 / (2k+c)^2.
inline double default_dt(const MeanFieldParams& p) {
  const double d = p.mean_degree();
  return 1e-3 / (d * d);
}

namespace detail {

inline MeanFieldState rk4_step(const MeanFieldState& s, const MeanFieldParams& p, double dt) {
  const MeanFieldState k1 = ode_rhs(s, p);
  const MeanFieldState k2 = ode_rhs(s + (0.5 * dt) * k1, p);
  const MeanFieldState k3 = ode_rhs(s + (0.5 * dt) * k2, p);
  const MeanFieldState k4 = ode_rhs(s + dt * k3, p);
  return s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline void check_state(const MeanFieldState& s, double initial_total, double dt, double t) {
  // RK4 preserves the linear invariant x+y+z exactly in exact arithmetic, so
  // the drift budget is the larger of the truncation scale and round-off.
  const double drift_tol = std::max(10.0 * dt * dt * dt * dt, 1e-12);
  if (std::abs(s.total() - initial_total) > drift_tol) {
    throw StepSizeRejected("mass conservation drifted beyond " + std::to_string(drift_tol) +
                           " at t=" + std::to_string(t) + "; reduce dt");
  }
  if (s.x < -1e-12 || s.y < -1e-12 || s.z < -1e-12) {
    throw StepSizeRejected("negative mass at t=" + std::to_string(t) + "; reduce dt");
  }
}

inline void check_inputs(const MeanFieldState& y0, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be > 0");
  if (y0.x < 0.0 || y0.y < 0.0 || y0.z < 0.0 || std::abs(y0.total() - 1.0) > 1e-12) {
    throw DomainError("initial state must be non-negative with x+y+z = 1");
  }
}

}  // namespace detail

/// Classical fixed-step RK4 from t = 0 to t_max. Every `record_stride`-th
/// state is kept, plus the initial and final ones.
inline std::vector<TimedState> integrate(const MeanFieldParams& p, const MeanFieldState& y0,
                                         double t_max, double dt, std::size_t record_stride = 1) {
  detail::check_inputs(y0, dt);
  if (!(t_max > 0.0)) throw DomainError("t_max must be > 0");
  if (record_stride == 0) record_stride = 1;
  const auto steps = static_cast<std::uint64_t>(std::ceil(t_max / dt - 1e-9));
  std::vector<TimedState> out;
  out.push_back({0.0, y0});
  MeanFieldState s = y0;
  for (std::uint64_t i = 1; i <= steps; ++i) {
    const double h = i == steps ? t_max - static_cast<double>(steps - 1) * dt : dt;
    s = detail::rk4_step(s, p, h);
    const double t = i == steps ? t_max : static_cast<double>(i) * dt;
    detail::check_state(s, y0.total(), dt, t);
    if (i % record_stride == 0 || i == steps) out.push_back({t, s});
  }
  return out;
}

/// Integrates until the spreader mass first falls below y_floor after
/// having peaked. Throws if t_cap is reached first.
inline std::vector<TimedState> integrate_until_quiescent(const MeanFieldParams& p,
                                                         const MeanFieldState& y0, double dt,
                                                         double y_floor = 1e-10,
                                                         std::size_t record_stride = 1,
                                                         double t_cap = 1e6) {
  detail::check_inputs(y0, dt);
  if (record_stride == 0) record_stride = 1;
  std::vector<TimedState> out;
  out.push_back({0.0, y0});
  MeanFieldState s = y0;
  if (s.y < y_floor) return out;
  for (std::uint64_t i = 1;; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (t > t_cap) throw StepSizeRejected("spreader mass did not decay before t_cap");
    s = detail::rk4_step(s, p, dt);
    detail::check_state(s, y0.total(), dt, t);
    const bool done = s.y < y_floor;
    if (i % record_stride == 0 || done) out.push_back({t, s});
    if (done) return out;
  }
}

/// Principal branch of the Lambert W function (inverse of w -> w e^w) on
/// [-1/e, inf). Halley iteration from a branch-point series, log1p, or
/// asymptotic starting guess.
inline double lambert_w0(double x) {
  constexpr double kInvE = 0.36787944117144233;
  constexpr double kE = 2.718281828459045;
  if (std::isnan(x)) return x;
  if (x < -kInvE) {
    throw DomainError("lambert_w0: argument " + std::to_string(x) + " is below -1/e");
  }
  if (x == -kInvE) return -1.0;
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  double w;
  if (x < -0.32) {
    const double q = std::max(0.0, 2.0 * (kE * x + 1.0));
    const double r = std::sqrt(q);
    w = -1.0 + r - r * r / 3.0 + 11.0 / 72.0 * r * r * r;
  } else if (x < 3.0) {
    w = 0.5 * std::log1p(x) + 0.25 * x / (1.0 + x);
  } else {
    const double l1 = std::log(x);
    const double l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }

  for (int iter = 0; iter < 100; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    const double wp1 = w + 1.0;
    if (wp1 == 0.0 || f == 0.0) break;
    const double denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
    const double step = f / denom;
    const double next = std::max(-1.0, w - step);
    if (std::abs(next - w) <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(next))) {
      w = next;
      break;
    }
    w = next;
  }
  return w;
}

/// lambda = (2k+c) alpha + 1 - alpha
inline double growth_exponent(std::uint32_t k, double c) {
  return MeanFieldParams::make(k, c).lambda;
}

/// Final stifler mass for a given exponent lambda: the non-trivial root of
/// z = 1 - exp(-lambda z) when lambda > 1, otherwise 0.
inline double z_infinity_from_exponent(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and > 0");
  if (lambda <= 1.0) return 0.0;
  const double w = lambert_w0(-lambda * std::exp(-lambda));
  return std::max(0.0, 1.0 + w / lambda);
}

inline double z_infinity(std::uint32_t k, double c) {
  return z_infinity_from_exponent(MeanFieldParams::make(k, c).lambda);
}

inline double z_infinity(const MeanFieldParams& p) { return z_infinity_from_exponent(p.lambda); }

}  // namespace mtsw
