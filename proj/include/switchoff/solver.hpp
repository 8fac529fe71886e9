#pragma once

// Optimal switch-off time: closed forms for the exponential and linear models,
// the energy-balance solver for arbitrary profiles and the nested solver for
// general rate families.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "switchoff/error.hpp"
#include "switchoff/numerics.hpp"
#include "switchoff/profiles.hpp"

namespace switchoff {

/// Energy Q (J) that must reach the system; strictly positive.
class EnergyDemand {
 public:
  explicit EnergyDemand(double joules) : value_(joules) {
    if (!std::isfinite(joules) || !(joules > 0.0)) {
      throw Error(ErrorKind::InvalidParams, "energy demand must be finite and positive");
    }
  }
  double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Q = m Lv, the energy for a complete phase transition of mass m.
inline EnergyDemand latent_heat_demand(double mass, double latent_heat) {
  if (!std::isfinite(mass) || !(mass > 0.0) || !std::isfinite(latent_heat) || !(latent_heat > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "mass and latent heat must be finite and positive");
  }
  return EnergyDemand(mass * latent_heat);
}

enum class Method { ClosedFormExponential, ClosedFormLinear, Theorem1, Theorem2 };

constexpr std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::ClosedFormExponential: return "closed_form_exponential";
    case Method::ClosedFormLinear: return "closed_form_linear";
    case Method::Theorem1: return "theorem1";
    case Method::Theorem2: return "theorem2";
  }
  return "unknown";
}

struct SwitchOffSolution {
  double t1_hat = 0.0;
  double t2 = 0.0;
  double y = 0.0;  // t2 - t1_hat
  double delivered_residual = 0.0;
  Method method = Method::Theorem1;
  bool feasible = false;
};

/// Constants of the exponential model's switch-off relation
/// t1 = L0 + L1 e^{-by} + L2 y. Both y-coefficients are kept: `L2_paper` is
/// the legacy 1/(1 - e^{-bT}); `L2_consistent` = e^{-bT}/(1 - e^{-bT}) is
/// what expanding the energy integral actually gives, and it is the one the
/// solver uses. They differ by exactly 1, i.e. a shift of T in t1_hat.
struct ExponentialConstants {
  double L0;
  double L1;
  double L2_paper;
  double L2_consistent;
};

namespace detail {

inline constexpr double kSeriesThreshold = 1e-3;

// (e^{x} - 1)/x - 1, accurate for small x.
inline double expm1_ratio_minus_one(double x) {
  if (std::abs(x) < kSeriesThreshold) {
    return x * (1.0 / 2 + x * (1.0 / 6 + x * (1.0 / 24 + x * (1.0 / 120 + x / 720))));
  }
  return std::expm1(x) / x - 1.0;
}

// 1 - x/(e^{x} - 1), accurate for small x.
inline double one_minus_bernoulli_ratio(double x) {
  if (std::abs(x) < kSeriesThreshold) {
    const double x2 = x * x;
    return x / 2 - x2 / 12 + x2 * x2 / 720 - x2 * x2 * x2 / 30240;
  }
  return 1.0 - x / std::expm1(x);
}

// t1_hat slightly below t0 from rounding at the feasibility boundary counts as t0.
inline double enforce_feasible(double t1_hat, double t0, std::string_view what) {
  if (!std::isfinite(t1_hat)) {
    throw Error(ErrorKind::NonFinite, std::string(what) + ": switch-off time is not finite");
  }
  if (t1_hat < t0) {
    if (t0 - t1_hat <= 1e-12 * std::max(1.0, t0)) return t0;
    throw Error(ErrorKind::QTooSmall,
                std::string(what) + ": demand is met before the rate stabilizes (t1_hat = " +
                    std::to_string(t1_hat) + " < t0 = " + std::to_string(t0) + ")");
  }
  return t1_hat;
}

inline SwitchOffSolution assemble(const SupplyProfile& profile, double t1_hat, double Q,
                                  Method method, const Tolerance& tol) {
  SwitchOffSolution s;
  s.t1_hat = t1_hat;
  s.y = profile.T();
  s.t2 = t1_hat + s.y;
  s.delivered_residual = cumulative_energy(profile, t1_hat, s.t2, tol) - Q;
  s.method = method;
  s.feasible = t1_hat >= profile.t0();
  return s;
}

}  // namespace detail

/// F(t0) = (e^{a t0} - 1)/a - t0, the energy delivered during the ramp.
inline double exponential_ramp_energy(const ExponentialParams& p) {
  p.validate();
  return p.t0 * detail::expm1_ratio_minus_one(p.a * p.t0);
}

/// H(T) = (e^{a t0} - 1)(1/b - T/(e^{bT} - 1)), the energy delivered during decay.
inline double exponential_decay_energy(const ExponentialParams& p) {
  p.validate();
  return std::expm1(p.a * p.t0) * detail::one_minus_bernoulli_ratio(p.b * p.T) / p.b;
}

inline ExponentialConstants exponential_constants(const ExponentialParams& p, EnergyDemand demand) {
  p.validate();
  const double Q = demand.value();
  const double peak = std::expm1(p.a * p.t0);  // e^{a t0} - 1
  const double one_minus_decay = -std::expm1(-p.b * p.T);  // 1 - e^{-bT}
  ExponentialConstants c{};
  c.L1 = 1.0 / (p.b * one_minus_decay);
  c.L2_paper = 1.0 / one_minus_decay;
  c.L2_consistent = std::exp(-p.b * p.T) / one_minus_decay;
  // (Q + 1/a - e^{a t0}/a + e^{a t0} t0 - (e^{a t0} - 1) L1) / (e^{a t0} - 1)
  c.L0 = (Q - peak / p.a + (peak + 1.0) * p.t0) / peak - c.L1;
  return c;
}

inline SwitchOffSolution solve_exponential(const ExponentialParams& p, EnergyDemand demand,
                                           const Tolerance& tol = {}) {
  p.validate();
  const double Q = demand.value();
  double t1_hat;
  const auto c = exponential_constants(p, demand);
  if (p.a * p.t0 >= detail::kSeriesThreshold && c.L1 < 1e3) {
    t1_hat = c.L0 + c.L1 * std::exp(-p.b * p.T) + c.L2_consistent * p.T;
  } else {
    // L0 and L1 carry terms of size 1/(a t0) and 1/(b^2 T) that cancel in
    // t1_hat; evaluate the energy balance with the series-backed F and H.
    const double peak = std::expm1(p.a * p.t0);
    t1_hat = p.t0 + (Q - exponential_ramp_energy(p) - exponential_decay_energy(p)) / peak;
  }
  t1_hat = detail::enforce_feasible(t1_hat, p.t0, "exponential model");
  return detail::assemble(exponential_profile(p), t1_hat, Q, Method::ClosedFormExponential, tol);
}

inline SwitchOffSolution solve_linear(const LinearParams& p, EnergyDemand demand,
                                      const Tolerance& tol = {}) {
  p.validate();
  const double Q = demand.value();
  const double margin = Q / p.a - p.T / 2 - p.t0 / 2;
  if (margin < 0.0 && -margin > 1e-12 * std::max(1.0, Q / p.a)) {
    throw Error(ErrorKind::QTooSmall, "linear model: Q/a - T/2 - t0/2 = " +
                                          std::to_string(margin) + " is negative");
  }
  const double t1_hat = std::max(p.t0, -p.T / 2 + Q / p.a + p.t0 / 2);
  return detail::assemble(linear_profile(p), t1_hat, Q, Method::ClosedFormLinear, tol);
}

/// Energy balance F(t0) + f(t0)(t1 - t0) + H(T) = Q with F and H by quadrature.
inline SwitchOffSolution solve_general(const SupplyProfile& profile, EnergyDemand demand,
                                       const Tolerance& tol = {}) {
  const double Q = demand.value();
  const double peak = profile.plateau_rate();
  if (!(peak > 0.0)) {
    throw Error(ErrorKind::DegenerateProfile, "plateau rate f(t0) must be positive");
  }
  const double ramp_energy = integrate([&](double t) { return profile.ramp(t); },
                                       Interval(0.0, profile.t0()), tol, profile.ramp_knots())
                                 .value;
  const double decay_energy = integrate([&](double u) { return profile.decay(u); },
                                        Interval(0.0, profile.T()), tol, profile.decay_knots())
                                  .value;
  double t1_hat = profile.t0() + (Q - ramp_energy - decay_energy) / peak;
  t1_hat = detail::enforce_feasible(t1_hat, profile.t0(), "general profile");
  return detail::assemble(profile, t1_hat, Q, Method::Theorem1, tol);
}

/// A family of rate curves r(t; t1) indexed by switch-off time.
struct EnergyFamily {
  std::function<double(double t, double t1)> rate;
  /// First time after which r(.; t1) is identically zero.
  std::function<double(double t1)> extinction;
  Interval t1_domain{0.0, 0.0};
  /// Optional kinks of r(.; t1) handed to the quadrature.
  std::function<std::vector<double>(double t1)> breakpoints;
  /// Grow t1_domain.hi geometrically (up to 60 doublings) until Q is bracketed.
  bool expand_domain = false;
  /// Typical rate magnitude; the rate at extinction must be within 1e-9 of it.
  double rate_scale = 1.0;
};

inline double family_total_energy(const EnergyFamily& family, double t1, const Tolerance& tol = {}) {
  const double end = family.extinction(t1);
  if (!std::isfinite(end) || end < 0.0) {
    throw Error(ErrorKind::InvalidProfile, "extinction time must be finite and nonnegative");
  }
  const double tail = family.rate(end, t1);
  if (!(std::abs(tail) <= 1e-9 * std::max(1.0, family.rate_scale))) {
    throw Error(ErrorKind::InvalidProfile,
                "rate at extinction is " + std::to_string(tail) + ", expected 0");
  }
  std::vector<double> cuts;
  if (family.breakpoints) cuts = family.breakpoints(t1);
  return integrate([&](double t) { return family.rate(t, t1); }, Interval(0.0, end), tol, cuts)
      .value;
}

/// Nested solve: t2 = extinction(t1) makes the final rate vanish, and the outer
/// root finder drives the delivered energy at t2 to Q.
inline SwitchOffSolution solve_family(const EnergyFamily& family, EnergyDemand demand,
                                      const Tolerance& tol = {}) {
  if (!family.rate || !family.extinction) {
    throw Error(ErrorKind::InvalidParams, "energy family needs rate and extinction functions");
  }
  const double Q = demand.value();
  auto residual = [&](double t1) { return family_total_energy(family, t1, tol) - Q; };

  const double lo = family.t1_domain.lo();
  double hi = family.t1_domain.hi();
  const double r_lo = residual(lo);
  if (r_lo > 0.0) {
    throw Error(ErrorKind::NotBracketed, "Q = " + std::to_string(Q) +
                                             " is below the least reachable energy " +
                                             std::to_string(r_lo + Q));
  }
  double r_hi = residual(hi);
  for (int doubling = 0; r_hi < 0.0 && family.expand_domain && doubling < 60; ++doubling) {
    hi = lo + 2.0 * std::max(hi - lo, 1.0);
    r_hi = residual(hi);
  }
  if (r_hi < 0.0) {
    throw Error(ErrorKind::NotBracketed, "Q = " + std::to_string(Q) +
                                             " exceeds the reachable energy " +
                                             std::to_string(r_hi + Q) + " at t1 = " +
                                             std::to_string(hi));
  }

  SwitchOffSolution s;
  s.t1_hat = r_lo == 0.0 ? lo : find_root(residual, Interval(lo, hi), tol);
  s.t2 = family.extinction(s.t1_hat);
  s.y = s.t2 - s.t1_hat;
  s.delivered_residual = residual(s.t1_hat);
  s.method = Method::Theorem2;
  s.feasible = true;
  return s;
}

/// The family {rate_at(profile, t1, .)}; by default searches t1 in
/// [t0, t0 + 10 (Q/f(t0) + T)] and expands as needed.
inline EnergyFamily family_from_profile(const SupplyProfile& profile, EnergyDemand demand,
                                        std::optional<Interval> t1_domain = std::nullopt) {
  const double t0 = profile.t0();
  EnergyFamily family;
  family.rate = [profile](double t, double t1) { return rate_at(profile, t1, t); };
  family.extinction = [profile](double t1) { return extinction_time(profile, t1); };
  family.breakpoints = [profile](double t1) { return profile.breakpoints(t1); };
  family.rate_scale = profile.plateau_rate();
  if (t1_domain) {
    family.t1_domain = *t1_domain;
  } else {
    const double peak = profile.plateau_rate();
    if (!(peak > 0.0)) throw Error(ErrorKind::DegenerateProfile, "plateau rate must be positive");
    family.t1_domain = Interval(t0, t0 + 10.0 * (demand.value() / peak + profile.T()));
    family.expand_domain = true;
  }
  return family;
}

struct NoSwitchOffTime {
  double time;
  /// True when Q is already delivered during the ramp (Q < F(t0)); `time`
  /// then solves F(t) = Q on [0, t0].
  bool during_ramp;
};

/// When the device must stay on to deliver Q by itself (no decay contribution).
inline NoSwitchOffTime no_switchoff_time(const SupplyProfile& profile, EnergyDemand demand,
                                         const Tolerance& tol = {}) {
  const double Q = demand.value();
  const double peak = profile.plateau_rate();
  auto ramp = [&](double t) { return profile.ramp(t); };
  const double ramp_energy = integrate(ramp, Interval(0.0, profile.t0()), tol, profile.ramp_knots()).value;
  if (Q >= ramp_energy) {
    if (!(peak > 0.0)) throw Error(ErrorKind::DegenerateProfile, "plateau rate must be positive");
    return {profile.t0() + (Q - ramp_energy) / peak, false};
  }
  auto deficit = [&](double t) {
    return integrate(ramp, Interval(0.0, t), tol, profile.ramp_knots()).value - Q;
  };
  return {find_root(deficit, Interval(0.0, profile.t0()), tol), true};
}

}  // namespace switchoff
