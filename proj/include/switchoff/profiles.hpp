#pragma once

// Piecewise supply-rate profiles: a ramp f on [0, t0], a plateau at f(t0) until
// the switch-off time t1, a decay h(t - t1) on [t1, t1 + T] and zero afterwards.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "switchoff/error.hpp"
#include "switchoff/numerics.hpp"

namespace switchoff {

struct ExponentialParams {
  double a;   // ramp growth rate, 1/s
  double b;   // decay rate, 1/s
  double t0;  // end of ramp, s
  double T;   // decay duration, s

  void validate() const {
    for (double v : {a, b, t0, T}) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw Error(ErrorKind::InvalidParams, "exponential model needs finite a, b, t0, T > 0");
      }
    }
  }
};

struct LinearParams {
  double a;   // plateau rate, W
  double t0;  // end of ramp, s
  double T;   // decay duration, s

  void validate() const {
    for (double v : {a, t0, T}) {
      if (!std::isfinite(v) || !(v > 0.0)) {
        throw Error(ErrorKind::InvalidParams, "linear model needs finite a, t0, T > 0");
      }
    }
  }
};

using RateFunction = std::function<double(double)>;

/// Immutable ramp/plateau/decay profile. The decay is stored as a shape in
/// elapsed time since switch-off, so one profile serves every t1 >= t0.
class SupplyProfile {
 public:
  /// `ramp_knots` (in [0, t0]) and `decay_knots` (elapsed time in [0, T]) list
  /// interior kinks of f and h, if any; they are forwarded to the quadrature.
  SupplyProfile(RateFunction ramp, double t0, RateFunction decay_shape, double T,
                std::vector<double> ramp_knots = {}, std::vector<double> decay_knots = {})
      : ramp_(std::move(ramp)),
        decay_(std::move(decay_shape)),
        t0_(t0),
        T_(T),
        ramp_knots_(std::move(ramp_knots)),
        decay_knots_(std::move(decay_knots)) {
    if (!ramp_ || !decay_) throw Error(ErrorKind::InvalidProfile, "ramp and decay must be callable");
    if (!std::isfinite(t0_) || !(t0_ > 0.0) || !std::isfinite(T_) || !(T_ > 0.0)) {
      throw Error(ErrorKind::InvalidProfile, "t0 and T must be finite and positive");
    }
    plateau_ = ramp_(t0_);
    check_invariants();
  }

  double ramp(double t) const { return ramp_(t); }
  double decay(double u) const { return decay_(u); }
  double t0() const noexcept { return t0_; }
  double T() const noexcept { return T_; }
  double plateau_rate() const noexcept { return plateau_; }

  /// Kinks of the rate for switch-off time t1: t0, t1, t1 + T and any interior
  /// knots of the ramp and decay.
  std::vector<double> breakpoints(double t1) const {
    std::vector<double> out = ramp_knots_;
    out.push_back(t0_);
    out.push_back(t1);
    for (double u : decay_knots_) out.push_back(t1 + u);
    out.push_back(t1 + T_);
    return out;
  }
  std::span<const double> ramp_knots() const noexcept { return ramp_knots_; }
  std::span<const double> decay_knots() const noexcept { return decay_knots_; }

 private:
  void check_invariants() const {
    constexpr int kSamples = 256;
    auto slack = [](double v) { return 1e-12 * std::max(1.0, std::abs(v)); };

    const double f0 = ramp_(0.0);
    if (!std::isfinite(plateau_) || !std::isfinite(f0) || std::abs(f0) > 1e-12) {
      throw Error(ErrorKind::InvalidProfile, "ramp must start at f(0) = 0");
    }
    double prev = f0;
    for (int i = 1; i <= kSamples; ++i) {
      const double v = ramp_(t0_ * i / kSamples);
      if (!std::isfinite(v) || v < prev - slack(prev)) {
        throw Error(ErrorKind::InvalidProfile, "ramp must be finite and nondecreasing on [0, t0]");
      }
      prev = v;
    }

    const double h0 = decay_(0.0);
    const double hT = decay_(T_);
    if (!std::isfinite(h0) || std::abs(h0 - plateau_) > 1e-9 * std::max(1.0, std::abs(plateau_))) {
      throw Error(ErrorKind::InvalidProfile, "decay must start at the plateau rate, h(0) = f(t0)");
    }
    if (!std::isfinite(hT) || std::abs(hT) > 1e-9 * std::max(1.0, std::abs(plateau_))) {
      throw Error(ErrorKind::InvalidProfile, "decay must vanish at h(T) = 0");
    }
    prev = h0;
    for (int i = 1; i <= kSamples; ++i) {
      const double v = decay_(T_ * i / kSamples);
      if (!std::isfinite(v) || v > prev + slack(prev)) {
        throw Error(ErrorKind::InvalidProfile, "decay must be finite and nonincreasing on [0, T]");
      }
      prev = v;
    }
  }

  RateFunction ramp_;
  RateFunction decay_;
  double t0_;
  double T_;
  std::vector<double> ramp_knots_;
  std::vector<double> decay_knots_;
  double plateau_ = 0.0;
};

/// f(t) = e^{at} - 1, h(u) = (e^{a t0} - 1)(e^{-bu} - e^{-bT}) / (1 - e^{-bT}).
inline SupplyProfile exponential_profile(const ExponentialParams& p) {
  p.validate();
  const double peak = std::expm1(p.a * p.t0);
  auto ramp = [a = p.a](double t) { return std::expm1(a * t); };
  // e^{-bu} - e^{-bT} = -e^{-bu} expm1(-b(T - u)); the ratio is exactly 1 at u = 0
  // and exactly 0 at u = T.
  auto decay = [b = p.b, T = p.T, peak](double u) {
    const double num = -std::exp(-b * u) * std::expm1(-b * (T - u));
    const double den = -std::expm1(-b * T);
    return peak * (num / den);
  };
  return SupplyProfile(ramp, p.t0, decay, p.T);
}

/// f(t) = a t / t0, h(u) = a (1 - u / T).
inline SupplyProfile linear_profile(const LinearParams& p) {
  p.validate();
  auto ramp = [a = p.a, t0 = p.t0](double t) { return a * (t / t0); };
  auto decay = [a = p.a, T = p.T](double u) { return a * (1.0 - u / T); };
  return SupplyProfile(ramp, p.t0, decay, p.T);
}

inline void require_after_peak(const SupplyProfile& profile, double t1) {
  if (!std::isfinite(t1) || t1 < profile.t0()) {
    throw Error(ErrorKind::SwitchOffBeforePeak, "switch-off time " + std::to_string(t1) +
                                                    " precedes the ramp end t0 = " +
                                                    std::to_string(profile.t0()));
  }
}

inline double rate_at(const SupplyProfile& profile, double t1, double t) {
  require_after_peak(profile, t1);
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParams, "time must be nonnegative");
  if (t <= profile.t0()) return profile.ramp(t);
  if (t <= t1) return profile.plateau_rate();
  const double u = t - t1;
  if (u <= profile.T()) return profile.decay(u);
  return 0.0;
}

inline double extinction_time(const SupplyProfile& profile, double t1) {
  require_after_peak(profile, t1);
  return t1 + profile.T();
}

/// Energy delivered on [0, t] when switching off at t1.
inline double cumulative_energy(const SupplyProfile& profile, double t1, double t,
                                const Tolerance& tol = {}) {
  require_after_peak(profile, t1);
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParams, "time must be nonnegative");
  const double upper = std::min(t, extinction_time(profile, t1));
  const auto cuts = profile.breakpoints(t1);
  return integrate([&](double s) { return rate_at(profile, t1, s); }, Interval(0.0, upper), tol,
                   cuts)
      .value;
}

struct RateSample {
  double time;
  double rate;
};

namespace detail {

class PiecewiseLinear {
 public:
  explicit PiecewiseLinear(std::vector<RateSample> samples) : samples_(std::move(samples)) {}

  double operator()(double t) const {
    const auto& s = samples_;
    if (t <= s.front().time) return s.front().rate;
    if (t >= s.back().time) return s.back().rate;
    const auto hi = std::upper_bound(s.begin(), s.end(), t,
                                     [](double x, const RateSample& r) { return x < r.time; });
    const auto lo = hi - 1;
    const double w = (t - lo->time) / (hi->time - lo->time);
    return lo->rate + w * (hi->rate - lo->rate);
  }

 private:
  std::vector<RateSample> samples_;
};

inline void check_samples(const std::vector<RateSample>& samples, const char* name,
                          bool increasing_rate) {
  if (samples.size() < 2) {
    throw Error(ErrorKind::EmptySamples, std::string(name) + " needs at least two samples");
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (!std::isfinite(s.time) || !std::isfinite(s.rate) || s.rate < 0.0) {
      throw Error(ErrorKind::InvalidProfile,
                  std::string(name) + " samples must be finite with nonnegative rates");
    }
    if (i == 0) continue;
    const auto& prev = samples[i - 1];
    const bool rate_ok = increasing_rate ? s.rate >= prev.rate : s.rate <= prev.rate;
    if (!(s.time > prev.time) || !rate_ok) {
      throw Error(ErrorKind::NonMonotoneSamples,
                  std::string(name) + " samples are not monotone at index " + std::to_string(i));
    }
  }
  if (samples.front().time != 0.0) {
    throw Error(ErrorKind::InvalidProfile, std::string(name) + " samples must start at time 0");
  }
}

}  // namespace detail

/// Profile from measured samples, linearly interpolated. Decay times are
/// elapsed time since switch-off; T is the last decay sample time.
inline SupplyProfile tabulated_profile(std::vector<RateSample> ramp_samples,
                                       std::vector<RateSample> decay_samples) {
  detail::check_samples(ramp_samples, "ramp", true);
  detail::check_samples(decay_samples, "decay", false);
  if (ramp_samples.front().rate != 0.0) {
    throw Error(ErrorKind::InvalidProfile, "ramp samples must start at (0, 0)");
  }
  if (decay_samples.back().rate != 0.0) {
    throw Error(ErrorKind::InvalidProfile, "decay samples must end with rate 0");
  }
  const double peak = ramp_samples.back().rate;
  const double start = decay_samples.front().rate;
  if (std::abs(peak - start) > 1e-6 * std::max(std::abs(peak), std::abs(start))) {
    throw Error(ErrorKind::ContinuityMismatch,
                "first decay rate " + std::to_string(start) + " differs from last ramp rate " +
                    std::to_string(peak));
  }
  decay_samples.front().rate = peak;  // exact continuity at switch-off

  const double t0 = ramp_samples.back().time;
  const double T = decay_samples.back().time;
  std::vector<double> ramp_knots;
  std::vector<double> decay_knots;
  for (std::size_t i = 1; i + 1 < ramp_samples.size(); ++i) ramp_knots.push_back(ramp_samples[i].time);
  for (std::size_t i = 1; i + 1 < decay_samples.size(); ++i) decay_knots.push_back(decay_samples[i].time);
  auto ramp = std::make_shared<const detail::PiecewiseLinear>(std::move(ramp_samples));
  auto decay = std::make_shared<const detail::PiecewiseLinear>(std::move(decay_samples));
  return SupplyProfile([ramp](double t) { return (*ramp)(t); }, t0,
                       [decay](double u) { return (*decay)(u); }, T, std::move(ramp_knots),
                       std::move(decay_knots));
}

}  // namespace switchoff
