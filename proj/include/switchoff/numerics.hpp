#pragma once

// Deterministic numerical kernels: adaptive Gauss-Kronrod quadrature and a
// bracketing (Brent) root finder. Both are used as the independent oracle for
// the closed-form solvers.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "switchoff/error.hpp"

namespace switchoff {

/// Closed interval [lo, hi] with finite endpoints.
class Interval {
 public:
  Interval(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
      throw Error(ErrorKind::InvalidParams,
                  "interval endpoints must be finite with lo <= hi, got [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
    }
  }

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double width() const noexcept { return hi_ - lo_; }
  bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }

 private:
  double lo_;
  double hi_;
};

struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_iterations = 10'000;

  void validate() const {
    if (!(abs_tol > 0.0) || !std::isfinite(abs_tol) || !(rel_tol >= 0.0) || !std::isfinite(rel_tol) ||
        max_iterations < 1) {
      throw Error(ErrorKind::InvalidParams,
                  "tolerance requires abs_tol > 0, rel_tol >= 0 and max_iterations >= 1");
    }
  }
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK abscissae).
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double lo;
  double hi;
  double value;
  double error;
  double magnitude;  // integral of |f|, used for the round-off floor

  bool operator<(const Segment& other) const noexcept { return error < other.error; }
};

inline double checked_eval(const auto& f, double x) {
  const double y = static_cast<double>(f(x));
  if (!std::isfinite(y)) {
    throw Error(ErrorKind::NonFinite, "integrand is not finite at t = " + std::to_string(x));
  }
  return y;
}

template <typename F>
Segment gauss_kronrod_15(const F& f, double lo, double hi) {
  const double centre = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = checked_eval(f, centre);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  double magnitude = std::abs(kronrod);
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double f1 = checked_eval(f, centre - dx);
    const double f2 = checked_eval(f, centre + dx);
    kronrod += kKronrodWeights[j] * (f1 + f2);
    magnitude += kKronrodWeights[j] * (std::abs(f1) + std::abs(f2));
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * (f1 + f2);
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half), magnitude * std::abs(half)};
}

}  // namespace detail

/// Adaptive Gauss-Kronrod (G7/K15) quadrature of f over `domain`.
///
/// Interior `breakpoints` seed the initial partition so no panel straddles a
/// kink. Panels are bisected largest-error-first until the summed error
/// estimate meets max(abs_tol, rel_tol * |value|) or the bisection budget
/// (`max_iterations`) runs out.
template <typename F>
QuadratureResult integrate(const F& f, const Interval& domain, const Tolerance& tol = {},
                           std::span<const double> breakpoints = {}) {
  tol.validate();
  if (domain.width() == 0.0) return {};

  std::vector<double> cuts{domain.lo()};
  for (double b : breakpoints) {
    if (std::isfinite(b) && b > domain.lo() && b < domain.hi()) cuts.push_back(b);
  }
  cuts.push_back(domain.hi());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::priority_queue<detail::Segment> panels;
  double value = 0.0;
  double error = 0.0;
  double magnitude = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto s = detail::gauss_kronrod_15(f, cuts[i], cuts[i + 1]);
    value += s.value;
    error += s.error;
    magnitude += s.magnitude;
    panels.push(s);
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  auto target = [&] {
    return std::max({tol.abs_tol, tol.rel_tol * std::abs(value), 50.0 * eps * magnitude});
  };

  int iterations = 0;
  while (error > target()) {
    const detail::Segment worst = panels.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // panel at machine resolution
    if (++iterations > tol.max_iterations) {
      throw Error(ErrorKind::MaxIterationsExceeded,
                  "quadrature did not reach tolerance, error estimate " + std::to_string(error));
    }
    panels.pop();
    auto left = detail::gauss_kronrod_15(f, worst.lo, mid);
    auto right = detail::gauss_kronrod_15(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    magnitude += left.magnitude + right.magnitude - worst.magnitude;
    panels.push(left);
    panels.push(right);
  }

  // Re-sum in a fixed left-to-right order to drop the running-sum drift.
  std::vector<detail::Segment> all;
  all.reserve(panels.size());
  while (!panels.empty()) {
    all.push_back(panels.top());
    panels.pop();
  }
  std::sort(all.begin(), all.end(),
            [](const detail::Segment& x, const detail::Segment& y) { return x.lo < y.lo; });
  QuadratureResult out;
  for (const auto& s : all) {
    out.value += s.value;
    out.error_estimate += s.error;
  }
  return out;
}

/// Brent's method on a sign-changing bracket. Returns x in [lo, hi] with
/// |f(x)| <= abs_tol, or the bracket end once the bracket has collapsed to
/// machine resolution.
template <typename F>
double find_root(const F& f, const Interval& bracket, const Tolerance& tol = {}) {
  tol.validate();
  auto eval = [&](double x) {
    const double y = static_cast<double>(f(x));
    if (!std::isfinite(y)) {
      throw Error(ErrorKind::NonFinite, "root function is not finite at x = " + std::to_string(x));
    }
    return y;
  };

  double a = bracket.lo();
  double b = bracket.hi();
  double fa = eval(a);
  double fb = eval(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw Error(ErrorKind::NotBracketed, "f has the same sign at both ends of [" +
                                             std::to_string(a) + ", " + std::to_string(b) + "]");
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double c = a;
  double fc = fa;
  double d = b - a;
  double e = d;
  for (int iter = 0; iter < tol.max_iterations; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a;
      fc = fa;
      d = b - a;
      e = d;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b;
      b = c;
      c = a;
      fa = fb;
      fb = fc;
      fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + std::numeric_limits<double>::min();
    const double m = 0.5 * (c - b);
    if (std::abs(fb) <= tol.abs_tol || std::abs(m) <= tol1) return b;

    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      // Inverse quadratic interpolation, or secant when only two points.
      double p;
      double q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * m * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double r = fb / fc;
        p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
        q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) {
        q = -q;
      } else {
        p = -p;
      }
      if (2.0 * p < std::min(3.0 * m * q - std::abs(tol1 * q), std::abs(e * q))) {
        e = d;
        d = p / q;
      } else {
        d = m;
        e = m;
      }
    } else {
      d = m;
      e = m;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol1 ? d : (m > 0.0 ? tol1 : -tol1);
    fb = eval(b);
  }
  throw Error(ErrorKind::MaxIterationsExceeded, "root finder exhausted its iteration budget");
}

}  // namespace switchoff

#include "switchoff/random.hpp"
