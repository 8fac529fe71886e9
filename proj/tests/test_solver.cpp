#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracle.hpp"
#include "switchoff/solver.hpp"

using namespace switchoff;

namespace {

constexpr double kLn2 = std::numbers::ln2;
const ExponentialParams kCanonical{1.0, 1.0, kLn2, kLn2};
const LinearParams kLinear{2.0, 1.0, 1.0};

template <typename Fn>
ErrorKind kind_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected switchoff::Error";
  return ErrorKind::InvalidParams;
}

// Brute-force t1_hat: bisection on the Simpson-integrated total energy.
double brute_force_t1(const SupplyProfile& p, double Q) {
  auto total = [&](double t1) {
    auto rate = [&](double t) { return rate_at(p, t1, t); };
    return oracle::simpson(rate, 0.0, p.t0(), 4000) + oracle::simpson(rate, p.t0(), t1, 2) +
           oracle::simpson(rate, t1, t1 + p.T(), 4000) - Q;
  };
  return oracle::bisect(total, p.t0(), p.t0() + 10.0 * (Q / p.plateau_rate() + p.T()), 120);
}

}  // namespace

TEST(EnergyDemand, Validation) {
  EXPECT_EQ(kind_of([] { EnergyDemand{0.0}; }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EnergyDemand{-2.0}; }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { EnergyDemand{INFINITY}; }), ErrorKind::InvalidParams);
}

TEST(LatentHeatDemand, Examples) {
  EXPECT_EQ(latent_heat_demand(1.0, 5.0).value(), 5.0);
  EXPECT_EQ(latent_heat_demand(0.5, 4.0).value(), 2.0);
  EXPECT_EQ(kind_of([] { latent_heat_demand(-1.0, 5.0); }), ErrorKind::InvalidParams);
  EXPECT_EQ(kind_of([] { latent_heat_demand(1.0, 0.0); }), ErrorKind::InvalidParams);
}

TEST(ExponentialConstants, Canonical) {
  const auto c = exponential_constants(kCanonical, EnergyDemand(2.0));
  EXPECT_NEAR(c.L1, 2.0, 1e-14);
  EXPECT_NEAR(c.L2_paper, 2.0, 1e-14);
  EXPECT_NEAR(c.L2_consistent, 1.0, 1e-14);
  EXPECT_NEAR(c.L0, 0.386294361119890619, 1e-14);
  EXPECT_NEAR(c.L2_paper - c.L2_consistent, 1.0, 1e-14);
}

TEST(SolveExponential, Canonical) {
  const auto s = solve_exponential(kCanonical, EnergyDemand(2.0));
  EXPECT_NEAR(s.t1_hat, 2.079441541679835928, 1e-14);
  EXPECT_NEAR(s.t2, 2.772588722239781238, 1e-14);
  EXPECT_NEAR(s.y, kLn2, 1e-15);
  EXPECT_LE(std::abs(s.delivered_residual), 1e-9);
  EXPECT_EQ(s.method, Method::ClosedFormExponential);
  EXPECT_TRUE(s.feasible);
}

TEST(SolveExponential, FeasibilityBoundaryAndBelow) {
  const auto s = solve_exponential(kCanonical, EnergyDemand(0.613705638880109381));
  EXPECT_NEAR(s.t1_hat, kLn2, 1e-14);
  EXPECT_GE(s.t1_hat, kLn2);
  EXPECT_TRUE(s.feasible);
  EXPECT_EQ(kind_of([] { solve_exponential(kCanonical, EnergyDemand(0.5)); }), ErrorKind::QTooSmall);
}

TEST(SolveExponential, MatchesAntiderivativeBisection) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.1, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const ExponentialParams p{u(rng), u(rng), u(rng), u(rng)};
    const double Qmin = oracle::exponential_total_energy(p.a, p.b, p.t0, p.T, p.t0);
    const double Q = Qmin + std::expm1(p.a * p.t0) * u(rng);
    auto balance = [&](double t1) { return oracle::exponential_total_energy(p.a, p.b, p.t0, p.T, t1) - Q; };
    const double expected = oracle::bisect(balance, p.t0, p.t0 + 20.0);
    ASSERT_NEAR(solve_exponential(p, EnergyDemand(Q)).t1_hat, expected, 1e-9 * std::max(1.0, expected));
  }
}

TEST(SolveExponential, SmallExponentsUseStableForm) {
  // Reference values from 50-digit arithmetic.
  EXPECT_NEAR(solve_exponential({2e-4, 3e-4, 1.5, 2.0}, EnergyDemand(0.01)).t1_hat, 33.0784710833326767083, 1e-9);
  EXPECT_NEAR(solve_exponential({1e-9, 1e-9, 1.0, 1.0}, EnergyDemand(1e-8)).t1_hat, 9.9999999951666666675, 1e-9);
  // Either side of the series switch.
  EXPECT_NEAR(solve_exponential({0.7, 4e-4, 1.3, 2.5}, EnergyDemand(10.0)).t1_hat, 6.234537568761509792, 1e-11);
  EXPECT_NEAR(solve_exponential({0.7, 6e-4, 1.3, 2.5}, EnergyDemand(10.0)).t1_hat, 6.234641735419929931, 1e-11);
}

TEST(SolveExponential, LegacyCoefficientOvershootsByT) {
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    const ExponentialParams p{u(rng), u(rng), u(rng), u(rng)};
    const EnergyDemand Q(exponential_ramp_energy(p) + exponential_decay_energy(p) + u(rng));
    const auto c = exponential_constants(p, Q);
    const double shared = c.L0 + c.L1 * std::exp(-p.b * p.T);
    const double legacy = shared + c.L2_paper * p.T;
    ASSERT_NEAR(legacy - solve_exponential(p, Q).t1_hat, p.T, 1e-10);
  }
}

TEST(SolveLinear, Examples) {
  const auto s = solve_linear(kLinear, EnergyDemand(5.0));
  EXPECT_EQ(s.t1_hat, 2.5);
  EXPECT_EQ(s.t2, 3.5);
  EXPECT_EQ(s.method, Method::ClosedFormLinear);
  EXPECT_LE(std::abs(s.delivered_residual), 1e-12);
  EXPECT_EQ(solve_linear(kLinear, EnergyDemand(2.0)).t1_hat, 1.0);
  EXPECT_EQ(kind_of([] { solve_linear(kLinear, EnergyDemand(1.5)); }), ErrorKind::QTooSmall);
  EXPECT_EQ(kind_of([] { solve_linear({-2.0, 1.0, 1.0}, EnergyDemand(5.0)); }), ErrorKind::InvalidParams);
}

TEST(SolveGeneral, AgreesWithClosedForms) {
  const auto e = solve_general(exponential_profile(kCanonical), EnergyDemand(2.0));
  EXPECT_NEAR(e.t1_hat, 2.079441541679835928, 1e-12);
  EXPECT_EQ(e.method, Method::Theorem1);
  const auto l = solve_general(linear_profile(kLinear), EnergyDemand(5.0));
  EXPECT_NEAR(l.t1_hat, 2.5, 1e-12);
  EXPECT_NEAR(l.t2, 3.5, 1e-12);
}

TEST(SolveGeneral, ZeroPlateauDemand) {
  const auto p = linear_profile({3.0, 2.0, 0.5});
  const double Q = 0.5 * 3.0 * 2.0 + 0.5 * 3.0 * 0.5;
  EXPECT_NEAR(solve_general(p, EnergyDemand(Q)).t1_hat, 2.0, 1e-12);
  EXPECT_EQ(kind_of([&] { solve_general(p, EnergyDemand(0.9 * Q)); }), ErrorKind::QTooSmall);
}

TEST(SolveGeneral, DegenerateProfile) {
  const SupplyProfile flat([](double) { return 0.0; }, 1.0, [](double) { return 0.0; }, 1.0);
  EXPECT_EQ(kind_of([&] { solve_general(flat, EnergyDemand(1.0)); }), ErrorKind::DegenerateProfile);
}

TEST(SolveGeneral, TabulatedProfileAgainstBruteForce) {
  const auto p = tabulated_profile({{0, 0}, {0.4, 0.5}, {1.0, 1.8}, {1.5, 2.0}},
                                   {{0, 2.0}, {0.3, 0.9}, {1.1, 0.2}, {2.0, 0}});
  for (double Q : {3.0, 7.5, 40.0}) {
    const auto s = solve_general(p, EnergyDemand(Q));
    EXPECT_NEAR(s.t1_hat, brute_force_t1(p, Q), 1e-8) << Q;
    EXPECT_LE(std::abs(s.delivered_residual), 1e-8);
  }
}

TEST(SolveFamily, Examples) {
  const auto ep = exponential_profile(kCanonical);
  const auto e = solve_family(family_from_profile(ep, EnergyDemand(2.0)), EnergyDemand(2.0));
  EXPECT_NEAR(e.t1_hat, 2.079441541679835928, 1e-6);
  EXPECT_EQ(e.method, Method::Theorem2);
  EXPECT_NEAR(e.t2, e.t1_hat + kLn2, 1e-15);

  const auto lp = linear_profile(kLinear);
  const auto l = solve_family(family_from_profile(lp, EnergyDemand(5.0)), EnergyDemand(5.0));
  EXPECT_NEAR(l.t1_hat, 2.5, 1e-9);
  EXPECT_NEAR(l.t2, 3.5, 1e-9);
  EXPECT_LE(std::abs(l.delivered_residual), 1e-9);

  const auto fixed = family_from_profile(lp, EnergyDemand(100.0), Interval(1.0, 3.0));
  EXPECT_EQ(kind_of([&] { solve_family(fixed, EnergyDemand(100.0)); }), ErrorKind::NotBracketed);
  const auto low = family_from_profile(lp, EnergyDemand(1.0));
  EXPECT_EQ(kind_of([&] { solve_family(low, EnergyDemand(1.0)); }), ErrorKind::NotBracketed);
}

TEST(SolveFamily, ExpandsShortDomain) {
  auto family = family_from_profile(linear_profile(kLinear), EnergyDemand(1000.0), Interval(1.0, 1.5));
  family.expand_domain = true;
  EXPECT_NEAR(solve_family(family, EnergyDemand(1000.0)).t1_hat, 500.0, 1e-8);
}

TEST(SolveFamily, NonProfileFamily) {
  // Rate that keeps rising after switch-off, then falls linearly to zero over
  // one second: r = t on [0, t1], then t1 (1 - (t - t1)). Total = t1^2/2 + t1/2.
  EnergyFamily family;
  family.rate = [](double t, double t1) {
    if (t <= t1) return t;
    return std::max(0.0, t1 * (1.0 - (t - t1)));
  };
  family.extinction = [](double t1) { return t1 + 1.0; };
  family.breakpoints = [](double t1) { return std::vector<double>{t1}; };
  family.t1_domain = Interval(0.5, 10.0);
  const double Q = 6.0;  // t1^2 + t1 - 12 = 0 -> t1 = 3
  const auto s = solve_family(family, EnergyDemand(Q));
  EXPECT_NEAR(s.t1_hat, 3.0, 1e-9);
  EXPECT_NEAR(s.t2, 4.0, 1e-9);
}

TEST(SolveFamily, RejectsFamilyThatNeverDiesOut) {
  EnergyFamily family;
  family.rate = [](double, double) { return 1.0; };
  family.extinction = [](double t1) { return t1 + 1.0; };
  family.t1_domain = Interval(0.0, 5.0);
  EXPECT_EQ(kind_of([&] { solve_family(family, EnergyDemand(2.0)); }), ErrorKind::InvalidProfile);
}

TEST(NoSwitchoffTime, Examples) {
  const auto e = no_switchoff_time(exponential_profile(kCanonical), EnergyDemand(2.0));
  EXPECT_NEAR(e.time, 2.386294361119890619, 1e-10);
  EXPECT_FALSE(e.during_ramp);
  EXPECT_NEAR(no_switchoff_time(linear_profile(kLinear), EnergyDemand(5.0)).time, 3.0, 1e-12);
  EXPECT_NEAR(no_switchoff_time(linear_profile(kLinear), EnergyDemand(1.0)).time, 1.0, 1e-12);
}

TEST(NoSwitchoffTime, RampPhaseDemandIsFlagged) {
  // F(t) = t^2 on the linear ramp (a=2, t0=1), so F(t) = 0.5 at t = 1/sqrt(2).
  const auto r = no_switchoff_time(linear_profile(kLinear), EnergyDemand(0.5));
  EXPECT_TRUE(r.during_ramp);
  EXPECT_NEAR(r.time, std::sqrt(0.5), 1e-9);
}

// Invariants over randomized exponential instances.
class SolverProperties : public ::testing::Test {
 protected:
  struct Instance {
    ExponentialParams p;
    double Q;
  };
  std::vector<Instance> instances(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    std::vector<Instance> out;
    for (int i = 0; i < n; ++i) {
      const ExponentialParams p{u(rng), u(rng), u(rng), u(rng)};
      out.push_back({p, exponential_ramp_energy(p) + exponential_decay_energy(p) + std::expm1(p.a * p.t0) * u(rng)});
    }
    return out;
  }
};

TEST_F(SolverProperties, OracleEquivalenceAndEnergyBalance) {
  for (const auto& [p, Q] : instances(100, 31)) {
    const EnergyDemand demand(Q);
    const auto prof = exponential_profile(p);
    const auto closed = solve_exponential(p, demand);
    const auto general = solve_general(prof, demand);
    const auto family = solve_family(family_from_profile(prof, demand), demand);
    ASSERT_NEAR(closed.t1_hat, general.t1_hat, 1e-9);
    ASSERT_NEAR(general.t1_hat, family.t1_hat, 1e-6);
    for (const auto* s : {&closed, &general, &family}) {
      ASSERT_LE(std::abs(cumulative_energy(prof, s->t1_hat, s->t2) - Q), 1e-8);
    }
  }
}

TEST_F(SolverProperties, MonotoneInDemand) {
  for (const auto& [p, Q] : instances(20, 37)) {
    double prev = -INFINITY;
    for (int k = 0; k < 25; ++k) {
      const double t1 = solve_exponential(p, EnergyDemand(Q * (1.0 + 0.1 * k))).t1_hat;
      ASSERT_GT(t1, prev);
      prev = t1;
    }
  }
}

TEST_F(SolverProperties, OptimalityDirection) {
  for (const auto& [p, Q] : instances(50, 41)) {
    const auto s = solve_exponential(p, EnergyDemand(Q));
    auto deliverable = [&](double t1) {
      return exponential_ramp_energy(p) + std::expm1(p.a * p.t0) * (t1 - p.t0) + exponential_decay_energy(p);
    };
    if (s.t1_hat - 1e-3 >= p.t0) {
      ASSERT_LT(deliverable(s.t1_hat - 1e-3), Q);
    }
    ASSERT_GT(deliverable(s.t1_hat + 1e-3), Q);
  }
}

TEST_F(SolverProperties, NoSwitchoffMatchesLZeroPlusLOne) {
  for (const auto& [p, Q] : instances(50, 43)) {
    const auto c = exponential_constants(p, EnergyDemand(Q));
    const auto r = no_switchoff_time(exponential_profile(p), EnergyDemand(Q));
    ASSERT_FALSE(r.during_ramp);
    ASSERT_NEAR(r.time, c.L0 + c.L1, 1e-9 * std::max(1.0, r.time));
  }
}

TEST_F(SolverProperties, RateDiesExactlyAtCompletion) {
  for (const auto& [p, Q] : instances(50, 47)) {
    const auto prof = exponential_profile(p);
    for (const auto& s : {solve_exponential(p, EnergyDemand(Q)), solve_general(prof, EnergyDemand(Q))}) {
      ASSERT_NEAR(s.t2 - s.t1_hat, p.T, 4e-16 * s.t2);
      ASSERT_EQ(s.y, p.T);
      ASSERT_LE(std::abs(rate_at(prof, s.t1_hat, s.t2)), 1e-9);
    }
  }
}
