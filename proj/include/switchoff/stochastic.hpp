#pragma once

// Noisy supply line: on each phase the rate follows the affine Ito SDE
//   d(phi) = (c1 phi + c2) dt + (c3 phi + c4) dB.
// Paths are simulated with Euler-Maruyama; the mean solves the drift ODE, which
// reduces the noisy switch-off problem to the deterministic one.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <limits>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "switchoff/error.hpp"
#include "switchoff/numerics.hpp"
#include "switchoff/profiles.hpp"
#include "switchoff/random.hpp"
#include "switchoff/solver.hpp"

namespace switchoff {

struct AffinePhase {
  double c1 = 0.0;  // 1/s
  double c2 = 0.0;  // W/s
  double c3 = 0.0;  // 1/sqrt(s)
  double c4 = 0.0;  // W/sqrt(s)
  double start = 0.0;
  double end = std::numeric_limits<double>::infinity();  // open for the final phase
};

class PiecewiseAffineSde {
 public:
  explicit PiecewiseAffineSde(std::vector<AffinePhase> phases, double initial_value = 0.0)
      : phases_(std::move(phases)), initial_value_(initial_value) {
    if (phases_.empty()) throw Error(ErrorKind::InvalidParams, "SDE needs at least one phase");
    if (!std::isfinite(initial_value_)) {
      throw Error(ErrorKind::InvalidParams, "initial value must be finite");
    }
    if (phases_.front().start != 0.0) {
      throw Error(ErrorKind::InvalidParams, "first phase must start at t = 0");
    }
    for (std::size_t i = 0; i < phases_.size(); ++i) {
      const auto& ph = phases_[i];
      const bool last = i + 1 == phases_.size();
      if (!std::isfinite(ph.c1) || !std::isfinite(ph.c2) || !std::isfinite(ph.c3) ||
          !std::isfinite(ph.c4) || !std::isfinite(ph.start) || !(ph.start < ph.end) ||
          (!last && !std::isfinite(ph.end))) {
        throw Error(ErrorKind::InvalidParams,
                    "phase " + std::to_string(i) + " has non-finite coefficients or bounds");
      }
      if (i > 0 && ph.start != phases_[i - 1].end) {
        throw Error(ErrorKind::InvalidParams, "phases must be contiguous");
      }
    }
  }

  std::span<const AffinePhase> phases() const noexcept { return phases_; }
  double initial_value() const noexcept { return initial_value_; }

  /// Index of the phase covering t; phase boundaries belong to the later phase
  /// and times past a finite final end stay in the final phase.
  std::size_t phase_index(double t) const noexcept {
    const auto it = std::upper_bound(phases_.begin(), phases_.end(), t,
                                     [](double x, const AffinePhase& p) { return x < p.start; });
    return it == phases_.begin() ? 0 : static_cast<std::size_t>(it - phases_.begin() - 1);
  }

 private:
  std::vector<AffinePhase> phases_;
  double initial_value_;
};

struct PhaseNoise {
  double c3 = 0.0;
  double c4 = 0.0;
};

/// Noise on the ramp, plateau and decay phases. The rate after extinction is
/// kept noise-free.
struct NoiseModel {
  PhaseNoise ramp;
  PhaseNoise plateau;
  PhaseNoise decay;

  static NoiseModel uniform(double c3, double c4) { return {{c3, c4}, {c3, c4}, {c3, c4}}; }
};

namespace detail {

inline std::vector<AffinePhase> tie_phases(double t0, double t1, double T, AffinePhase ramp,
                                           AffinePhase decay, const NoiseModel& noise) {
  std::vector<AffinePhase> out;
  ramp.c3 = noise.ramp.c3;
  ramp.c4 = noise.ramp.c4;
  ramp.start = 0.0;
  ramp.end = t0;
  out.push_back(ramp);
  if (t1 > t0) out.push_back({0.0, 0.0, noise.plateau.c3, noise.plateau.c4, t0, t1});
  decay.c3 = noise.decay.c3;
  decay.c4 = noise.decay.c4;
  decay.start = t1;
  decay.end = t1 + T;
  out.push_back(decay);
  out.push_back({0.0, 0.0, 0.0, 0.0, t1 + T, std::numeric_limits<double>::infinity()});
  return out;
}

}  // namespace detail

/// Drift coefficients whose tied-up solution is the exponential-model rate:
/// ramp (a, a), plateau (0, 0), decay (-b, -b C e^{-bT}) with
/// C = (e^{a t0} - 1)/(1 - e^{-bT}), then zero after t1 + T.
inline PiecewiseAffineSde phases_from_profile(const ExponentialParams& p, double t1,
                                              const NoiseModel& noise = {}) {
  p.validate();
  if (!std::isfinite(t1) || t1 < p.t0) {
    throw Error(ErrorKind::SwitchOffBeforePeak, "switch-off time precedes t0");
  }
  const double scale = std::expm1(p.a * p.t0) / -std::expm1(-p.b * p.T);
  return PiecewiseAffineSde(detail::tie_phases(p.t0, t1, p.T, {p.a, p.a},
                                               {-p.b, -p.b * scale * std::exp(-p.b * p.T)}, noise));
}

/// Linear model: ramp (0, a/t0), plateau (0, 0), decay (0, -a/T).
inline PiecewiseAffineSde phases_from_linear(const LinearParams& p, double t1,
                                             const NoiseModel& noise = {}) {
  p.validate();
  if (!std::isfinite(t1) || t1 < p.t0) {
    throw Error(ErrorKind::SwitchOffBeforePeak, "switch-off time precedes t0");
  }
  return PiecewiseAffineSde(
      detail::tie_phases(p.t0, t1, p.T, {0.0, p.a / p.t0}, {0.0, -p.a / p.T}, noise));
}

/// Closed-form mean of a piecewise affine SDE. Within a phase starting at mean
/// m0: mu(start + d) = m0 e^{c1 d} + c2 d (e^{c1 d} - 1)/(c1 d), which is the
/// (c2/c1)(e^{c1 t} - 1) form when m0 = 0 and tends to m0 + c2 d as c1 -> 0.
class AnalyticMean {
 public:
  explicit AnalyticMean(PiecewiseAffineSde sde) : sde_(std::move(sde)) {
    const auto phases = sde_.phases();
    start_means_.reserve(phases.size());
    double m = sde_.initial_value();
    for (const auto& ph : phases) {
      start_means_.push_back(m);
      if (std::isfinite(ph.end)) m = propagate(ph, m, ph.end - ph.start);
    }
  }

  double operator()(double t) const {
    if (!(t >= 0.0)) throw Error(ErrorKind::InvalidParams, "time must be nonnegative");
    const std::size_t i = sde_.phase_index(t);
    const auto& ph = sde_.phases()[i];
    return propagate(ph, start_means_[i], t - ph.start);
  }

  const PiecewiseAffineSde& sde() const noexcept { return sde_; }

 private:
  static double propagate(const AffinePhase& ph, double m0, double d) {
    const double x = ph.c1 * d;
    const double phi1 = std::abs(x) < 1e-8 ? 1.0 + x / 2 : std::expm1(x) / x;
    return m0 * std::exp(x) + ph.c2 * d * phi1;
  }

  PiecewiseAffineSde sde_;
  std::vector<double> start_means_;
};

inline AnalyticMean analytic_mean(const PiecewiseAffineSde& sde) { return AnalyticMean(sde); }

struct SimConfig {
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  /// Worker threads for path batches; 0 picks the hardware concurrency.
  /// Results do not depend on this value.
  unsigned threads = 0;

  void validate() const {
    if (!std::isfinite(dt) || !(dt > 0.0) || n_paths < 1) {
      throw Error(ErrorKind::InvalidParams, "simulation needs dt > 0 and n_paths >= 1");
    }
  }
};

struct Trajectory {
  std::vector<double> time;
  std::vector<double> rate;
};

struct MeanEstimate {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> std_error;  // standard error of the mean
};

namespace detail {

// Sorted simulation nodes: every cut is a node and each gap between cuts is
// split into equal steps no longer than dt.
inline std::vector<double> build_nodes(std::vector<double> cuts, double t_end, double dt) {
  cuts.push_back(0.0);
  cuts.push_back(t_end);
  std::erase_if(cuts, [&](double c) { return !(c >= 0.0 && c <= t_end); });
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return y - x <= 1e-12 * std::max(1.0, y); }),
             cuts.end());
  cuts.back() = t_end;

  std::vector<double> nodes{0.0};
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i];
    const double len = cuts[i + 1] - lo;
    const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / dt - 1e-9)));
    for (std::size_t k = 1; k < steps; ++k) nodes.push_back(lo + len * static_cast<double>(k) / steps);
    nodes.push_back(cuts[i + 1]);
  }
  return nodes;
}

inline std::vector<double> phase_cuts(const PiecewiseAffineSde& sde, double t_end, double dt) {
  std::vector<double> cuts;
  for (const auto& ph : sde.phases()) {
    if (ph.end <= t_end && dt > ph.end - ph.start) {
      throw Error(ErrorKind::StepTooLarge, "dt = " + std::to_string(dt) +
                                               " exceeds the phase length " +
                                               std::to_string(ph.end - ph.start));
    }
    cuts.push_back(ph.start);
  }
  return cuts;
}

// Euler-Maruyama over fixed nodes; step k draws deviate k of the path's
// stream. Coefficients are called as (k, t, phi) with t the step's left node.
// `visit(k, phi)` is called at every node.
template <typename Drift, typename Diffusion, typename Visit>
void euler_maruyama(const Drift& drift, const Diffusion& diffusion, double initial,
                    std::span<const double> nodes, std::uint64_t seed, std::uint64_t path_id,
                    Visit&& visit) {
  const NormalStream normals(seed, path_id);
  double phi = initial;
  visit(std::size_t{0}, phi);
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double t = nodes[k];
    const double h = nodes[k + 1] - t;
    phi = phi + drift(k, t, phi) * h + diffusion(k, t, phi) * std::sqrt(h) * normals[k];
    if (!std::isfinite(phi)) {
      throw Error(ErrorKind::NonFinite, "path " + std::to_string(path_id) + " blew up at t = " +
                                            std::to_string(nodes[k + 1]));
    }
    visit(k + 1, phi);
  }
}

// Phase of each step, located by the step midpoint. Nodes include every phase
// start, so no step crosses a boundary.
inline std::vector<std::size_t> step_phases(const PiecewiseAffineSde& sde,
                                            std::span<const double> nodes) {
  std::vector<std::size_t> out(nodes.empty() ? 0 : nodes.size() - 1);
  for (std::size_t k = 0; k < out.size(); ++k) {
    out[k] = sde.phase_index(0.5 * (nodes[k] + nodes[k + 1]));
  }
  return out;
}

template <typename Visit>
void simulate_affine(const PiecewiseAffineSde& sde, std::span<const double> nodes,
                     std::span<const std::size_t> phase_of_step, std::uint64_t seed,
                     std::uint64_t path_id, Visit&& visit) {
  const auto phases = sde.phases();
  euler_maruyama(
      [&](std::size_t k, double, double phi) {
        const auto& p = phases[phase_of_step[k]];
        return p.c1 * phi + p.c2;
      },
      [&](std::size_t k, double, double phi) {
        const auto& p = phases[phase_of_step[k]];
        return p.c3 * phi + p.c4;
      },
      sde.initial_value(), nodes, seed, path_id, std::forward<Visit>(visit));
}

struct PathStatistics {
  std::vector<double> mean;
  std::vector<double> std_error;
};

// Runs per_path(path_id, row) for every path, batch-parallel, and reduces the
// rows in path-id order so the statistics are bit-identical for any schedule.
template <typename PerPath>
PathStatistics monte_carlo(std::size_t n_paths, std::size_t width, unsigned threads,
                           const PerPath& per_path) {
  constexpr std::size_t kBatch = 2048;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  std::vector<double> mean(width, 0.0);
  std::vector<double> m2(width, 0.0);
  std::vector<double> rows(std::min(n_paths, kBatch) * width);
  std::size_t seen = 0;

  for (std::size_t first = 0; first < n_paths; first += kBatch) {
    const std::size_t count = std::min(kBatch, n_paths - first);
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    std::vector<std::exception_ptr> failures(workers);
    auto work = [&](unsigned w) {
      try {
        for (std::size_t i = w; i < count; i += workers) {
          per_path(first + i, std::span<double>(rows.data() + i * width, width));
        }
      } catch (...) {
        failures[w] = std::current_exception();
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work, w);
    }
    for (const auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }

    for (std::size_t i = 0; i < count; ++i) {
      ++seen;
      const double* row = rows.data() + i * width;
      for (std::size_t j = 0; j < width; ++j) {
        const double delta = row[j] - mean[j];
        mean[j] += delta / static_cast<double>(seen);
        m2[j] += delta * (row[j] - mean[j]);
      }
    }
  }

  std::vector<double> err(width, 0.0);
  if (n_paths > 1) {
    const double n = static_cast<double>(n_paths);
    for (std::size_t j = 0; j < width; ++j) err[j] = std::sqrt(m2[j] / (n - 1.0) / n);
  }
  return {std::move(mean), std::move(err)};
}

}  // namespace detail

/// One Euler-Maruyama path on [0, t_end]; the grid is snapped to phase
/// boundaries and deviates come from stream (config.seed, path_id).
inline Trajectory simulate_path(const PiecewiseAffineSde& sde, const SimConfig& config,
                                std::uint64_t path_id, double t_end) {
  config.validate();
  if (!std::isfinite(t_end) || !(t_end > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "t_end must be finite and positive");
  }
  Trajectory out;
  out.time = detail::build_nodes(detail::phase_cuts(sde, t_end, config.dt), t_end, config.dt);
  out.rate.resize(out.time.size());
  const auto phase_of_step = detail::step_phases(sde, out.time);
  detail::simulate_affine(sde, out.time, phase_of_step, config.seed, path_id,
                          [&](std::size_t k, double phi) { out.rate[k] = phi; });
  return out;
}

/// Euler-Maruyama for d(phi) = drift(t, phi) dt + diffusion(t, phi) dB on a
/// uniform grid over [0, t_end].
inline Trajectory simulate_general_sde(const std::function<double(double, double)>& drift,
                                       const std::function<double(double, double)>& diffusion,
                                       const SimConfig& config, double t_end,
                                       std::uint64_t path_id = 0, double initial_value = 0.0) {
  config.validate();
  if (!std::isfinite(t_end) || !(t_end > 0.0)) {
    throw Error(ErrorKind::InvalidParams, "t_end must be finite and positive");
  }
  Trajectory out;
  out.time = detail::build_nodes({}, t_end, config.dt);
  out.rate.resize(out.time.size());
  detail::euler_maruyama([&](std::size_t, double t, double phi) { return drift(t, phi); },
                         [&](std::size_t, double t, double phi) { return diffusion(t, phi); },
                         initial_value, out.time, config.seed, path_id,
                         [&](std::size_t k, double phi) { out.rate[k] = phi; });
  return out;
}

/// Monte-Carlo mean and standard error at `grid` over paths 0..n_paths-1. Grid
/// times are added to the simulation nodes so no interpolation is involved.
inline MeanEstimate estimate_mean(const PiecewiseAffineSde& sde, const SimConfig& config,
                                  std::vector<double> grid) {
  config.validate();
  if (config.n_paths < 2) throw Error(ErrorKind::InvalidParams, "estimate_mean needs n_paths >= 2");
  if (grid.empty()) throw Error(ErrorKind::InvalidParams, "grid must not be empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i]) || grid[i] < 0.0 || (i > 0 && grid[i] < grid[i - 1])) {
      throw Error(ErrorKind::InvalidParams, "grid must be finite, nonnegative and sorted");
    }
  }
  const double t_end = grid.back();

  std::vector<double> nodes;
  if (t_end > 0.0) {
    auto cuts = detail::phase_cuts(sde, t_end, config.dt);
    cuts.insert(cuts.end(), grid.begin(), grid.end());
    nodes = detail::build_nodes(std::move(cuts), t_end, config.dt);
  } else {
    nodes = {0.0};
  }
  // Grid point -> nearest node (they coincide up to the 1e-12 merge window).
  std::vector<std::size_t> at(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), grid[i]);
    if (it == nodes.end() || (it != nodes.begin() && grid[i] - *(it - 1) < *it - grid[i])) --it;
    at[i] = static_cast<std::size_t>(it - nodes.begin());
  }

  const auto phase_of_step = detail::step_phases(sde, nodes);
  auto stats = detail::monte_carlo(
      config.n_paths, grid.size(), config.threads, [&](std::size_t path, std::span<double> row) {
        std::size_t next = 0;
        detail::simulate_affine(sde, nodes, phase_of_step, config.seed, path,
                                [&](std::size_t k, double phi) {
                                  while (next < at.size() && at[next] == k) row[next++] = phi;
                                });
      });
  return {std::move(grid), std::move(stats.mean), std::move(stats.std_error)};
}

/// Monte-Carlo check attached to a noisy solution. `reference_energy` is the
/// delivered energy of the zero-noise Euler path on the same nodes, which is
/// exactly the mean of the discretized noisy paths; `reference_energy - Q` is
/// the time-discretization gap.
struct MeanVerification {
  double energy_mean = 0.0;
  double energy_stderr = 0.0;
  double reference_energy = 0.0;
  double demand = 0.0;
  std::size_t n_paths = 0;
};

struct NoisySolution {
  SwitchOffSolution solution;
  MeanVerification verification;
};

/// Solves the noisy exponential model through its mean rate and checks by
/// simulation that the sample-mean delivered energy at t2 sits within four
/// standard errors of the drift reference.
inline NoisySolution solve_noisy(const ExponentialParams& p, const NoiseModel& noise,
                                 EnergyDemand demand, const SimConfig& config,
                                 const Tolerance& tol = {}) {
  p.validate();
  config.validate();

  // The decay phase depends only on time since switch-off, so any reference
  // t1 >= t0 yields the same mean profile.
  const double t1_ref = p.t0 + p.T;
  const auto mean = std::make_shared<const AnalyticMean>(phases_from_profile(p, t1_ref, noise));
  const SupplyProfile mean_profile([mean](double t) { return (*mean)(t); }, p.t0,
                                   [mean, t1_ref](double u) { return (*mean)(t1_ref + u); }, p.T);

  NoisySolution out;
  out.solution = solve_general(mean_profile, demand, tol);

  const auto sde = phases_from_profile(p, out.solution.t1_hat, noise);
  const double t2 = out.solution.t2;
  const auto nodes = detail::build_nodes(detail::phase_cuts(sde, t2, config.dt), t2, config.dt);
  const auto phase_of_step = detail::step_phases(sde, nodes);
  auto delivered = [&](const PiecewiseAffineSde& model, std::uint64_t path) {
    double energy = 0.0;
    double prev = 0.0;
    detail::simulate_affine(model, nodes, phase_of_step, config.seed, path,
                            [&](std::size_t k, double phi) {
      if (k > 0) energy += 0.5 * (prev + phi) * (nodes[k] - nodes[k - 1]);
      prev = phi;
    });
    return energy;
  };

  auto stats = detail::monte_carlo(config.n_paths, 1, config.threads,
                                   [&](std::size_t path, std::span<double> row) {
                                     row[0] = delivered(sde, path);
                                   });
  auto& v = out.verification;
  v.energy_mean = stats.mean[0];
  v.energy_stderr = stats.std_error[0];
  v.reference_energy = delivered(phases_from_profile(p, out.solution.t1_hat), 0);
  v.demand = demand.value();
  v.n_paths = config.n_paths;
  if (std::abs(v.energy_mean - v.reference_energy) > 4.0 * v.energy_stderr) {
    throw Error(ErrorKind::MeanVerificationFailed,
                "sample-mean delivered energy " + std::to_string(v.energy_mean) +
                    " is more than 4 standard errors from " + std::to_string(v.reference_energy));
  }
  return out;
}

}  // namespace switchoff
