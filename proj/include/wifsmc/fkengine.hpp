#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wifsmc/core.hpp"
#include "wifsmc/resampling.hpp"
#include "wifsmc/rng.hpp"

namespace wifsmc {

/// Particle state: d real components.
using State = std::vector<double>;

enum class TransitionKind { euler, exact_ou, reflected_gaussian };

/// A time-discretised Feynman-Kac path-integral model: proposal dynamics on a
/// time grid plus nonnegative potentials. The default weight at step k is
/// exp(-(t_{k+1}-t_k) V(t_k, x)); `log_weight`, when set, overrides it (used
/// for potentials with point-observation terms).
struct FKModel {
  int dim = 1;
  std::function<State(Rng&)> initial;
  std::function<double(double)> initial_density;  // d = 1 only, for the grid reference

  TransitionKind kind = TransitionKind::euler;
  std::function<State(const State&)> drift;   // euler
  std::function<double(const State&)> sigma;  // euler, isotropic
  double ou_theta = 0.1, ou_sigma = 1.0;      // exact-ou
  double reflect_a = -2.0, reflect_b = 2.0, rw_sigma = 1.0;  // reflected-gaussian

  std::function<double(double, const State&)> potential;  // V(t, x) >= 0
  /// d = 1 only: x-locations where V is discontinuous. The quadrature
  /// reference splits its mesh there; without them a jump costs it an order
  /// of convergence.
  std::vector<double> potential_breaks;
  std::function<double(std::size_t, double, double, const State&)> log_weight;  // (k, t_k, dt, x)

  double horizon = 10.0;
  std::vector<double> grid;  // 0 = t_1 < ... < t_T = horizon

  std::size_t steps() const { return grid.size(); }
  /// One proposal transition over (t, t+dt].
  State transition(const State& x, double dt, Rng& rng) const;
  /// Same law and draw sequence, overwriting x (the filter hot path).
  void transition_inplace(State& x, double dt, Rng& rng) const;
  double log_g(std::size_t k, const State& x) const;  // log G_k, k in [0, T-2]

  static std::vector<double> uniform_grid(double horizon, double dt);
};

/// Stationary OU model with the box potential of the first experiment.
FKModel make_ou_box_model(double theta, double sigma, double height, double center,
                          double halfwidth, double horizon, double dt);

struct PFOutput {
  double logZ = 0.0;
  /// sum_k dt_k * mean_i V(t_k, X_k^i); the discrete-time exponent of the
  /// path-integral marginal identity (0 when the model has no plain potential)
  double potential_integral = 0.0;
  std::vector<double> filtering;  // unweighted mean of the terminal cloud
  std::vector<double> smoothing;  // mean of traced-back time-0 ancestors
  std::size_t resample_events = 0;
  std::vector<State> terminal;             // kept when opts.keep_terminal
  std::vector<AncestorVector> ancestry;    // kept when opts.keep_ancestry
};

struct PFOptions {
  bool keep_terminal = false;
  bool keep_ancestry = false;
};

/// One particle-filter pass: N initial draws, then resample/mutate per grid
/// step with logZ accumulated as sum of log mean weights. Deterministic given
/// the seed. Throws AllZeroWeights (naming the step) if a step's weights all
/// vanish.
PFOutput pf_run(const FKModel& model, const SchemeId& scheme, std::size_t n_particles,
                std::uint64_t seed, const PFOptions& opts = {});

struct GridReference {
  double logZ = 0.0;
  double filter_mean = 0.0;
  double smooth_mean = 0.0;
};

struct StateMesh {
  double lo = -15.0;
  double hi = 15.0;
  std::size_t points = 2001;
};

/// Deterministic forward/backward recursion of the discretised model on a 1-d
/// state mesh with trapezoidal quadrature; the independent reference for the
/// particle estimates.
GridReference grid_reference(const FKModel& model, const StateMesh& mesh);

inline double grid_reference_logZ(const FKModel& model, const StateMesh& mesh) {
  return grid_reference(model, mesh).logZ;
}

}  // namespace wifsmc
