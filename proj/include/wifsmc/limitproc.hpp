#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wifsmc/fkengine.hpp"
#include "wifsmc/intensity.hpp"

namespace wifsmc {

/// One realisation of the continuous-time limit particle system: diffusion
/// between jumps, resampling-intensity jumps via Poisson thinning.
struct LimitPath {
  struct Jump {
    double time = 0.0;
    AncestorVector anc;
  };
  std::vector<Jump> jumps;
  std::vector<State> terminal;
  /// int_0^tau Vbar(Z_u) du, left-point rule on the mutation grid with
  /// jump-time refinement.
  double vbar_integral = 0.0;
  double fine_step = 0.0;
  // populated only when requested (memory: O(tau/h * N * d))
  std::vector<double> times;
  std::vector<std::vector<State>> states;
};

struct LimitOptions {
  double fine_step = 0.0;  // 0: tau/4096
  double majorant = 0.0;   // 0: per-scheme default from V_max
  double v_max = 0.0;      // required when majorant is defaulted
  bool keep_skeleton = false;
};

/// Conservative majorant on iota* from 0 <= v <= v_max.
double default_majorant(const SchemeId& scheme, std::size_t n_particles, double v_max);

LimitPath simulate_limit(const FKModel& model, const SchemeId& scheme, std::size_t n_particles,
                         std::uint64_t seed, const LimitOptions& opts);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// E[fbar(Z_tau) exp(-int Vbar)] over a simulated ensemble.
MonteCarloEstimate fk_marginal_lhs(const std::vector<LimitPath>& paths,
                                   const std::function<double(const State&)>& f);

/// E[f(z_tau) exp(-int V)] for the single diffusion, Euler at fine_step.
MonteCarloEstimate fk_marginal_rhs(const FKModel& model,
                                   const std::function<double(const State&)>& f,
                                   std::size_t replicates, std::uint64_t seed,
                                   double fine_step = 0.0);

/// The discrete-side counterpart: particle-filter ensemble estimator of
/// E[fbar(X_tau) exp(-int Vbar)], evaluating the exponent as the product of
/// the step potentials (so it shares the pf discretisation exactly).
MonteCarloEstimate fk_marginal_pf(const FKModel& model, const SchemeId& scheme,
                                  std::size_t n_particles, std::size_t replicates,
                                  std::uint64_t seed,
                                  const std::function<double(const State&)>& f);

}  // namespace wifsmc
