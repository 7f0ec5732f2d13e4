#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "wifsmc/fkengine.hpp"

namespace wifsmc {

/// Sweep of the OU box-potential filter over (scheme, N, step size).
struct SweepConfig {
  std::vector<SchemeId> schemes;
  std::vector<std::size_t> particle_counts;
  std::vector<int> delta_log2;  // step size 2^k, k <= 0
  std::size_t repetitions = 2;

  double theta = 0.1, sigma = 1.0;
  double height = 6.0, center = 0.5, halfwidth = 0.1;
  double horizon = 10.0;
  std::uint64_t seed = 0;
};

struct SweepRow {
  std::string scheme;
  std::size_t n_particles = 0;
  int delta_log2 = 0;
  std::size_t rep = 0;
  double logZ = 0.0;
  double filter_est = 0.0;
  double smooth_est = 0.0;
  std::size_t resample_events = 0;
  std::string error;  // non-empty when the filter failed for this row
};

/// One filter run per (scheme, N, delta, rep), with the per-row seed derived
/// from the base seed and the row coordinates, so any row reproduces in
/// isolation. Filter failures are recorded in the row, not thrown.
std::vector<SweepRow> ou_sweep(const SweepConfig& config);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// Deterministic quadrature values of the sweep estimands at one step size.
struct SweepReference {
  double logZ = 0.0;
  double filter_mean = 0.0;
  double smooth_mean = 0.0;
};
SweepReference sweep_reference(const SweepConfig& config, int delta_log2,
                               const StateMesh& mesh = {});

struct SweepCell {
  std::string scheme;
  std::size_t n_particles = 0;
  int delta_log2 = 0;
  std::size_t reps = 0;
  double rmse_rel_z = 0.0;  // of exp(logZ - ref logZ) about 1
  double rmse_filter = 0.0;
  double rmse_smooth = 0.0;
  double mean_logZ = 0.0;
  double se_logZ = 0.0;
};

/// RMSE aggregation of sweep rows against the quadrature reference, one cell
/// per (scheme, N, delta). Rows with errors are dropped from their cell.
std::vector<SweepCell> aggregate_sweep(const std::vector<SweepRow>& rows,
                                       const std::function<SweepReference(int)>& reference);

/// P(mean(a*) <= mean(b*)) under paired resampling of the per-rep squared
/// errors; a one-sided bootstrap level for RMSE(a) <= RMSE(b).
double paired_bootstrap_le(const std::vector<double>& a_sq, const std::vector<double>& b_sq,
                           std::size_t resamples, std::uint64_t seed);

/// Cox process: reflected random walk latent skeleton, events from an
/// inhomogeneous Poisson process with intensity beta*exp(-alpha*Z_t).
struct CoxParams {
  double sigma = 0.3, alpha = 1.0, beta = 0.5;
  double horizon = 200.0;
  double dt = 0.01;
  double reflect_a = -2.0, reflect_b = 2.0;
};

struct CoxData {
  std::vector<double> grid;
  std::vector<double> skeleton;  // latent Z at the grid points
  std::vector<double> event_times;
};

CoxData cox_simulate(const CoxParams& params, std::uint64_t seed);

/// The filter model behind the Cox likelihood: reflected Gaussian proposals on
/// the uniform grid augmented with the event times, integral and point terms
/// of the intensity in the log-weights.
FKModel make_cox_model(const CoxParams& params, const std::vector<double>& event_times,
                       double grid_dt);

struct PmmhConfig {
  CoxParams params;  // sigma/alpha/beta are overwritten by the chain state
  std::vector<double> event_times;
  double grid_dt = 0.05;
  std::size_t n_particles = 32;
  SchemeId scheme;
  std::size_t iterations = 50000;
  std::size_t burn_in = 5000;
  double prior_var = 2.5;
  double init_proposal_sd = 0.1;
  std::size_t adapt_start = 100;  // iterations before the empirical covariance kicks in
  std::vector<std::size_t> acf_lags = {1, 2, 5, 10, 20, 50, 100, 200, 500};
  std::uint64_t seed = 0;
  /// Injected exact log-likelihood; when set the particle filter is bypassed
  /// (used to check the sampler against plain adaptive MH).
  std::function<double(const std::array<double, 3>&)> log_likelihood;
};

struct ChainDiagnostics {
  double acceptance = 0.0;
  std::array<double, 3> asymptotic_variance{};  // of the standardised coordinates
  std::array<double, 3> ire{};                  // asymptotic variance times N
  std::array<std::vector<double>, 3> acf;
};

struct PmmhResult {
  std::vector<std::array<double, 3>> chain;  // (log sigma, log alpha, log beta)
  ChainDiagnostics diagnostics;
  std::size_t degenerate_rejections = 0;
};

/// Random-walk Metropolis on the log parameters with the filter's logZ in the
/// acceptance ratio and continuous empirical-covariance adaptation of the
/// proposal. All-zero-weight filter failures count as rejections.
PmmhResult pmmh_run(const PmmhConfig& config);

/// Batch-means estimate of the asymptotic variance of the chain mean.
double batch_means_variance(const std::vector<double>& chain, std::size_t batches);

/// Sample autocorrelations at lags 0..max_lag.
std::vector<double> acf(const std::vector<double>& chain, std::size_t max_lag);

}  // namespace wifsmc
