#include "wifsmc/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <ostream>
#include <tuple>

namespace wifsmc {

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t delta_coord(int delta_log2) {
  return static_cast<std::uint64_t>(static_cast<std::int64_t>(delta_log2));
}

FKModel sweep_model(const SweepConfig& c, int delta_log2) {
  return make_ou_box_model(c.theta, c.sigma, c.height, c.center, c.halfwidth, c.horizon,
                           std::ldexp(1.0, delta_log2));
}

std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::vector<SweepRow> ou_sweep(const SweepConfig& config) {
  if (config.repetitions < 2) throw std::invalid_argument("need at least 2 repetitions");
  std::vector<SweepRow> rows;
  for (const auto& scheme : config.schemes) {
    const std::uint64_t sc = fnv1a(scheme.name());
    for (std::size_t n : config.particle_counts) {
      for (int d : config.delta_log2) {
        FKModel model = sweep_model(config, d);
        for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
          SweepRow row;
          row.scheme = scheme.name();
          row.n_particles = n;
          row.delta_log2 = d;
          row.rep = rep;
          const std::uint64_t s = derive_seed(config.seed, sc, n, delta_coord(d), rep);
          try {
            PFOutput out = pf_run(model, scheme, n, s);
            row.logZ = out.logZ;
            row.filter_est = out.filtering[0];
            row.smooth_est = out.smoothing[0];
            row.resample_events = out.resample_events;
          } catch (const std::exception& e) {
            row.error = e.what();
            row.logZ = row.filter_est = row.smooth_est =
                std::numeric_limits<double>::quiet_NaN();
          }
          rows.push_back(std::move(row));
        }
      }
    }
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "scheme,N,delta_log2,rep,logZ,filter_est,smooth_est,resample_events\n";
  for (const auto& r : rows)
    os << r.scheme << ',' << r.n_particles << ',' << r.delta_log2 << ',' << r.rep << ','
       << fmt_double(r.logZ) << ',' << fmt_double(r.filter_est) << ','
       << fmt_double(r.smooth_est) << ',' << r.resample_events << '\n';
}

SweepReference sweep_reference(const SweepConfig& config, int delta_log2, const StateMesh& mesh) {
  GridReference g = grid_reference(sweep_model(config, delta_log2), mesh);
  return SweepReference{g.logZ, g.filter_mean, g.smooth_mean};
}

std::vector<SweepCell> aggregate_sweep(const std::vector<SweepRow>& rows,
                                       const std::function<SweepReference(int)>& reference) {
  std::vector<SweepCell> cells;
  std::map<std::tuple<std::string, std::size_t, int>, std::size_t> index;
  std::map<int, SweepReference> refs;
  std::vector<std::vector<double>> logz_samples;
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    const auto key = std::make_tuple(r.scheme, r.n_particles, r.delta_log2);
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      SweepCell c;
      c.scheme = r.scheme;
      c.n_particles = r.n_particles;
      c.delta_log2 = r.delta_log2;
      cells.push_back(std::move(c));
      logz_samples.emplace_back();
    }
    SweepCell& c = cells[it->second];
    auto rit = refs.find(r.delta_log2);
    if (rit == refs.end()) rit = refs.emplace(r.delta_log2, reference(r.delta_log2)).first;
    const SweepReference& ref = rit->second;
    const double rel = std::exp(r.logZ - ref.logZ) - 1.0;
    c.rmse_rel_z += rel * rel;
    c.rmse_filter += (r.filter_est - ref.filter_mean) * (r.filter_est - ref.filter_mean);
    c.rmse_smooth += (r.smooth_est - ref.smooth_mean) * (r.smooth_est - ref.smooth_mean);
    logz_samples[it->second].push_back(r.logZ);
    ++c.reps;
  }
  for (std::size_t i = 0; i < cells.size(); ++i) {
    SweepCell& c = cells[i];
    const double n = static_cast<double>(c.reps);
    c.rmse_rel_z = std::sqrt(c.rmse_rel_z / n);
    c.rmse_filter = std::sqrt(c.rmse_filter / n);
    c.rmse_smooth = std::sqrt(c.rmse_smooth / n);
    const auto& z = logz_samples[i];
    c.mean_logZ = std::accumulate(z.begin(), z.end(), 0.0) / n;
    if (c.reps > 1) {
      double ss = 0.0;
      for (double v : z) ss += (v - c.mean_logZ) * (v - c.mean_logZ);
      c.se_logZ = std::sqrt(ss / (n - 1.0) / n);
    }
  }
  return cells;
}

double paired_bootstrap_le(const std::vector<double>& a_sq, const std::vector<double>& b_sq,
                           std::size_t resamples, std::uint64_t seed) {
  if (a_sq.size() != b_sq.size() || a_sq.empty())
    throw std::invalid_argument("paired bootstrap needs matched nonempty samples");
  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, a_sq.size() - 1);
  std::size_t hits = 0;
  for (std::size_t r = 0; r < resamples; ++r) {
    double da = 0.0;
    for (std::size_t i = 0; i < a_sq.size(); ++i) {
      const std::size_t j = pick(rng);
      da += a_sq[j] - b_sq[j];
    }
    if (da <= 0.0) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(resamples);
}

namespace {

double reflect_into(double x, double a, double b) {
  const double L = b - a;
  double y = std::fmod(x - a, 2.0 * L);
  if (y < 0.0) y += 2.0 * L;
  if (y > L) y = 2.0 * L - y;
  return a + y;
}

double cox_majorant(const CoxParams& p) {
  const double edge = p.alpha >= 0.0 ? p.reflect_a : p.reflect_b;
  return p.beta * std::exp(-p.alpha * edge);
}

}  // namespace

CoxData cox_simulate(const CoxParams& params, std::uint64_t seed) {
  CoxData data;
  const auto steps = static_cast<std::size_t>(std::llround(params.horizon / params.dt));
  data.grid.resize(steps + 1);
  data.skeleton.resize(steps + 1);
  Rng skel_rng(derive_seed(seed, 1));
  double x = reflect_into(normal01(skel_rng), params.reflect_a, params.reflect_b);
  const double sd = params.sigma * std::sqrt(params.dt);
  for (std::size_t k = 0; k <= steps; ++k) {
    data.grid[k] = params.dt * static_cast<double>(k);
    data.skeleton[k] = x;
    x = reflect_into(x + sd * normal01(skel_rng), params.reflect_a, params.reflect_b);
  }
  data.grid.back() = params.horizon;

  const double lambda_star = cox_majorant(params);
  if (lambda_star <= 0.0) return data;
  Rng ev_rng(derive_seed(seed, 2));
  std::exponential_distribution<double> gap(lambda_star);
  double t = gap(ev_rng);
  while (t < params.horizon) {
    const auto k = std::min(static_cast<std::size_t>(t / params.dt), steps);
    const double rate = params.beta * std::exp(-params.alpha * data.skeleton[k]);
    if (uniform01(ev_rng) * lambda_star <= rate) data.event_times.push_back(t);
    t += gap(ev_rng);
  }
  return data;
}

namespace {

struct CoxGrid {
  std::vector<double> grid;
  std::shared_ptr<std::vector<int>> event_count;  // observations carried by each grid point
};

// uniform grid merged with the observation times, keeping event multiplicities
CoxGrid cox_grid(double horizon, double grid_dt, const std::vector<double>& event_times) {
  std::vector<double> events = event_times;
  std::sort(events.begin(), events.end());
  std::vector<double> uniform = FKModel::uniform_grid(horizon, grid_dt);
  CoxGrid out;
  out.event_count = std::make_shared<std::vector<int>>();
  std::size_t iu = 0, ie = 0;
  while (iu < uniform.size() || ie < events.size()) {
    const bool take_event =
        ie < events.size() && (iu == uniform.size() || events[ie] <= uniform[iu] + 1e-12);
    const double t = take_event ? events[ie] : uniform[iu];
    if (take_event) {
      ++ie;
      if (iu < uniform.size() && std::abs(uniform[iu] - t) <= 1e-12) ++iu;
    } else {
      ++iu;
    }
    if (!out.grid.empty() && t - out.grid.back() <= 1e-12) {
      if (take_event) ++out.event_count->back();
      continue;
    }
    out.grid.push_back(t);
    out.event_count->push_back(take_event ? 1 : 0);
  }
  return out;
}

FKModel cox_model_on(const CoxParams& params, const CoxGrid& g) {
  FKModel m;
  m.dim = 1;
  m.kind = TransitionKind::reflected_gaussian;
  m.reflect_a = params.reflect_a;
  m.reflect_b = params.reflect_b;
  m.rw_sigma = params.sigma;
  const double a = params.reflect_a, b = params.reflect_b;
  m.initial = [a, b](Rng& rng) { return State{reflect_into(normal01(rng), a, b)}; };
  m.horizon = params.horizon;
  m.grid = g.grid;
  const double alpha = params.alpha, beta = params.beta;
  auto counts = g.event_count;
  m.log_weight = [alpha, beta, counts](std::size_t k, double, double dt, const State& x) {
    double lg = -dt * beta * std::exp(-alpha * x[0]);
    if ((*counts)[k] > 0) lg += (*counts)[k] * (std::log(beta) - alpha * x[0]);
    return lg;
  };
  return m;
}

}  // namespace

FKModel make_cox_model(const CoxParams& params, const std::vector<double>& event_times,
                       double grid_dt) {
  return cox_model_on(params, cox_grid(params.horizon, grid_dt, event_times));
}

namespace {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// lower-triangular factor of a symmetric positive definite 3x3 matrix
Mat3 cholesky3(const Mat3& c) {
  Mat3 l{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = c[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (s <= 0.0) throw std::runtime_error("proposal covariance not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  return l;
}

struct RunningCov {
  std::size_t count = 0;
  Vec3 mean{};
  Mat3 m2{};

  void add(const Vec3& x) {
    ++count;
    Vec3 d;
    for (std::size_t i = 0; i < 3; ++i) {
      d[i] = x[i] - mean[i];
      mean[i] += d[i] / static_cast<double>(count);
    }
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m2[i][j] += d[i] * (x[j] - mean[j]);
  }
  Mat3 cov() const {
    Mat3 c{};
    if (count > 1)
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) c[i][j] = m2[i][j] / static_cast<double>(count - 1);
    return c;
  }
};

}  // namespace

PmmhResult pmmh_run(const PmmhConfig& config) {
  if (!(config.burn_in < config.iterations && config.burn_in > 0))
    throw std::invalid_argument("need 0 < burn_in < iterations");
  for (double t : config.event_times)
    if (t < 0.0 || t > config.params.horizon)
      throw std::invalid_argument("event time outside [0, horizon]");

  CoxGrid grid;
  if (!config.log_likelihood)
    grid = cox_grid(config.params.horizon, config.grid_dt, config.event_times);

  std::size_t degenerate = 0;
  auto loglik = [&](const Vec3& theta, std::size_t iter) {
    if (config.log_likelihood) return config.log_likelihood(theta);
    CoxParams p = config.params;
    p.sigma = std::exp(theta[0]);
    p.alpha = std::exp(theta[1]);
    p.beta = std::exp(theta[2]);
    FKModel m = cox_model_on(p, grid);
    try {
      return pf_run(m, config.scheme, config.n_particles, derive_seed(config.seed, 0x11F, iter))
          .logZ;
    } catch (const AllZeroWeights&) {
      ++degenerate;
      return -std::numeric_limits<double>::infinity();
    }
  };

  auto logprior = [&](const Vec3& theta) {
    double s = 0.0;
    for (double t : theta) s += t * t;
    return -0.5 * s / config.prior_var;
  };

  Rng chain_rng(derive_seed(config.seed, 0xC0));
  Vec3 theta{0.0, 0.0, 0.0};
  double ll = loglik(theta, 0);
  double lp = logprior(theta);

  RunningCov stats;
  stats.add(theta);
  const double scale = 2.38 * 2.38 / 3.0;

  PmmhResult res;
  res.chain.reserve(config.iterations);
  std::size_t accepted = 0;
  for (std::size_t iter = 1; iter <= config.iterations; ++iter) {
    Vec3 z{normal01(chain_rng), normal01(chain_rng), normal01(chain_rng)};
    Vec3 prop = theta;
    if (stats.count >= config.adapt_start) {
      Mat3 c = stats.cov();
      for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) c[i][j] *= scale;
        c[i][i] += 1e-10;
      }
      const Mat3 l = cholesky3(c);
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j <= i; ++j) prop[i] += l[i][j] * z[j];
    } else {
      for (std::size_t i = 0; i < 3; ++i) prop[i] += config.init_proposal_sd * z[i];
    }

    const double ll_prop = loglik(prop, iter);
    const double lp_prop = logprior(prop);
    const double log_ratio = ll_prop + lp_prop - ll - lp;
    const bool accept = std::log(uniform01(chain_rng)) < log_ratio;
    if (accept) {
      theta = prop;
      ll = ll_prop;
      lp = lp_prop;
      if (iter > config.burn_in) ++accepted;
    }
    res.chain.push_back(theta);
    stats.add(theta);
  }
  res.degenerate_rejections = degenerate;

  const std::size_t n_post = config.iterations - config.burn_in;
  res.diagnostics.acceptance = static_cast<double>(accepted) / static_cast<double>(n_post);
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<double> coord(n_post);
    for (std::size_t i = 0; i < n_post; ++i) coord[i] = res.chain[config.burn_in + i][p];
    const double mean = std::accumulate(coord.begin(), coord.end(), 0.0) /
                        static_cast<double>(n_post);
    double var = 0.0;
    for (double v : coord) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n_post - 1);
    if (var > 0.0) {
      const double sd = std::sqrt(var);
      std::vector<double> std_coord(n_post);
      for (std::size_t i = 0; i < n_post; ++i) std_coord[i] = (coord[i] - mean) / sd;
      const std::size_t batches = std::clamp<std::size_t>(n_post / 100, 10, 100);
      try {
        res.diagnostics.asymptotic_variance[p] = batch_means_variance(std_coord, batches);
      } catch (const ChainTooShort&) {
      }
      res.diagnostics.ire[p] = res.diagnostics.asymptotic_variance[p] *
                               static_cast<double>(config.n_particles);
      std::size_t max_lag = 0;
      for (std::size_t l : config.acf_lags)
        if (l < n_post / 2) max_lag = std::max(max_lag, l);
      const std::vector<double> full = acf(std_coord, max_lag);
      for (std::size_t l : config.acf_lags)
        res.diagnostics.acf[p].push_back(l < full.size() ? full[l] : 0.0);
    }
  }
  return res;
}

double batch_means_variance(const std::vector<double>& chain, std::size_t batches) {
  if (batches < 10) throw std::invalid_argument("need at least 10 batches");
  const std::size_t len = chain.size() / batches;
  if (len < 2) throw ChainTooShort("need at least 2 samples per batch");
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += chain[b * len + i];
    means[b] = s / static_cast<double>(len);
  }
  const double grand = std::accumulate(means.begin(), means.end(), 0.0) /
                       static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - grand) * (m - grand);
  var /= static_cast<double>(batches - 1);
  return static_cast<double>(len) * var;
}

std::vector<double> acf(const std::vector<double>& chain, std::size_t max_lag) {
  const std::size_t n = chain.size();
  if (n < 2 || (max_lag > 0 && max_lag >= n / 2))
    throw ChainTooShort("requested lag exceeds half the chain length");
  const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
  std::vector<double> out(max_lag + 1, 0.0);
  double c0 = 0.0;
  for (double v : chain) c0 += (v - mean) * (v - mean);
  if (c0 == 0.0) throw ChainTooShort("constant chain has no autocorrelation");
  out[0] = 1.0;
  for (std::size_t l = 1; l <= max_lag; ++l) {
    double c = 0.0;
    for (std::size_t i = 0; i + l < n; ++i) c += (chain[i] - mean) * (chain[i + l] - mean);
    out[l] = c / c0;
  }
  return out;
}

}  // namespace wifsmc
