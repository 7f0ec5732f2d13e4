#include "wifsmc/limitproc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wifsmc {

double default_majorant(const SchemeId& scheme, std::size_t n_particles, double v_max) {
  const double n = static_cast<double>(n_particles);
  switch (scheme.kind) {
    case SchemeKind::killing:
      return (n - 1.0) * v_max;
    case SchemeKind::stratified:
      return n * n * v_max;
    case SchemeKind::systematic:
    case SchemeKind::ssp:
    case SchemeKind::symmetrised_systematic:
      return n * v_max;
    default:
      throw NoIntensityLimit();
  }
}

namespace {

std::vector<double> cloud_potentials(const FKModel& model, double t,
                                     const std::vector<State>& cloud) {
  std::vector<double> v(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) v[i] = model.potential(t, cloud[i]);
  return v;
}

}  // namespace

LimitPath simulate_limit(const FKModel& model, const SchemeId& scheme, std::size_t n_particles,
                         std::uint64_t seed, const LimitOptions& opts) {
  if (!scheme.has_intensity_limit()) throw NoIntensityLimit();
  if (!model.potential) throw std::invalid_argument("limit simulation needs a plain potential");
  Rng rng(seed);
  const double tau = model.horizon;
  const double h = opts.fine_step > 0.0 ? opts.fine_step : tau / 4096.0;
  const double majorant =
      opts.majorant > 0.0 ? opts.majorant : default_majorant(scheme, n_particles, opts.v_max);
  if (majorant <= 0.0 && n_particles > 1)
    throw std::invalid_argument("majorant must be positive (set majorant or v_max)");

  LimitPath path;
  path.fine_step = h;
  std::vector<State> cloud(n_particles);
  for (auto& x : cloud) x = model.initial(rng);

  auto record = [&](double t) {
    if (opts.keep_skeleton) {
      path.times.push_back(t);
      path.states.push_back(cloud);
    }
  };
  record(0.0);

  std::exponential_distribution<double> exp_draw(majorant > 0.0 ? majorant : 1.0);
  double t = 0.0;
  double next_event = majorant > 0.0 ? exp_draw(rng) : tau + 1.0;
  while (t < tau) {
    const double stop = std::min(tau, next_event);
    // mutate in equal Euler sub-steps of size <= h up to the next candidate
    const double span = stop - t;
    const auto nsub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / h)));
    const double sub = span / static_cast<double>(nsub);
    for (std::size_t s = 0; s < nsub; ++s) {
      auto pv = PotentialValues::from(cloud_potentials(model, t, cloud));
      path.vbar_integral += sub * pv.vbar;
      if (n_particles > 1) {
        std::vector<double> neg(pv.v.size());
        for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -pv.v[i];
        const double rate = overall_rate(scheme, pv, mean_partition(neg));
        if (rate > majorant * (1.0 + 1e-9))
          throw MajorantViolated("iota* = " + std::to_string(rate) + " exceeds majorant " +
                                 std::to_string(majorant));
      }
      for (auto& x : cloud) model.transition_inplace(x, sub, rng);
      t += sub;
      record(t);
    }
    t = stop;
    if (stop >= tau) break;

    // candidate event: thin against the overall rate at the current state
    auto pv = PotentialValues::from(cloud_potentials(model, t, cloud));
    std::vector<double> neg(pv.v.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -pv.v[i];
    IntensityTable table = intensity_table(scheme, pv, mean_partition(neg));
    if (table.total > majorant * (1.0 + 1e-9))
      throw MajorantViolated("iota* = " + std::to_string(table.total) + " exceeds majorant " +
                             std::to_string(majorant));
    const double accept = table.total / majorant;
    if (uniform01(rng) <= accept && !table.entries.empty()) {
      const double u = uniform01(rng) * table.entry_sum();
      double acc = 0.0;
      const IntensityEntry* chosen = &table.entries.begin()->second;
      for (const auto& [sig, e] : table.entries) {
        acc += e.rate;
        chosen = &e;
        if (u <= acc) break;
      }
      cloud = apply_ancestors(cloud, chosen->layout);
      path.jumps.push_back({t, chosen->layout});
      record(t);
    }
    next_event = t + exp_draw(rng);
  }
  path.terminal = std::move(cloud);
  return path;
}

namespace {

MonteCarloEstimate summarise(const std::vector<double>& samples) {
  MonteCarloEstimate est;
  est.samples = samples.size();
  if (samples.empty()) throw EmptyEnsemble();
  est.value = std::accumulate(samples.begin(), samples.end(), 0.0) /
              static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (double s : samples) ss += (s - est.value) * (s - est.value);
    est.std_error = std::sqrt(ss / static_cast<double>(samples.size() - 1) /
                              static_cast<double>(samples.size()));
  }
  return est;
}

double mean_f(const std::vector<State>& cloud, const std::function<double(const State&)>& f) {
  double s = 0.0;
  for (const auto& x : cloud) s += f(x);
  return s / static_cast<double>(cloud.size());
}

}  // namespace

MonteCarloEstimate fk_marginal_lhs(const std::vector<LimitPath>& paths,
                                   const std::function<double(const State&)>& f) {
  std::vector<double> samples;
  samples.reserve(paths.size());
  for (const auto& p : paths)
    samples.push_back(mean_f(p.terminal, f) * std::exp(-p.vbar_integral));
  return summarise(samples);
}

MonteCarloEstimate fk_marginal_rhs(const FKModel& model,
                                   const std::function<double(const State&)>& f,
                                   std::size_t replicates, std::uint64_t seed, double fine_step) {
  if (replicates == 0) throw EmptyEnsemble();
  const double h = fine_step > 0.0 ? fine_step : model.horizon / 4096.0;
  const auto nsteps = static_cast<std::size_t>(std::ceil(model.horizon / h));
  const double sub = model.horizon / static_cast<double>(nsteps);
  std::vector<double> samples(replicates);
  for (std::size_t m = 0; m < replicates; ++m) {
    Rng rng(derive_seed(seed, m));
    State z = model.initial(rng);
    double integral = 0.0, t = 0.0;
    for (std::size_t s = 0; s < nsteps; ++s) {
      integral += sub * model.potential(t, z);
      model.transition_inplace(z, sub, rng);
      t += sub;
    }
    samples[m] = f(z) * std::exp(-integral);
  }
  return summarise(samples);
}

MonteCarloEstimate fk_marginal_pf(const FKModel& model, const SchemeId& scheme,
                                  std::size_t n_particles, std::size_t replicates,
                                  std::uint64_t seed,
                                  const std::function<double(const State&)>& f) {
  if (replicates == 0) throw EmptyEnsemble();
  PFOptions opts;
  opts.keep_terminal = true;
  std::vector<double> samples(replicates);
  for (std::size_t m = 0; m < replicates; ++m) {
    PFOutput out = pf_run(model, scheme, n_particles, derive_seed(seed, m ^ 0xabcdULL), opts);
    samples[m] = mean_f(out.terminal, f) * std::exp(-out.potential_integral);
  }
  return summarise(samples);
}

}  // namespace wifsmc
