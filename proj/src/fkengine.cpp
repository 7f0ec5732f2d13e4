#include "wifsmc/fkengine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace wifsmc {

namespace {

double reflect_into(double x, double a, double b) {
  const double L = b - a;
  double y = std::fmod(x - a, 2.0 * L);
  if (y < 0.0) y += 2.0 * L;
  if (y > L) y = 2.0 * L - y;
  return a + y;
}

}  // namespace

State FKModel::transition(const State& x, double dt, Rng& rng) const {
  State y = x;
  transition_inplace(y, dt, rng);
  return y;
}

void FKModel::transition_inplace(State& x, double dt, Rng& rng) const {
  switch (kind) {
    case TransitionKind::euler: {
      State b = drift(x);
      const double s = sigma(x) * std::sqrt(dt);
      for (std::size_t c = 0; c < x.size(); ++c) x[c] += b[c] * dt + s * normal01(rng);
      return;
    }
    case TransitionKind::exact_ou: {
      const double decay = std::exp(-ou_theta * dt);
      const double sd =
          ou_sigma * std::sqrt((1.0 - decay * decay) / (2.0 * ou_theta));
      for (std::size_t c = 0; c < x.size(); ++c) x[c] = x[c] * decay + sd * normal01(rng);
      return;
    }
    case TransitionKind::reflected_gaussian: {
      const double sd = rw_sigma * std::sqrt(dt);
      for (std::size_t c = 0; c < x.size(); ++c)
        x[c] = reflect_into(x[c] + sd * normal01(rng), reflect_a, reflect_b);
      return;
    }
  }
  throw std::logic_error("unreachable");
}

double FKModel::log_g(std::size_t k, const State& x) const {
  const double t = grid[k];
  const double dt = grid[k + 1] - grid[k];
  if (log_weight) return log_weight(k, t, dt, x);
  return -dt * potential(t, x);
}

std::vector<double> FKModel::uniform_grid(double horizon, double dt) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  std::vector<double> grid(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) grid[k] = dt * static_cast<double>(k);
  grid.back() = horizon;
  return grid;
}

FKModel make_ou_box_model(double theta, double sigma, double height, double center,
                          double halfwidth, double horizon, double dt) {
  FKModel m;
  m.dim = 1;
  m.kind = TransitionKind::exact_ou;
  m.ou_theta = theta;
  m.ou_sigma = sigma;
  const double sd_inf = sigma / std::sqrt(2.0 * theta);
  m.initial = [sd_inf](Rng& rng) { return State{sd_inf * normal01(rng)}; };
  m.initial_density = [sd_inf](double x) {
    return std::exp(-0.5 * x * x / (sd_inf * sd_inf)) / (sd_inf * std::sqrt(2.0 * M_PI));
  };
  m.potential = [height, center, halfwidth](double, const State& x) {
    return std::abs(x[0] - center) > halfwidth ? height : 0.0;
  };
  m.potential_breaks = {center - halfwidth, center + halfwidth};
  m.horizon = horizon;
  m.grid = FKModel::uniform_grid(horizon, dt);
  return m;
}

PFOutput pf_run(const FKModel& model, const SchemeId& scheme, std::size_t n_particles,
                std::uint64_t seed, const PFOptions& opts) {
  if (n_particles == 0) throw std::invalid_argument("need at least one particle");
  if (model.grid.size() < 2) throw std::invalid_argument("grid needs at least two points");
  Rng rng(seed);
  const std::size_t T = model.grid.size();

  std::vector<State> cloud(n_particles);
  for (auto& x : cloud) x = model.initial(rng);
  const std::vector<State> initial_cloud = cloud;
  // root[i]: index of particle i's time-0 ancestor, for the filter smoother
  std::vector<std::size_t> root(n_particles);
  std::iota(root.begin(), root.end(), std::size_t{0});

  PFOutput out;
  std::vector<double> logw(n_particles), g(n_particles);
  // reused across resampling events so a permutation never reallocates states
  std::vector<State> permuted(n_particles);
  std::vector<std::size_t> root_permuted(n_particles);
  for (std::size_t k = 0; k + 1 < T; ++k) {
    double wmax = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_particles; ++i) {
      logw[i] = model.log_g(k, cloud[i]);
      wmax = std::max(wmax, logw[i]);
    }
    if (!std::isfinite(wmax))
      throw AllZeroWeights("all weights vanished at step " + std::to_string(k));
    double mean = 0.0;
    for (std::size_t i = 0; i < n_particles; ++i) {
      g[i] = std::exp(logw[i] - wmax);
      mean += g[i];
    }
    mean /= static_cast<double>(n_particles);
    out.logZ += wmax + std::log(mean);

    if (model.potential) {
      const double dt = model.grid[k + 1] - model.grid[k];
      double vbar = 0.0;
      for (const auto& x : cloud) vbar += model.potential(model.grid[k], x);
      out.potential_integral += dt * vbar / static_cast<double>(n_particles);
    }

    AncestorVector anc = resample(scheme, g, rng);
    if (!anc.is_identity()) {
      ++out.resample_events;
      for (std::size_t i = 0; i < n_particles; ++i) {
        permuted[i] = cloud[anc.a[i]];
        root_permuted[i] = root[anc.a[i]];
      }
      cloud.swap(permuted);
      root.swap(root_permuted);
    }
    if (opts.keep_ancestry) out.ancestry.push_back(anc);

    const double dt = model.grid[k + 1] - model.grid[k];
    for (auto& x : cloud) model.transition_inplace(x, dt, rng);
  }

  const auto d = static_cast<std::size_t>(model.dim);
  out.filtering.assign(d, 0.0);
  out.smoothing.assign(d, 0.0);
  for (std::size_t i = 0; i < n_particles; ++i)
    for (std::size_t c = 0; c < d; ++c) {
      out.filtering[c] += cloud[i][c];
      out.smoothing[c] += initial_cloud[root[i]][c];
    }
  for (std::size_t c = 0; c < d; ++c) {
    out.filtering[c] /= static_cast<double>(n_particles);
    out.smoothing[c] /= static_cast<double>(n_particles);
  }
  if (opts.keep_terminal) out.terminal = std::move(cloud);
  return out;
}

namespace {

struct Quadrature {
  std::vector<double> x;      // node positions (breaks appear twice)
  std::vector<double> xeval;  // where the potential is sampled (one-sided at breaks)
  std::vector<double> w;      // trapezoid weights
};

// The mesh is built segment by segment between the declared discontinuities
// of V, each segment uniform and carrying its own copy of the boundary nodes
// (evaluated one-sided), so the rule only ever integrates smooth pieces.
// Gregory end corrections lift the composite trapezoid above second order.
Quadrature make_quadrature(const StateMesh& mesh, const std::vector<double>& breaks) {
  if (mesh.points < 3) throw std::invalid_argument("mesh needs at least 3 points");
  std::vector<double> bounds{mesh.lo};
  for (double b : breaks)
    if (b > mesh.lo && b < mesh.hi) bounds.push_back(b);
  bounds.push_back(mesh.hi);
  std::sort(bounds.begin(), bounds.end());

  const double h_target = (mesh.hi - mesh.lo) / static_cast<double>(mesh.points - 1);
  Quadrature q;
  for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
    const double a = bounds[s], b = bounds[s + 1];
    const auto m = std::max<std::size_t>(
        6, static_cast<std::size_t>(std::llround((b - a) / h_target)));
    const double h = (b - a) / static_cast<double>(m);
    const std::size_t base = q.x.size();
    const double nudge_a = 1e-9 * (1.0 + std::abs(a)), nudge_b = 1e-9 * (1.0 + std::abs(b));
    for (std::size_t i = 0; i <= m; ++i) {
      const double x = (i == m) ? b : a + h * static_cast<double>(i);
      q.x.push_back(x);
      q.xeval.push_back(x);
      q.w.push_back((i == 0 || i == m) ? 0.5 * h : h);
    }
    if (s > 0) q.xeval[base] = a + nudge_a;
    if (s + 2 < bounds.size()) q.xeval.back() = b - nudge_b;
    // Gregory third-order end weights 3/8, 7/6, 23/24
    for (std::size_t end : {base, q.x.size() - 1}) {
      const auto step = (end == base) ? std::ptrdiff_t{1} : std::ptrdiff_t{-1};
      auto i = static_cast<std::ptrdiff_t>(end);
      q.w[static_cast<std::size_t>(i)] += h * (3.0 / 8.0 - 1.0 / 2.0);
      q.w[static_cast<std::size_t>(i + step)] += h * (7.0 / 6.0 - 1.0);
      q.w[static_cast<std::size_t>(i + 2 * step)] += h * (23.0 / 24.0 - 1.0);
    }
  }
  return q;
}

double gauss_density(double y, double mean, double var) {
  const double z = y - mean;
  return std::exp(-0.5 * z * z / var) / std::sqrt(2.0 * M_PI * var);
}

// dense transition kernel K[j*P + i] = p(y_j | x_i) over one grid step
std::vector<double> transition_kernel(const FKModel& model, const Quadrature& q, double dt) {
  const std::size_t P = q.x.size();
  std::vector<double> K(P * P);
  for (std::size_t i = 0; i < P; ++i) {
    double mean, var;
    switch (model.kind) {
      case TransitionKind::euler: {
        State b = model.drift(State{q.x[i]});
        const double s = model.sigma(State{q.x[i]});
        mean = q.x[i] + b[0] * dt;
        var = s * s * dt;
        break;
      }
      case TransitionKind::exact_ou: {
        const double decay = std::exp(-model.ou_theta * dt);
        mean = q.x[i] * decay;
        var = model.ou_sigma * model.ou_sigma * (1.0 - decay * decay) / (2.0 * model.ou_theta);
        break;
      }
      default:
        throw UnsupportedDimension("grid reference needs a closed-form Gaussian transition");
    }
    for (std::size_t j = 0; j < P; ++j) K[j * P + i] = gauss_density(q.x[j], mean, var);
  }
  return K;
}

double trapz(const Quadrature& q, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += q.w[i] * f[i];
  return s;
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa, double b,
                        double fb, double m, double fm, double whole, double eps, int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15.0 * eps) return left + right + err / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

// mean of f over [a, b], resolving interior discontinuities adaptively
double cell_average(const std::function<double(double)>& f, double a, double b) {
  const double fa = f(a), fb = f(b), m = 0.5 * (a + b), fm = f(m);
  if (fa == fb && fb == fm) {
    // flat at the three probes: almost always flat throughout (the common case
    // away from a potential's jump set); accept the midpoint value
    return fm;
  }
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, fa, b, fb, m, fm, whole, 1e-13 * (b - a), 48) / (b - a);
}

}  // namespace

GridReference grid_reference(const FKModel& model, const StateMesh& mesh) {
  if (model.dim != 1) throw UnsupportedDimension();
  if (!model.initial_density) throw UnsupportedDimension("grid reference needs initial_density");
  const Quadrature q = make_quadrature(mesh, model.potential_breaks);
  const std::size_t P = q.x.size();
  const std::size_t T = model.grid.size();

  // kernels cached by step size; the grids in use have few distinct steps
  std::vector<std::pair<double, std::vector<double>>> kernels;
  auto kernel_for = [&](double dt) -> const std::vector<double>& {
    for (auto& [d, K] : kernels)
      if (std::abs(d - dt) < 1e-15) return K;
    kernels.emplace_back(dt, transition_kernel(model, q, dt));
    return kernels.back().second;
  };

  // with declared breaks the doubled nodes make every piece smooth and node
  // values suffice; otherwise average each dual cell adaptively so an
  // undeclared jump costs accuracy but not the convergence order
  const bool declared = !model.potential_breaks.empty();
  const double h = (mesh.hi - mesh.lo) / static_cast<double>(mesh.points - 1);
  std::vector<std::vector<double>> logG(T - 1, std::vector<double>(P));
  for (std::size_t k = 0; k + 1 < T; ++k) {
    auto f = [&](double x) { return std::exp(model.log_g(k, State{x})); };
    for (std::size_t i = 0; i < P; ++i)
      logG[k][i] = declared
                       ? model.log_g(k, State{q.xeval[i]})
                       : std::log(cell_average(f, q.x[i] - 0.5 * h, q.x[i] + 0.5 * h));
  }

  // forward pass: filtered density and logZ
  std::vector<double> rho(P), tmp(P);
  for (std::size_t i = 0; i < P; ++i) rho[i] = model.initial_density(q.x[i]);
  {
    const double z0 = trapz(q, rho);
    for (double& r : rho) r /= z0;
  }
  GridReference out;
  for (std::size_t k = 0; k + 1 < T; ++k) {
    for (std::size_t i = 0; i < P; ++i) tmp[i] = rho[i] * std::exp(logG[k][i]);
    double z = trapz(q, tmp);
    if (z <= 0.0) throw DegenerateFilter("grid reference: zero mass at step " + std::to_string(k));
    out.logZ += std::log(z);
    for (double& t : tmp) t /= z;
    const auto& K = kernel_for(model.grid[k + 1] - model.grid[k]);
    for (std::size_t j = 0; j < P; ++j) {
      double acc = 0.0;
      const double* row = &K[j * P];
      for (std::size_t i = 0; i < P; ++i) acc += row[i] * q.w[i] * tmp[i];
      rho[j] = acc;
    }
    // renormalise silently: the mesh spans many standard deviations, and the
    // tail mass a step pushes past its edge is negligible either way
    const double z2 = trapz(q, rho);
    for (double& r : rho) r /= z2;
  }
  {
    double m1 = 0.0;
    for (std::size_t i = 0; i < P; ++i) m1 += q.w[i] * q.x[i] * rho[i];
    out.filter_mean = m1;
  }

  // backward pass: smoothing marginal at time 0
  std::vector<double> beta(P, 1.0), beta_next(P);
  for (std::size_t kk = T - 1; kk-- > 0;) {
    const auto& K = kernel_for(model.grid[kk + 1] - model.grid[kk]);
    for (std::size_t i = 0; i < P; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < P; ++j) acc += K[j * P + i] * q.w[j] * beta[j];
      beta_next[i] = acc * std::exp(logG[kk][i]);
    }
    const double bmax = *std::max_element(beta_next.begin(), beta_next.end());
    if (bmax <= 0.0) throw DegenerateFilter("grid reference: zero backward mass");
    for (std::size_t i = 0; i < P; ++i) beta[i] = beta_next[i] / bmax;
  }
  {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < P; ++i) {
      const double m = q.w[i] * model.initial_density(q.x[i]) * beta[i];
      num += q.x[i] * m;
      den += m;
    }
    out.smooth_mean = num / den;
  }
  return out;
}

}  // namespace wifsmc
