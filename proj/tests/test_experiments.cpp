#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "wifsmc/experiments.hpp"

using namespace wifsmc;

namespace {

SweepConfig small_sweep() {
  SweepConfig c;
  c.schemes = {SchemeId::parse("killing"), SchemeId::parse("ssp+partition")};
  c.particle_counts = {8};
  c.delta_log2 = {-2};
  c.repetitions = 2;
  c.horizon = 2.0;
  c.seed = 42;
  return c;
}

}  // namespace

TEST_CASE("sweep produces one row per (scheme, N, delta, rep)") {
  auto rows = ou_sweep(small_sweep());
  REQUIRE(rows.size() == 4);
  for (const auto& r : rows) {
    CHECK(r.error.empty());
    CHECK(std::isfinite(r.logZ));
    CHECK(std::isfinite(r.filter_est));
    CHECK(std::isfinite(r.smooth_est));
    CHECK(r.n_particles == 8);
    CHECK(r.delta_log2 == -2);
  }
  CHECK(rows[0].scheme == "killing");
  CHECK(rows[2].scheme == "ssp+partition");

  SweepConfig bad = small_sweep();
  bad.repetitions = 1;
  CHECK_THROWS_AS(ou_sweep(bad), std::invalid_argument);
}

TEST_CASE("sweep rows depend on scheme name, not list position") {
  auto full = ou_sweep(small_sweep());
  SweepConfig only = small_sweep();
  only.schemes = {SchemeId::parse("ssp+partition")};
  auto part = ou_sweep(only);
  REQUIRE(part.size() == 2);
  CHECK(part[0].logZ == full[2].logZ);
  CHECK(part[1].logZ == full[3].logZ);
  // and bit-identical on rerun
  auto again = ou_sweep(small_sweep());
  for (std::size_t i = 0; i < full.size(); ++i) CHECK(full[i].logZ == again[i].logZ);
}

TEST_CASE("zero potential height makes every estimate exact") {
  SweepConfig c = small_sweep();
  c.height = 0.0;
  auto rows = ou_sweep(c);
  for (const auto& r : rows) {
    CHECK(r.logZ == 0.0);
    CHECK(r.resample_events == 0);
  }
  auto ref = sweep_reference(c, -2, StateMesh{-12.0, 12.0, 801});
  CHECK(std::abs(ref.logZ) < 1e-9);
  auto cells = aggregate_sweep(rows, [&](int d) { return sweep_reference(c, d, StateMesh{-12.0, 12.0, 801}); });
  for (const auto& cell : cells) CHECK(cell.rmse_rel_z < 1e-8);
}

TEST_CASE("csv output matches the fixed header and row layout") {
  std::vector<SweepRow> rows(1);
  rows[0].scheme = "killing";
  rows[0].n_particles = 16;
  rows[0].delta_log2 = -3;
  rows[0].rep = 1;
  rows[0].logZ = -1.5;
  rows[0].filter_est = 0.25;
  rows[0].smooth_est = -0.125;
  rows[0].resample_events = 7;
  std::ostringstream os;
  write_sweep_csv(os, rows);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "scheme,N,delta_log2,rep,logZ,filter_est,smooth_est,resample_events");
  std::getline(is, line);
  CHECK(line == "killing,16,-3,1,-1.5,0.25,-0.125,7");
}

TEST_CASE("rmse aggregation against a synthetic reference") {
  std::vector<SweepRow> rows;
  for (std::size_t rep = 0; rep < 2; ++rep) {
    SweepRow r;
    r.scheme = "killing";
    r.n_particles = 4;
    r.delta_log2 = -1;
    r.rep = rep;
    r.logZ = rep == 0 ? std::log(1.2) : std::log(0.9);
    r.filter_est = rep == 0 ? 0.3 : -0.1;
    r.smooth_est = 0.0;
    rows.push_back(r);
  }
  SweepRow bad = rows[0];
  bad.rep = 2;
  bad.error = "failed";
  rows.push_back(bad);
  auto cells = aggregate_sweep(rows, [](int) { return SweepReference{0.0, 0.1, 0.0}; });
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].reps == 2);  // the errored row is dropped
  CHECK(cells[0].rmse_rel_z ==
        doctest::Approx(std::sqrt((0.2 * 0.2 + 0.1 * 0.1) / 2.0)).epsilon(1e-12));
  CHECK(cells[0].rmse_filter == doctest::Approx(std::sqrt((0.04 + 0.04) / 2.0)).epsilon(1e-12));
  CHECK(cells[0].mean_logZ ==
        doctest::Approx(0.5 * (std::log(1.2) + std::log(0.9))).epsilon(1e-12));
}

TEST_CASE("paired bootstrap separates clearly ordered error samples") {
  std::vector<double> small{0.1, 0.12, 0.09, 0.11, 0.1, 0.13, 0.08, 0.1};
  std::vector<double> large{0.5, 0.48, 0.52, 0.49, 0.51, 0.5, 0.47, 0.53};
  CHECK(paired_bootstrap_le(small, large, 2000, 7) == doctest::Approx(1.0));
  CHECK(paired_bootstrap_le(large, small, 2000, 7) == doctest::Approx(0.0));
  std::vector<double> noisy{0.2, 0.6, 0.1, 0.7, 0.3, 0.5, 0.25, 0.55};
  const double p = paired_bootstrap_le(noisy, large, 2000, 7);
  CHECK(p > 0.05);
  CHECK(p < 1.0);
  CHECK_THROWS_AS(paired_bootstrap_le(small, {0.1}, 100, 1), std::invalid_argument);
}

TEST_CASE("point process simulation honours the intensity") {
  CoxParams p;
  p.horizon = 50.0;
  p.beta = 0.0;
  CHECK(cox_simulate(p, 3).event_times.empty());

  p.beta = 0.7;
  p.alpha = 0.0;  // constant intensity: count ~ Poisson(beta * T)
  double total = 0.0;
  const std::size_t reps = 40;
  for (std::size_t r = 0; r < reps; ++r)
    total += static_cast<double>(cox_simulate(p, derive_seed(9, r)).event_times.size());
  const double mean = total / static_cast<double>(reps);
  const double se = std::sqrt(p.beta * p.horizon / static_cast<double>(reps));
  CHECK(std::abs(mean - p.beta * p.horizon) < 4.0 * se);

  auto d = cox_simulate(CoxParams{}, 11);
  CHECK(d.grid.size() == 20001);
  CHECK(d.grid.front() == 0.0);
  CHECK(d.grid.back() == 200.0);
  for (double z : d.skeleton) {
    CHECK(z >= -2.0);
    CHECK(z <= 2.0);
  }
  for (double t : d.event_times) {
    CHECK(t > 0.0);
    CHECK(t < 200.0);
  }
  auto d2 = cox_simulate(CoxParams{}, 11);
  CHECK(d.skeleton == d2.skeleton);
  CHECK(d.event_times == d2.event_times);
}

TEST_CASE("filter likelihood is exact when the latent path does not matter") {
  CoxParams p;
  p.horizon = 12.0;
  p.alpha = 0.0;
  p.beta = 0.6;
  std::vector<double> events{1.3, 4.0, 4.0, 7.77, 11.2};
  auto m = make_cox_model(p, events, 0.25);
  auto out = pf_run(m, SchemeId::parse("systematic+partition"), 8, 21);
  const double expected = -p.beta * p.horizon +
                          static_cast<double>(events.size()) * std::log(p.beta);
  CHECK(out.logZ == doctest::Approx(expected).epsilon(1e-10));
  CHECK(out.resample_events == 0);
}

TEST_CASE("observation times are merged into the weight grid once") {
  CoxParams p;
  p.horizon = 1.0;
  std::vector<double> events{0.5, 0.5, 0.25};  // 0.5 sits on the uniform grid
  auto m = make_cox_model(p, events, 0.25);
  REQUIRE(m.grid.size() == 5);  // 0, .25, .5, .75, 1 with no duplicates
  for (std::size_t k = 1; k < m.grid.size(); ++k) CHECK(m.grid[k] > m.grid[k - 1]);
}

TEST_CASE("batch means variance on known chains") {
  const std::size_t n = 100000;
  Rng rng(5);
  std::vector<double> iid(n);
  for (auto& v : iid) v = normal01(rng);
  CHECK(batch_means_variance(iid, 100) == doctest::Approx(1.0).epsilon(0.15));

  // AR(1) with phi = 0.5, standardised: asymptotic variance (1+phi)/(1-phi) = 3
  const double phi = 0.5;
  std::vector<double> ar(n);
  double x = 0.0;
  for (auto& v : ar) {
    x = phi * x + normal01(rng);
    v = x * std::sqrt(1.0 - phi * phi);
  }
  CHECK(batch_means_variance(ar, 100) == doctest::Approx(3.0).epsilon(0.2));

  std::vector<double> constant(5000, 1.3);
  CHECK(batch_means_variance(constant, 50) == doctest::Approx(0.0));
  CHECK_THROWS_AS(batch_means_variance(iid, 5), std::invalid_argument);
  CHECK_THROWS_AS(batch_means_variance(std::vector<double>(15, 0.0), 10), ChainTooShort);
}

TEST_CASE("autocorrelations on known chains") {
  const std::size_t n = 200000;
  Rng rng(6);
  std::vector<double> iid(n);
  for (auto& v : iid) v = normal01(rng);
  auto r = acf(iid, 3);
  CHECK(r[0] == 1.0);
  for (std::size_t l = 1; l <= 3; ++l)
    CHECK(std::abs(r[l]) < 3.0 / std::sqrt(static_cast<double>(n)));

  const double phi = 0.6;
  std::vector<double> ar(n);
  double x = 0.0;
  for (auto& v : ar) {
    x = phi * x + normal01(rng);
    v = x;
  }
  auto ra = acf(ar, 5);
  for (std::size_t l = 1; l <= 5; ++l)
    CHECK(ra[l] == doctest::Approx(std::pow(phi, l)).epsilon(0.05));

  CHECK_THROWS_AS(acf(std::vector<double>(10, 1.0), 2), ChainTooShort);
  CHECK_THROWS_AS(acf(iid, n / 2), ChainTooShort);
}

TEST_CASE("sampler with a flat likelihood recovers the prior") {
  PmmhConfig c;
  c.iterations = 20000;
  c.burn_in = 2000;
  c.seed = 31;
  c.scheme = SchemeId::parse("multinomial");
  c.log_likelihood = [](const std::array<double, 3>&) { return 0.0; };
  auto res = pmmh_run(c);
  REQUIRE(res.chain.size() == c.iterations);
  CHECK(res.degenerate_rejections == 0);
  CHECK(res.diagnostics.acceptance > 0.1);
  CHECK(res.diagnostics.acceptance < 0.9);
  for (std::size_t p = 0; p < 3; ++p) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = c.burn_in; i < c.iterations; ++i) mean += res.chain[i][p];
    mean /= static_cast<double>(c.iterations - c.burn_in);
    for (std::size_t i = c.burn_in; i < c.iterations; ++i)
      var += (res.chain[i][p] - mean) * (res.chain[i][p] - mean);
    var /= static_cast<double>(c.iterations - c.burn_in - 1);
    CHECK(std::abs(mean) < 0.2);
    CHECK(var == doctest::Approx(c.prior_var).epsilon(0.3));
    CHECK(res.diagnostics.asymptotic_variance[p] > 0.0);
    CHECK(res.diagnostics.ire[p] ==
          doctest::Approx(res.diagnostics.asymptotic_variance[p] * 32).epsilon(1e-12));
    REQUIRE(res.diagnostics.acf[p].size() == c.acf_lags.size());
    CHECK(res.diagnostics.acf[p][0] > 0.0);  // lag-1 correlation of a random walk chain
  }
}

TEST_CASE("sampler with a gaussian likelihood matches the conjugate posterior") {
  // likelihood N(1, 0.5) per coordinate, prior N(0, 2.5):
  // posterior variance 1/(1/2.5 + 1/0.5), mean posterior_var/0.5
  PmmhConfig c;
  c.iterations = 30000;
  c.burn_in = 3000;
  c.seed = 77;
  c.scheme = SchemeId::parse("multinomial");
  c.log_likelihood = [](const std::array<double, 3>& t) {
    double s = 0.0;
    for (double v : t) s += (v - 1.0) * (v - 1.0);
    return -0.5 * s / 0.5;
  };
  const double post_var = 1.0 / (1.0 / 2.5 + 1.0 / 0.5);
  const double post_mean = post_var / 0.5;
  auto res = pmmh_run(c);
  for (std::size_t p = 0; p < 3; ++p) {
    double mean = 0.0, var = 0.0;
    for (std::size_t i = c.burn_in; i < c.iterations; ++i) mean += res.chain[i][p];
    mean /= static_cast<double>(c.iterations - c.burn_in);
    for (std::size_t i = c.burn_in; i < c.iterations; ++i)
      var += (res.chain[i][p] - mean) * (res.chain[i][p] - mean);
    var /= static_cast<double>(c.iterations - c.burn_in - 1);
    CHECK(mean == doctest::Approx(post_mean).epsilon(0.1));
    CHECK(var == doctest::Approx(post_var).epsilon(0.25));
  }
}

TEST_CASE("particle marginal chain runs, validates, and reproduces") {
  CoxParams p;
  p.horizon = 4.0;
  auto data = cox_simulate(p, 123);
  PmmhConfig c;
  c.params = p;
  c.event_times = data.event_times;
  c.grid_dt = 0.2;
  c.n_particles = 8;
  c.scheme = SchemeId::parse("ssp+partition");
  c.iterations = 300;
  c.burn_in = 50;
  c.seed = 999;
  auto a = pmmh_run(c);
  auto b = pmmh_run(c);
  REQUIRE(a.chain.size() == 300);
  CHECK(a.chain == b.chain);
  CHECK(a.diagnostics.acceptance >= 0.0);
  CHECK(a.diagnostics.acceptance <= 1.0);

  PmmhConfig bad = c;
  bad.burn_in = 300;
  CHECK_THROWS_AS(pmmh_run(bad), std::invalid_argument);
  bad = c;
  bad.event_times = {5.0};
  CHECK_THROWS_AS(pmmh_run(bad), std::invalid_argument);
}
