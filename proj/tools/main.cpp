#include <CLI11.hpp>
#include <json.hpp>

#include <cxxabi.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <iostream>
#include <set>
#include <sstream>

#include "wifsmc/experiments.hpp"
#include "wifsmc/limitproc.hpp"

using json = nlohmann::ordered_json;
using namespace wifsmc;

namespace {

constexpr const char* kSchemaVersion = "1";

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key)) throw ConfigError("unknown key \"" + key + "\" in " + where);
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
}

std::vector<double> parse_double_list(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.empty()) continue;
    std::size_t used = 0;
    out.push_back(std::stod(tok, &used));
    if (used != tok.size()) throw ConfigError("bad number \"" + tok + "\" in list");
  }
  if (out.empty()) throw ConfigError("empty value list");
  return out;
}

std::vector<double> read_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weights file " + path);
  std::vector<double> g;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    g.push_back(std::stod(line));
  }
  if (g.empty()) throw std::runtime_error("weights file " + path + " is empty");
  return g;
}

void emit(const std::string& out_path, const json& doc) {
  if (out_path.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << doc.dump(2) << '\n';
  }
}

void emit_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path);
    if (!os) throw std::runtime_error("cannot open output file " + out_path);
    os << text;
  }
}

json artifact(const char* subcommand, json config_echo) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["subcommand"] = subcommand;
  doc["config"] = std::move(config_echo);
  return doc;
}

FKModel model_from_json(const json& cfg, json& echo) {
  reject_unknown_keys(cfg, {"model", "theta", "sigma", "height", "center", "halfwidth",
                            "horizon", "dt"},
                      "model config");
  if (cfg.value("model", "ou-box") != "ou-box")
    throw ConfigError("unknown model \"" + cfg.value("model", "") + "\"");
  const double theta = cfg.value("theta", 0.1), sigma = cfg.value("sigma", 1.0);
  const double height = cfg.value("height", 6.0), center = cfg.value("center", 0.5);
  const double halfwidth = cfg.value("halfwidth", 0.1);
  const double horizon = cfg.value("horizon", 10.0), dt = cfg.value("dt", 0.25);
  echo = {{"model", "ou-box"},   {"theta", theta},         {"sigma", sigma},
          {"height", height},    {"center", center},       {"halfwidth", halfwidth},
          {"horizon", horizon},  {"dt", dt}};
  return make_ou_box_model(theta, sigma, height, center, halfwidth, horizon, dt);
}

StateMesh mesh_from_json(const json& cfg) {
  reject_unknown_keys(cfg, {"lo", "hi", "points"}, "mesh config");
  StateMesh mesh;
  mesh.lo = cfg.value("lo", mesh.lo);
  mesh.hi = cfg.value("hi", mesh.hi);
  mesh.points = cfg.value("points", mesh.points);
  return mesh;
}

CoxParams cox_from_json(const json& cfg) {
  reject_unknown_keys(
      cfg, {"sigma", "alpha", "beta", "horizon", "dt", "reflect_a", "reflect_b"}, "cox params");
  CoxParams p;
  p.sigma = cfg.value("sigma", p.sigma);
  p.alpha = cfg.value("alpha", p.alpha);
  p.beta = cfg.value("beta", p.beta);
  p.horizon = cfg.value("horizon", p.horizon);
  p.dt = cfg.value("dt", p.dt);
  p.reflect_a = cfg.value("reflect_a", p.reflect_a);
  p.reflect_b = cfg.value("reflect_b", p.reflect_b);
  return p;
}

json cox_echo(const CoxParams& p) {
  return {{"sigma", p.sigma},         {"alpha", p.alpha},         {"beta", p.beta},
          {"horizon", p.horizon},     {"dt", p.dt},               {"reflect_a", p.reflect_a},
          {"reflect_b", p.reflect_b}};
}

json table_to_json(const IntensityTable& table) {
  json events = json::array();
  for (const auto& [sig, e] : table.entries)
    events.push_back({{"eliminated", sig.eliminated},
                      {"duplicated", sig.duplicated},
                      {"rate", e.rate}});
  json out;
  out["events"] = std::move(events);
  out["total"] = table.total;
  out["other"] = table.other;
  return out;
}

json estimate_to_json(const MonteCarloEstimate& e) {
  return {{"value", e.value}, {"std_error", e.std_error}, {"samples", e.samples}};
}

std::function<double(const State&)> test_function(const std::string& name) {
  if (name == "one") return [](const State&) { return 1.0; };
  if (name == "x") return [](const State& x) { return x[0]; };
  if (name == "xx") return [](const State& x) { return x[0] * x[0]; };
  throw ConfigError("unknown test function \"" + name + "\" (one, x, xx)");
}

double quantile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

int cmd_resample(const std::string& scheme_name, const std::string& weights_path,
                 std::uint64_t seed, const std::string& out, const std::string& format) {
  const auto scheme = SchemeId::parse(scheme_name);
  const auto g = read_weights(weights_path);
  Rng rng(seed);
  const auto anc = resample(scheme, g, rng);
  std::string line;
  for (std::size_t i = 0; i < anc.size(); ++i)
    line += (i ? "," : "") + std::to_string(anc.a[i]);
  if (format == "csv") {
    emit_text(out, line + "\n");
  } else {
    json doc = artifact("resample", {{"scheme", scheme.name()},
                                     {"weights", weights_path},
                                     {"seed", seed}});
    doc["ancestors"] = anc.a;
    emit(out, doc);
  }
  return 0;
}

int cmd_exact_dist(const std::string& scheme_name, const std::string& weights_path,
                   const std::string& out) {
  const auto scheme = SchemeId::parse(scheme_name);
  const auto g = read_weights(weights_path);
  const auto dist = exact_distribution(scheme, g);
  json doc = artifact("exact-dist", {{"scheme", scheme.name()}, {"weights", weights_path}});
  json outcomes = json::array();
  for (const auto& [anc, p] : dist) outcomes.push_back({{"ancestors", anc.a}, {"prob", p}});
  doc["outcomes"] = std::move(outcomes);
  doc["expected_offspring"] = expected_offspring(dist);
  emit(out, doc);
  return 0;
}

int cmd_intensity(const std::string& scheme_name, const std::string& v_csv,
                  const std::string& out) {
  const auto scheme = SchemeId::parse(scheme_name);
  const auto v = parse_double_list(v_csv);
  auto pv = PotentialValues::from(v);
  std::vector<double> neg(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) neg[i] = -v[i];
  const auto order = mean_partition(neg);
  const auto table = intensity_table(scheme, pv, order);
  json doc = artifact("intensity", {{"scheme", scheme.name()}, {"v", v}});
  doc["scheme"] = scheme.name();
  doc["v"] = v;
  doc["order"] = order.perm;
  doc.update(table_to_json(table));
  emit(out, doc);
  return 0;
}

int cmd_intensity_numeric(const std::string& scheme_name, const std::string& v_csv,
                          double delta, bool use_richardson, const std::string& out) {
  const auto scheme = SchemeId::parse(scheme_name);
  const auto v = parse_double_list(v_csv);
  auto pv = PotentialValues::from(v);
  auto table = numeric_intensity(scheme, pv, delta);
  if (use_richardson) table = richardson(table, numeric_intensity(scheme, pv, delta / 2.0));
  json doc = artifact("intensity-numeric", {{"scheme", scheme.name()},
                                            {"v", v},
                                            {"delta", delta},
                                            {"richardson", use_richardson}});
  doc["scheme"] = scheme.name();
  doc["v"] = v;
  doc.update(table_to_json(table));
  emit(out, doc);
  return 0;
}

int cmd_pf_run(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"model", "scheme", "n_particles"}, "pf-run config");
  json model_echo;
  const FKModel model = model_from_json(cfg.value("model", json::object()), model_echo);
  const auto scheme = SchemeId::parse(cfg.value("scheme", "systematic+partition"));
  const std::size_t n = cfg.value("n_particles", 128);
  const auto pf = pf_run(model, scheme, n, seed);
  json doc = artifact("pf-run", {{"model", model_echo},
                                 {"scheme", scheme.name()},
                                 {"n_particles", n},
                                 {"seed", seed}});
  doc["logZ"] = pf.logZ;
  doc["potential_integral"] = pf.potential_integral;
  doc["filtering"] = pf.filtering;
  doc["smoothing"] = pf.smoothing;
  doc["resample_events"] = pf.resample_events;
  emit(out, doc);
  return 0;
}

int cmd_reference_logz(const std::string& config_path, const std::string& out) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"model", "mesh"}, "reference-logz config");
  json model_echo;
  const FKModel model = model_from_json(cfg.value("model", json::object()), model_echo);
  const StateMesh mesh = mesh_from_json(cfg.value("mesh", json::object()));
  const auto ref = grid_reference(model, mesh);
  json doc = artifact("reference-logz",
                      {{"model", model_echo},
                       {"mesh", {{"lo", mesh.lo}, {"hi", mesh.hi}, {"points", mesh.points}}}});
  doc["logZ"] = ref.logZ;
  doc["filter_mean"] = ref.filter_mean;
  doc["smooth_mean"] = ref.smooth_mean;
  emit(out, doc);
  return 0;
}

int cmd_limit_sim(const std::string& config_path, std::uint64_t seed, const std::string& out,
                  const std::string& skeleton_out) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"model", "scheme", "n_particles", "replicates", "fine_step",
                            "v_max", "majorant", "f"},
                      "limit-sim config");
  json model_echo;
  const FKModel model = model_from_json(cfg.value("model", json::object()), model_echo);
  const auto scheme = SchemeId::parse(cfg.value("scheme", "killing"));
  const std::size_t n = cfg.value("n_particles", 8);
  const std::size_t reps = cfg.value("replicates", 100);
  LimitOptions opts;
  opts.fine_step = cfg.value("fine_step", 0.0);
  opts.majorant = cfg.value("majorant", 0.0);
  opts.v_max = cfg.value("v_max", model_echo.value("height", 0.0));
  opts.keep_skeleton = !skeleton_out.empty();
  const std::string fname = cfg.value("f", "x");
  const auto f = test_function(fname);

  std::vector<LimitPath> paths;
  paths.reserve(reps);
  double jump_total = 0.0;
  for (std::size_t r = 0; r < reps; ++r) {
    paths.push_back(simulate_limit(model, scheme, n, derive_seed(seed, r), opts));
    jump_total += static_cast<double>(paths.back().jumps.size());
    if (r > 0) paths.back().times.clear(), paths.back().states.clear();
  }
  json doc = artifact("limit-sim", {{"model", model_echo},
                                    {"scheme", scheme.name()},
                                    {"n_particles", n},
                                    {"replicates", reps},
                                    {"fine_step", opts.fine_step},
                                    {"v_max", opts.v_max},
                                    {"majorant", opts.majorant},
                                    {"f", fname},
                                    {"seed", seed}});
  doc["mean_jumps"] = jump_total / static_cast<double>(reps);
  doc["fk_marginal"] = estimate_to_json(fk_marginal_lhs(paths, f));
  emit(out, doc);

  if (!skeleton_out.empty()) {
    // first replicate only: t, x_1 .. x_N per line
    std::ostringstream os;
    os << "t";
    for (std::size_t i = 0; i < n; ++i) os << ",x" << i + 1;
    os << '\n';
    const auto& p = paths.front();
    for (std::size_t k = 0; k < p.times.size(); ++k) {
      os << p.times[k];
      for (const auto& x : p.states[k]) os << ',' << x[0];
      os << '\n';
    }
    emit_text(skeleton_out, os.str());
  }
  return 0;
}

int cmd_fk_check(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"model", "scheme", "n_particles", "limit_paths", "diffusion_reps",
                            "pf_reps", "fine_step", "v_max", "f"},
                      "fk-check config");
  json model_echo;
  const FKModel model = model_from_json(cfg.value("model", json::object()), model_echo);
  const auto scheme = SchemeId::parse(cfg.value("scheme", "ssp+partition"));
  const std::size_t n = cfg.value("n_particles", 8);
  const std::size_t limit_paths = cfg.value("limit_paths", 200);
  const std::size_t diffusion_reps = cfg.value("diffusion_reps", 2000);
  const std::size_t pf_reps = cfg.value("pf_reps", 200);
  const std::string fname = cfg.value("f", "xx");
  const auto f = test_function(fname);
  LimitOptions opts;
  opts.fine_step = cfg.value("fine_step", 0.0);
  opts.v_max = cfg.value("v_max", model_echo.value("height", 0.0));

  std::vector<LimitPath> paths;
  paths.reserve(limit_paths);
  for (std::size_t r = 0; r < limit_paths; ++r)
    paths.push_back(simulate_limit(model, scheme, n, derive_seed(seed, 1, r), opts));
  const auto lhs = fk_marginal_lhs(paths, f);
  const auto rhs = fk_marginal_rhs(model, f, diffusion_reps, derive_seed(seed, 2), opts.fine_step);
  const auto pfe = fk_marginal_pf(model, scheme, n, pf_reps, derive_seed(seed, 3), f);

  json doc = artifact("fk-check", {{"model", model_echo},
                                   {"scheme", scheme.name()},
                                   {"n_particles", n},
                                   {"limit_paths", limit_paths},
                                   {"diffusion_reps", diffusion_reps},
                                   {"pf_reps", pf_reps},
                                   {"fine_step", opts.fine_step},
                                   {"v_max", opts.v_max},
                                   {"f", fname},
                                   {"seed", seed}});
  doc["limit_ensemble"] = estimate_to_json(lhs);
  doc["single_diffusion"] = estimate_to_json(rhs);
  doc["particle_filter"] = estimate_to_json(pfe);
  doc["limit_vs_diffusion_z"] = (lhs.value - rhs.value) /
                                std::hypot(lhs.std_error, rhs.std_error);
  doc["filter_vs_diffusion_z"] = (pfe.value - rhs.value) /
                                 std::hypot(pfe.std_error, rhs.std_error);
  emit(out, doc);
  return 0;
}

int cmd_ou_sweep(const std::string& config_path, std::uint64_t seed, const std::string& out,
                 const std::string& format) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"schemes", "particle_counts", "delta_log2", "repetitions", "theta",
                            "sigma", "height", "center", "halfwidth", "horizon"},
                      "ou-sweep config");
  SweepConfig c;
  for (const auto& name : cfg.value("schemes", std::vector<std::string>{"killing"}))
    c.schemes.push_back(SchemeId::parse(name));
  c.particle_counts = cfg.value("particle_counts", std::vector<std::size_t>{64});
  c.delta_log2 = cfg.value("delta_log2", std::vector<int>{-6});
  c.repetitions = cfg.value("repetitions", c.repetitions);
  c.theta = cfg.value("theta", c.theta);
  c.sigma = cfg.value("sigma", c.sigma);
  c.height = cfg.value("height", c.height);
  c.center = cfg.value("center", c.center);
  c.halfwidth = cfg.value("halfwidth", c.halfwidth);
  c.horizon = cfg.value("horizon", c.horizon);
  c.seed = seed;
  const auto rows = ou_sweep(c);
  if (format == "csv") {
    std::ostringstream os;
    write_sweep_csv(os, rows);
    emit_text(out, os.str());
    return 0;
  }
  json echo = cfg;
  echo["seed"] = seed;
  json doc = artifact("ou-sweep", echo);
  json jrows = json::array();
  for (const auto& r : rows) {
    json jr = {{"scheme", r.scheme},         {"N", r.n_particles},
               {"delta_log2", r.delta_log2}, {"rep", r.rep},
               {"logZ", r.logZ},             {"filter_est", r.filter_est},
               {"smooth_est", r.smooth_est}, {"resample_events", r.resample_events}};
    if (!r.error.empty()) jr["error"] = r.error;
    jrows.push_back(std::move(jr));
  }
  doc["rows"] = std::move(jrows);
  emit(out, doc);
  return 0;
}

int cmd_cox_sim(const std::string& config_path, std::uint64_t seed, const std::string& out,
                const std::string& skeleton_out) {
  CoxParams p;
  json cfg = json::object();
  if (!config_path.empty()) {
    cfg = load_config(config_path);
    p = cox_from_json(cfg);
  }
  const auto data = cox_simulate(p, seed);
  json echo = cox_echo(p);
  echo["seed"] = seed;
  json doc = artifact("cox-sim", echo);
  doc["n_events"] = data.event_times.size();
  doc["event_times"] = data.event_times;
  emit(out, doc);
  if (!skeleton_out.empty()) {
    std::ostringstream os;
    os << "t,z\n";
    for (std::size_t k = 0; k < data.grid.size(); ++k)
      os << data.grid[k] << ',' << data.skeleton[k] << '\n';
    emit_text(skeleton_out, os.str());
  }
  return 0;
}

int cmd_pmmh(const std::string& config_path, std::uint64_t seed, const std::string& out,
             const std::string& chain_out) {
  const json cfg = load_config(config_path);
  reject_unknown_keys(cfg, {"params", "event_times", "data_seed", "grid_dt", "n_particles",
                            "scheme", "iterations", "burn_in", "prior_var", "init_proposal_sd",
                            "adapt_start", "acf_lags"},
                      "pmmh config");
  PmmhConfig c;
  if (cfg.contains("params")) c.params = cox_from_json(cfg["params"]);
  if (cfg.contains("event_times")) {
    c.event_times = cfg["event_times"].get<std::vector<double>>();
  } else {
    const std::uint64_t data_seed = cfg.value("data_seed", 0);
    c.event_times = cox_simulate(c.params, data_seed).event_times;
  }
  c.grid_dt = cfg.value("grid_dt", c.grid_dt);
  c.n_particles = cfg.value("n_particles", c.n_particles);
  c.scheme = SchemeId::parse(cfg.value("scheme", "ssp+partition"));
  c.iterations = cfg.value("iterations", c.iterations);
  c.burn_in = cfg.value("burn_in", c.burn_in);
  c.prior_var = cfg.value("prior_var", c.prior_var);
  c.init_proposal_sd = cfg.value("init_proposal_sd", c.init_proposal_sd);
  c.adapt_start = cfg.value("adapt_start", c.adapt_start);
  if (cfg.contains("acf_lags")) c.acf_lags = cfg["acf_lags"].get<std::vector<std::size_t>>();
  c.seed = seed;

  const auto res = pmmh_run(c);
  json echo = cfg;
  echo["seed"] = seed;
  echo["scheme"] = c.scheme.name();
  echo["n_events"] = c.event_times.size();
  json doc = artifact("pmmh", echo);
  doc["acceptance"] = res.diagnostics.acceptance;
  doc["degenerate_rejections"] = res.degenerate_rejections;
  const char* names[3] = {"log_sigma", "log_alpha", "log_beta"};
  for (std::size_t p = 0; p < 3; ++p) {
    std::vector<double> coord;
    coord.reserve(c.iterations - c.burn_in);
    for (std::size_t i = c.burn_in; i < c.iterations; ++i) coord.push_back(res.chain[i][p]);
    std::vector<double> sorted = coord;
    std::sort(sorted.begin(), sorted.end());
    const double mean = std::accumulate(coord.begin(), coord.end(), 0.0) /
                        static_cast<double>(coord.size());
    json jp;
    jp["mean"] = mean;
    jp["quantiles"] = {{"q05", quantile(sorted, 0.05)},
                       {"q25", quantile(sorted, 0.25)},
                       {"q50", quantile(sorted, 0.50)},
                       {"q75", quantile(sorted, 0.75)},
                       {"q95", quantile(sorted, 0.95)}};
    jp["asymptotic_variance"] = res.diagnostics.asymptotic_variance[p];
    jp["ire"] = res.diagnostics.ire[p];
    jp["acf_lags"] = c.acf_lags;
    jp["acf"] = res.diagnostics.acf[p];
    doc[names[p]] = std::move(jp);
  }
  emit(out, doc);

  if (!chain_out.empty()) {
    std::ostringstream os;
    os << "iter,log_sigma,log_alpha,log_beta\n";
    for (std::size_t i = 0; i < res.chain.size(); ++i)
      os << i << ',' << res.chain[i][0] << ',' << res.chain[i][1] << ',' << res.chain[i][2]
         << '\n';
    emit_text(chain_out, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential Monte Carlo toolkit for weakly informative potentials"};
  app.require_subcommand(1);

  std::string scheme, weights, v_csv, config, out, format = "json", skeleton_out, chain_out;
  std::uint64_t seed = 0;
  double delta = 1e-4;
  bool use_richardson = false;
  int threads = 1;
  app.add_option("--threads", threads, "worker threads (never changes emitted numbers)")
      ->check(CLI::PositiveNumber);

  auto* sc_resample = app.add_subcommand("resample", "draw one ancestor vector");
  sc_resample->add_option("--scheme", scheme)->required();
  sc_resample->add_option("--weights", weights, "text file, one weight per line")->required();
  sc_resample->add_option("--seed", seed)->required();
  sc_resample->add_option("--out", out);
  sc_resample->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* sc_exact = app.add_subcommand("exact-dist", "exact resampling law by enumeration");
  sc_exact->add_option("--scheme", scheme)->required();
  sc_exact->add_option("--weights", weights)->required();
  sc_exact->add_option("--out", out);

  auto* sc_int = app.add_subcommand("intensity", "closed-form resampling intensity table");
  sc_int->add_option("--scheme", scheme)->required();
  sc_int->add_option("--v", v_csv, "comma-separated potential values")->required();
  sc_int->add_option("--out", out);

  auto* sc_num = app.add_subcommand("intensity-numeric", "finite-step intensity quotient");
  sc_num->add_option("--scheme", scheme)->required();
  sc_num->add_option("--v", v_csv)->required();
  sc_num->add_option("--delta", delta)->check(CLI::PositiveNumber);
  sc_num->add_flag("--richardson", use_richardson, "extrapolate from delta and delta/2");
  sc_num->add_option("--out", out);

  auto* sc_pf = app.add_subcommand("pf-run", "one particle-filter pass");
  sc_pf->add_option("--config", config)->required();
  sc_pf->add_option("--seed", seed)->required();
  sc_pf->add_option("--out", out);

  auto* sc_ref = app.add_subcommand("reference-logz", "deterministic quadrature reference");
  sc_ref->add_option("--config", config)->required();
  sc_ref->add_option("--out", out);

  auto* sc_lim = app.add_subcommand("limit-sim", "continuous-time limit ensemble");
  sc_lim->add_option("--config", config)->required();
  sc_lim->add_option("--seed", seed)->required();
  sc_lim->add_option("--out", out);
  sc_lim->add_option("--skeleton-out", skeleton_out, "CSV path of the first replicate");

  auto* sc_fk = app.add_subcommand("fk-check", "marginal identity across three estimators");
  sc_fk->add_option("--config", config)->required();
  sc_fk->add_option("--seed", seed)->required();
  sc_fk->add_option("--out", out);

  auto* sc_sweep = app.add_subcommand("ou-sweep", "scheme/N/step-size filter sweep");
  sc_sweep->add_option("--config", config)->required();
  sc_sweep->add_option("--seed", seed)->required();
  sc_sweep->add_option("--out", out);
  sc_sweep->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  auto* sc_cox = app.add_subcommand("cox-sim", "simulate the doubly stochastic point process");
  sc_cox->add_option("--config", config);
  sc_cox->add_option("--seed", seed)->required();
  sc_cox->add_option("--out", out);
  sc_cox->add_option("--skeleton-out", skeleton_out, "CSV path of the latent path");

  auto* sc_pmmh = app.add_subcommand("pmmh", "particle marginal Metropolis-Hastings chain");
  sc_pmmh->add_option("--config", config)->required();
  sc_pmmh->add_option("--seed", seed)->required();
  sc_pmmh->add_option("--out", out);
  sc_pmmh->add_option("--chain-out", chain_out, "CSV path of the full chain");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*sc_resample) return cmd_resample(scheme, weights, seed, out, format);
    if (*sc_exact) return cmd_exact_dist(scheme, weights, out);
    if (*sc_int) return cmd_intensity(scheme, v_csv, out);
    if (*sc_num) return cmd_intensity_numeric(scheme, v_csv, delta, use_richardson, out);
    if (*sc_pf) return cmd_pf_run(config, seed, out);
    if (*sc_ref) return cmd_reference_logz(config, out);
    if (*sc_lim) return cmd_limit_sim(config, seed, out, skeleton_out);
    if (*sc_fk) return cmd_fk_check(config, seed, out);
    if (*sc_sweep) return cmd_ou_sweep(config, seed, out, format);
    if (*sc_cox) return cmd_cox_sim(config, seed, out, skeleton_out);
    if (*sc_pmmh) return cmd_pmmh(config, seed, out, chain_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    int status = 0;
    char* name = abi::__cxa_demangle(typeid(e).name(), nullptr, nullptr, &status);
    json err = {{"error",
                 {{"type", status == 0 && name ? name : typeid(e).name()},
                  {"message", e.what()}}}};
    std::free(name);
    std::cerr << err.dump(2) << '\n';
    return 1;
  }
  return 2;
}
