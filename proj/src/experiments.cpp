#include "knudsenlab/experiments.hpp"

#include "knudsenlab/branch_analysis.hpp"
#include "knudsenlab/evolution.hpp"
#include "knudsenlab/hydro_limit.hpp"
#include "knudsenlab/hypocoercivity.hpp"
#include "knudsenlab/initial_data.hpp"
#include "knudsenlab/output.hpp"
#include "knudsenlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace knudsenlab {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Setup {
  BasisPtr basis;
  SpatialGrid grid;
  CollisionModel model;
};

Setup make_setup(const ModelBlock& m) {
  Setup s;
  s.basis = build_basis(m.N, m.K);
  s.grid = make_grid(m.N, m.Mx);
  s.model = make_model(m.kind, s.basis, m.params);
  return s;
}

std::string eps_label(double eps) { return "eps=" + format_double(eps); }

Check make_check(std::string name, bool pass, double value, double threshold, std::string detail = {}) {
  return {std::move(name), pass, value, threshold, std::move(detail)};
}

SpectralField make_data(const Setup& s, const ExperimentConfig& c) {
  const ExperimentBlock& x = c.experiment;
  if (x.data == "random") return random_field(s.model, s.grid, c.runtime.seed, x.amplitude, x.max_mode);
  DataSpec spec;
  spec.kind = parse_data_kind(x.data);
  spec.seed = c.runtime.seed;
  spec.amplitude = x.amplitude;
  spec.max_mode = x.max_mode;
  return build_initial_data(s.model, s.grid, spec);
}

std::optional<HypNormCoefficients> try_coefficients(const OperatorConstants& c, int k, NormVariant v, int dim,
                                                    std::vector<Check>& checks) {
  const std::string name = std::string("coefficients.") + (v == NormVariant::standard ? "standard" : "perp");
  try {
    HypNormCoefficients h = build_hk_coefficients(c, k, v, dim);
    checks.push_back(make_check(name, true, h.eps_max, 0.0, "eps_max"));
    return h;
  } catch (const std::domain_error& e) {
    checks.push_back(make_check(name, false, 0.0, 0.0, e.what()));
    return std::nullopt;
  }
}

const std::vector<double>* series(const TrajectoryRecord& r, const std::string& key) {
  const auto it = r.norms.find(key);
  return it == r.norms.end() ? nullptr : &it->second;
}

double value_or_nan(const std::vector<double>* s, std::size_t i) {
  return s ? (*s)[i] : std::numeric_limits<double>::quiet_NaN();
}

// Shared by simulate and decay-sweep.
struct RunSet {
  OperatorConstants constants;
  std::optional<HypNormCoefficients> standard, perp;
  std::vector<TrajectoryRecord> records;
  double T = 0.0;
};

RunSet run_kinetic(const Setup& s, const ExperimentConfig& c, double default_T, std::vector<Check>& checks) {
  const ExperimentBlock& x = c.experiment;
  RunSet rs;
  rs.T = x.T.value_or(default_T);
  rs.constants = constants_ledger(s.model, x.k, &s.grid, c.runtime.seed);
  rs.standard = try_coefficients(rs.constants, x.k, NormVariant::standard, c.model.N, checks);
  rs.perp = try_coefficients(rs.constants, x.k, NormVariant::perp, c.model.N, checks);
  const SpectralField h0 = make_data(s, c);
  rs.records.resize(c.eps_grid.size());
  parallel_for(static_cast<int>(c.eps_grid.size()), c.runtime.threads, [&](int i) {
    const double eps = c.eps_grid[static_cast<std::size_t>(i)];
    IntegratorConfig ic;
    ic.scheme = x.nonlinear ? Scheme::strang_imex : Scheme::exact_linear;
    ic.nonlinear = x.nonlinear;
    ic.t_end = rs.T;
    ic.dt = x.dt.value_or(x.nonlinear ? std::min(0.01, 0.1 * eps) : std::min(0.01, eps * eps / 4.0));
    ic.sample_every = x.sample_every;
    ic.k = x.k;
    if (rs.standard && eps <= rs.standard->eps_max) ic.hyp_standard = rs.standard;
    if (rs.perp && eps <= rs.perp->eps_max) ic.hyp_perp = rs.perp;
    rs.records[static_cast<std::size_t>(i)] = propagate(h0, s.model, eps, ic);
  });
  return rs;
}

void write_decay_csv(const fs::path& path, const std::string& hash, const std::vector<TrajectoryRecord>& records) {
  CsvWriter csv(path, hash, {"eps", "t", "norm_L2", "norm_Hk", "norm_HypEps", "norm_HypPerp"});
  for (const auto& r : records) {
    const auto* l2 = series(r, "L2");
    const auto* hk = series(r, "Hk");
    const auto* hyp = series(r, "HypEps");
    const auto* perp = series(r, "HypPerp");
    for (std::size_t i = 0; i < r.size(); ++i)
      csv.row({r.eps, r.times[i], value_or_nan(l2, i), value_or_nan(hk, i), value_or_nan(hyp, i), value_or_nan(perp, i)});
  }
}

// Monotonicity and the a priori inequality for one run.
void run_checks(const TrajectoryRecord& r, const RunSet& rs, std::vector<Check>& checks, json& row) {
  const std::string tag = " " + eps_label(r.eps);
  for (const auto& w : r.warnings) row["warnings"].push_back(w);
  const auto* hyp = series(r, "HypEps");
  if (!hyp) {
    row["hyp_norm"] = "not recorded (eps > eps_max)";
    return;
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < hyp->size(); ++i) worst = std::max(worst, ((*hyp)[i] - (*hyp)[i - 1]) / hyp->front());
  checks.push_back(make_check("hyp_monotone" + tag, worst <= 1e-10, worst, 1e-10, "max relative increase of HypEps"));
  const DissipationReport d = dissipation_monitor(r, *rs.standard, rs.constants);
  checks.push_back(make_check("dissipation_monitor" + tag, d.pass(), static_cast<double>(d.violations.size()), 0.0,
                              "violations at slack " + format_double(d.slack)));
  checks.push_back(make_check("energy_identity" + tag, d.identity_pass, d.identity_defect, d.identity_tolerance));
  row["monitor_violations"] = d.violations.size();
  row["identity_defect"] = d.identity_defect;
}

ExperimentResult run_simulate(const ExperimentConfig& c, const fs::path& dir) {
  const Setup s = make_setup(c.model);
  ExperimentResult res;
  const RunSet rs = run_kinetic(s, c, 1.0, res.checks);
  write_decay_csv(dir / "decay.csv", hex64(c.hash()), rs.records);
  res.files.push_back("decay.csv");
  for (const auto& r : rs.records) {
    json row{{"eps", r.eps}, {"samples", r.size()}};
    double moments = 0.0;
    for (const auto& v : r.kernel_moments)
      for (double m : v) moments = std::max(moments, std::abs(m));
    const double scale = r.norm("L2").front();
    res.checks.push_back(make_check("conserved_moments " + eps_label(r.eps), moments <= 1e-10 * scale, moments,
                                    1e-10 * scale, "max |x-averaged kernel moment|"));
    run_checks(r, rs, res.checks, row);
    row["final_L2"] = r.norm("L2").back();
    res.summary["runs"].push_back(row);
  }
  return res;
}

ExperimentResult run_decay_sweep(const ExperimentConfig& c, const fs::path& dir) {
  const Setup s = make_setup(c.model);
  ExperimentResult res;
  const RunSet rs = run_kinetic(s, c, 3.0, res.checks);
  const std::string hash = hex64(c.hash());
  write_decay_csv(dir / "decay.csv", hash, rs.records);
  CsvWriter fit_csv(dir / "decay_fit.csv", hash, {"eps", "tau_fit", "residual"});
  res.files = {"decay.csv", "decay_fit.csv"};
  const double t0 = c.experiment.window_start.value_or(rs.T / 2.0);
  std::vector<double> taus;
  std::vector<EquivalenceBounds> perp_bounds;
  for (const auto& r : rs.records) {
    const std::string key = r.norms.count("HypEps") ? "HypEps" : "Hk";
    const DecayFit f = fit_decay_rate(r, key, t0, rs.T);
    taus.push_back(f.tau);
    fit_csv.row({r.eps, f.tau, f.residual});
    json row{{"eps", r.eps}, {"tau", f.tau}, {"residual", f.residual}, {"fit_norm", key}};
    run_checks(r, rs, res.checks, row);
    if (const auto* p = series(r, "HypPerp")) {
      res.checks.push_back(make_check("perp_decay " + eps_label(r.eps), p->back() < p->front(), p->back() / p->front(),
                                      1.0, "HypPerp(T) / HypPerp(0)"));
      perp_bounds.push_back(equivalence_constants(*rs.perp, s.model, s.grid, r.eps));
      row["perp_equivalence"] = {perp_bounds.back().lower, perp_bounds.back().upper};
    }
    res.summary["runs"].push_back(row);
  }
  const double lo = *std::min_element(taus.begin(), taus.end());
  const double hi = *std::max_element(taus.begin(), taus.end());
  res.checks.push_back(make_check("tau_positive", lo > 0.0, lo, 0.0, "min fitted tau"));
  res.checks.push_back(make_check("tau_band", lo > 0.0 && hi / lo <= c.experiment.tau_band, lo > 0.0 ? hi / lo : INFINITY,
                                  c.experiment.tau_band, "max tau / min tau"));
  if (perp_bounds.size() >= 2) {
    double drift = 0.0;
    for (const auto& b : perp_bounds)
      drift = std::max({drift, std::abs(b.lower / perp_bounds.front().lower - 1.0),
                        std::abs(b.upper / perp_bounds.front().upper - 1.0)});
    res.checks.push_back(make_check("perp_equivalence_drift", drift <= 0.05, drift, 0.05,
                                    "relative drift of the perp equivalence constants across eps"));
  }
  return res;
}

ExperimentResult run_verify(const ExperimentConfig& c, const fs::path&) {
  const Setup s = make_setup(c.model);
  ExperimentResult res;
  const OperatorConstants k = constants_ledger(s.model, c.experiment.k, &s.grid, c.runtime.seed);
  const HypothesisReport report = verify_hypotheses(s.model, k, c.experiment.tol, c.runtime.seed);
  for (const auto& h : report.checks) res.checks.push_back(make_check(h.name, h.pass, h.witness, 0.0, h.detail));
  try_coefficients(k, c.experiment.k, NormVariant::standard, c.model.N, res.checks);
  try_coefficients(k, c.experiment.k, NormVariant::perp, c.model.N, res.checks);
  res.summary["constants"] = {{"lambda", k.lambda}, {"nu", k.nu},      {"CL", k.CL},
                              {"Cpi", k.Cpi},       {"Cgamma", k.Cgamma}, {"k0", k.k0}};
  return res;
}

ExperimentResult run_branches(const ExperimentConfig& c, const fs::path& dir) {
  const Setup s = make_setup(c.model);
  const ExperimentBlock& x = c.experiment;
  ExperimentResult res;
  const std::array<double, 2> omega{std::cos(x.omega_angle), std::sin(x.omega_angle)};
  std::vector<double> grid, half;
  for (int i = 1; i <= x.zeta_points; ++i) {
    grid.push_back(x.zeta_max * i / x.zeta_points);
    half.push_back(0.5 * grid.back());
  }
  const BranchFit fit = fit_dispersion(s.model, omega, grid);
  const BranchFit fit_half = fit_dispersion(s.model, omega, half);

  CsvWriter csv(dir / "branches.csv", hex64(c.hash()), {"zeta", "branch", "re_lambda", "im_lambda"});
  res.files.push_back("branches.csv");
  std::vector<double> zs{0.0};
  zs.insert(zs.end(), grid.begin(), grid.end());
  double conj_defect = 0.0, partition_defect = 0.0;
  for (double z : zs) {
    const ModeSpectrum sp = mode_spectrum(s.model, omega, z);
    for (const auto& [j, lam] : sp.branch_eigenvalue) csv.row({z, double(j), lam.real(), lam.imag()});
    if (sp.branch_eigenvalue.count(1))
      conj_defect = std::max(conj_defect, std::abs(sp.branch_eigenvalue.at(-1) - std::conj(sp.branch_eigenvalue.at(1))));
    CMat sum = CMat::Zero(s.basis->size(), s.basis->size());
    for (const auto& [j, p] : sp.projectors) sum += p;
    partition_defect = std::max(partition_defect, (sum - CMat::Identity(sum.rows(), sum.cols())).norm());
  }
  for (int j : {0, 2})
    if (fit.alpha.count(j))
      res.checks.push_back(make_check("alpha_" + std::to_string(j) + "_zero", std::abs(fit.alpha.at(j)) <= 1e-6,
                                      std::abs(fit.alpha.at(j)), 1e-6));
  if (fit.alpha.count(1))
    res.checks.push_back(make_check("acoustic_conjugate", conj_defect <= 1e-10, conj_defect, 1e-10,
                                    "max |lambda_-1 - conj(lambda_1)| on the grid"));
  res.checks.push_back(make_check("projector_partition", partition_defect <= 1e-8, partition_defect, 1e-8));
  const double ratio = fit_half.gamma_bound / fit.gamma_bound;
  res.checks.push_back(make_check("gamma_self_convergence", std::abs(ratio - 1.0) <= 0.1, ratio, 0.1,
                                  "gamma_bound(half grid) / gamma_bound(grid)"));
  const double sigma_min = s.model.kind == ModelKind::HydroBGK ? 0.5 : 0.0;
  res.checks.push_back(make_check("sigma", fit.sigma > sigma_min, fit.sigma, sigma_min, "remainder gap"));

  const double C_R = remainder_constant(s.model, omega, grid, fit.sigma, x.tau_max);
  const SpectralField h = random_field(s.model, s.grid, c.runtime.seed, x.amplitude, x.max_mode);
  const int count = static_cast<int>(c.eps_grid.size());
  std::vector<SemigroupParts> at0(static_cast<std::size_t>(count)), later(static_cast<std::size_t>(count));
  parallel_for(count, c.runtime.threads, [&](int i) {
    const double eps = c.eps_grid[static_cast<std::size_t>(i)];
    at0[static_cast<std::size_t>(i)] = semigroup_decompose(h, s.model, eps, 0.0, fit, C_R);
    // t / eps^2 = tau_max stays inside the window where C_R was measured
    later[static_cast<std::size_t>(i)] = semigroup_decompose(h, s.model, eps, x.tau_max * eps * eps, fit, C_R);
  });
  for (int i = 0; i < count; ++i) {
    const auto& p0 = at0[static_cast<std::size_t>(i)];
    const auto& pt = later[static_cast<std::size_t>(i)];
    CMat sum = p0.remainder.coeffs;
    for (const auto& [j, f] : p0.branches) sum += f.coeffs;
    const double defect = (sum - h.coeffs).norm() / h.coeffs.norm();
    const std::string tag = " " + eps_label(p0.eps);
    res.checks.push_back(make_check("partition_t0" + tag, defect <= 1e-10, defect, 1e-10));
    if (pt.modes_outside_n0 == 0)
      res.checks.push_back(make_check("remainder_bound" + tag, pt.remainder_norm <= pt.remainder_bound, pt.remainder_norm,
                                      pt.remainder_bound, "at t = " + format_double(pt.t)));
    res.summary["semigroup"].push_back({{"eps", p0.eps},
                                        {"t", pt.t},
                                        {"remainder_norm", pt.remainder_norm},
                                        {"remainder_bound", pt.remainder_bound},
                                        {"modes_outside_n0", pt.modes_outside_n0}});
  }
  json alpha, beta;
  for (const auto& [j, a] : fit.alpha) alpha[std::to_string(j)] = a;
  for (const auto& [j, b] : fit.beta) beta[std::to_string(j)] = b;
  res.summary["fit"] = {{"alpha", alpha},
                        {"beta", beta},
                        {"gamma_bound", fit.gamma_bound},
                        {"gamma_bound_half_grid", fit_half.gamma_bound},
                        {"sigma", fit.sigma},
                        {"n0", fit.n0},
                        {"C_R", C_R},
                        {"acoustic_collinearity", fit.acoustic_collinearity},
                        {"acoustic_collinearity_unit_coefficient", fit.acoustic_collinearity_unit}};
  return res;
}

ExperimentResult run_hydro_sweep(const ExperimentConfig& c, const fs::path& dir) {
  const Setup s = make_setup(c.model);
  const ExperimentBlock& x = c.experiment;
  ExperimentResult res;
  std::vector<double> zeta;
  for (int i = 1; i <= 8; ++i) zeta.push_back(0.00125 * i);
  const BranchFit fit = fit_dispersion(s.model, {1.0, 0.0}, zeta);
  std::vector<DataKind> kinds;
  if (x.data == "both") kinds = {DataKind::well_prepared, DataKind::ill_prepared};
  else kinds = {parse_data_kind(x.data)};
  const std::string hash = hex64(c.hash());
  for (DataKind kind : kinds) {
    ConvergenceConfig cc;
    cc.eps_grid = c.eps_grid;
    cc.data.kind = kind;
    cc.data.seed = c.runtime.seed;
    cc.data.amplitude = x.amplitude;
    cc.data.max_mode = std::min(x.max_mode, 2);
    cc.T = x.T.value_or(1.0);
    cc.k = x.k;
    cc.small_time = x.small_time;
    cc.threads = c.runtime.threads;
    const ConvergenceResult r = convergence_study(s.model, s.grid, cc, fit);
    const std::string name = kinds.size() == 1 ? "hydro.csv" : "hydro_" + to_string(kind) + ".csv";
    CsvWriter csv(dir / name, hash, {"eps", "err_timeavg", "err_L2t", "err_sup"});
    res.files.push_back(name);
    for (const auto& row : r.rows) csv.row({row.eps, row.err_timeavg, row.err_L2t, row.err_sup});
    const std::string tag = " " + to_string(kind);
    if (kind == DataKind::well_prepared) {
      res.checks.push_back(make_check("sup_error_slope" + tag, r.slope_sup >= x.slope_min, r.slope_sup, x.slope_min));
    } else {
      res.checks.push_back(
          make_check("timeavg_error_slope" + tag, r.slope_timeavg >= x.slope_min, r.slope_timeavg, x.slope_min));
      double retained = INFINITY;
      for (const auto& row : r.rows) retained = std::min(retained, row.err_small_time / row.initial_error);
      res.checks.push_back(make_check("acoustic_retained" + tag, retained >= 0.5, retained, 0.5,
                                      "min over eps of |h_eps - h|(small_time) / |h_in - h(0)|"));
    }
    res.checks.push_back(make_check("boussinesq" + tag, r.boussinesq_defect <= 1e-12, r.boussinesq_defect, 1e-12));
    res.checks.push_back(make_check("divergence_free" + tag, r.divergence_defect <= 1e-12, r.divergence_defect, 1e-12));
    json rows = json::array();
    for (const auto& row : r.rows)
      rows.push_back({{"eps", row.eps},
                      {"err_timeavg", row.err_timeavg},
                      {"err_L2t", row.err_L2t},
                      {"err_sup", row.err_sup},
                      {"err_small_time", row.err_small_time},
                      {"initial_error", row.initial_error}});
    res.summary[to_string(kind)] = {{"nu", r.nu},
                                    {"kappa", r.kappa},
                                    {"slope_timeavg", r.slope_timeavg},
                                    {"slope_L2t", r.slope_L2t},
                                    {"slope_sup", r.slope_sup},
                                    {"rows", rows}};
  }
  const AcousticAveraging ac = acoustic_averaging(s.model, c.eps_grid, {1, 0}, x.acoustic_T);
  res.checks.push_back(make_check("acoustic_averaging_slope", ac.slope >= 1.7, ac.slope, 1.7,
                                  "log-log slope of |int acoustic part dt|^2 against eps"));
  res.summary["acoustic_averaging"] = {{"eps", ac.eps}, {"value", ac.value}, {"slope", ac.slope}};
  return res;
}

}  // namespace

bool ExperimentResult::all_pass() const {
  return !numerical_failure && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

int ExperimentResult::exit_code() const {
  if (numerical_failure) return 3;
  return all_pass() ? 0 : 1;
}

json result_json(const ExperimentConfig& config, const ExperimentResult& result) {
  json j;
  j["experiment"] = to_string(config.experiment.kind);
  j["model"] = to_string(config.model.kind);
  j["config_hash"] = hex64(config.hash());
  j["versions"] = version_string();
  j["status"] = result.numerical_failure ? "error" : (result.all_pass() ? "pass" : "fail");
  j["checks"] = json::array();
  j["failed_checks"] = json::array();
  for (const auto& c : result.checks) {
    j["checks"].push_back(
        {{"name", c.name}, {"pass", c.pass}, {"value", c.value}, {"threshold", c.threshold}, {"detail", c.detail}});
    if (!c.pass) j["failed_checks"].push_back(c.name);
  }
  j["error"] = result.error;
  j["files"] = result.files;
  j["summary"] = result.summary.is_null() ? json::object() : result.summary;
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const fs::path& out_dir) {
  validate(config);
  fs::create_directories(out_dir);
  ExperimentResult res;
  try {
    switch (config.experiment.kind) {
      case ExperimentKind::verify: res = run_verify(config, out_dir); break;
      case ExperimentKind::simulate: res = run_simulate(config, out_dir); break;
      case ExperimentKind::decay_sweep: res = run_decay_sweep(config, out_dir); break;
      case ExperimentKind::branches: res = run_branches(config, out_dir); break;
      case ExperimentKind::hydro_sweep: res = run_hydro_sweep(config, out_dir); break;
    }
  } catch (const NumericalFailure& e) {
    res.numerical_failure = true;
    res.error = std::string(e.what()) + " (t = " + format_double(e.time) + ")";
  } catch (const ContinuationFailure& e) {
    res.numerical_failure = true;
    res.error = e.what();
  }
  write_json(out_dir / "result.json", result_json(config, res));
  return res;
}

}  // namespace knudsenlab
