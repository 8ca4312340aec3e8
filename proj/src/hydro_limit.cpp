#include "knudsenlab/hydro_limit.hpp"

#include "knudsenlab/evolution.hpp"
#include "knudsenlab/fourier_grid.hpp"
#include "knudsenlab/initial_data.hpp"
#include "knudsenlab/parallel.hpp"
#include "knudsenlab/random.hpp"

#include <algorithm>
#include <cmath>

namespace knudsenlab {

namespace {

void require_2d(const SpatialGrid& grid, const char* who) {
  if (grid.dim_x != 2) throw std::invalid_argument(std::string(who) + ": requires a 2-D spatial grid");
}

double sobolev_weight(const Wavenumber& n, int k, int dim) {
  double w = 0.0;
  for (const auto& l : multi_indices_upto(dim, k)) w += std::norm(fourier_symbol(n, l, dim));
  return w;
}

// Hermitian-symmetric random scalar with zero mean, damped by 1 / (1 + |n|^2).
CVec random_scalar(const SpatialGrid& grid, Lcg64& rng, int max_mode) {
  CVec c = CVec::Zero(grid.modes());
  for (int m = 0; m < grid.modes(); ++m) {
    const Wavenumber n = grid.wavenumber(m);
    if (std::abs(n[0]) > max_mode || std::abs(n[1]) > max_mode || (n[0] == 0 && n[1] == 0)) continue;
    const double re = rng.symmetric(), im = rng.symmetric();
    c(m) = cplx(re, im) / (1.0 + n[0] * n[0] + n[1] * n[1]);
  }
  CVec sym = c;
  for (int m = 0; m < grid.modes(); ++m) {
    const Wavenumber n = grid.wavenumber(m);
    sym(m) = 0.5 * (c(m) + std::conj(c(grid.flat({-n[0], -n[1]}))));
  }
  return sym;
}

struct NSRhs {
  VectorModes u;
  CVec theta;
};

class NSStepper {
 public:
  NSStepper(const SpatialGrid& grid, double nu, double kappa, double dt, bool convective)
      : grid_(grid), dt_(dt), convective_(convective) {
    const int modes = grid.modes();
    n_.resize(modes, 2);
    eu_.resize(modes);
    et_.resize(modes);
    for (int m = 0; m < modes; ++m) {
      const Wavenumber n = grid.wavenumber(m);
      n_(m, 0) = n[0];
      n_(m, 1) = n[1];
      const double n2 = n[0] * n[0] + n[1] * n[1];
      max_n_ = std::max(max_n_, std::sqrt(n2));
      eu_(m) = std::exp(-nu * n2 * dt);
      et_(m) = std::exp(-kappa * n2 * dt);
    }
  }

  // -P(u.grad u), -u.grad theta
  NSRhs nonlinear(const VectorModes& u, const CVec& theta, double time) const {
    const int modes = grid_.modes();
    if (!convective_) return {{CVec::Zero(modes), CVec::Zero(modes)}, CVec::Zero(modes)};
    CMat rows(8, modes);
    const cplx i(0.0, 1.0);
    rows.row(0) = u[0].transpose();
    rows.row(1) = u[1].transpose();
    for (int d = 0; d < 2; ++d) {
      const CVec dd = i * n_.col(d).cast<cplx>();
      rows.row(2 + d) = dd.cwiseProduct(u[0]).transpose();
      rows.row(4 + d) = dd.cwiseProduct(u[1]).transpose();
      rows.row(6 + d) = dd.cwiseProduct(theta).transpose();
    }
    const CMat p = to_physical_rows(grid_, rows);
    const double umax = (p.row(0).cwiseAbs2() + p.row(1).cwiseAbs2()).cwiseSqrt().maxCoeff();
    if (!std::isfinite(umax)) throw NumericalFailure("ns_solve: non-finite velocity", time);
    if (umax * dt_ * max_n_ > 1.0)
      throw NumericalFailure("ns_solve: CFL violated (max|u| dt max|n| = " + std::to_string(umax * dt_ * max_n_) + ")",
                             time);
    CMat adv(3, p.cols());
    adv.row(0) = p.row(0).cwiseProduct(p.row(2)) + p.row(1).cwiseProduct(p.row(3));
    adv.row(1) = p.row(0).cwiseProduct(p.row(4)) + p.row(1).cwiseProduct(p.row(5));
    adv.row(2) = p.row(0).cwiseProduct(p.row(6)) + p.row(1).cwiseProduct(p.row(7));
    const CMat back = to_modal_rows(grid_, adv);
    NSRhs r;
    r.u = leray_project(grid_, {CVec(-back.row(0).transpose()), CVec(-back.row(1).transpose())});
    r.theta = -back.row(2).transpose();
    return r;
  }

  // Integrating-factor Heun step.
  void step(NSState& s) const {
    const NSRhs k1 = nonlinear(s.u_hat, s.theta_hat, s.time);
    NSState mid = s;
    for (int d = 0; d < 2; ++d) mid.u_hat[d] = eu_.cwiseProduct(s.u_hat[d] + dt_ * k1.u[d]);
    mid.theta_hat = et_.cwiseProduct(s.theta_hat + dt_ * k1.theta);
    const NSRhs k2 = nonlinear(mid.u_hat, mid.theta_hat, s.time + dt_);
    for (int d = 0; d < 2; ++d) s.u_hat[d] = eu_.cwiseProduct(s.u_hat[d] + 0.5 * dt_ * k1.u[d]) + 0.5 * dt_ * k2.u[d];
    s.theta_hat = et_.cwiseProduct(s.theta_hat + 0.5 * dt_ * k1.theta) + 0.5 * dt_ * k2.theta;
    s.time += dt_;
  }

 private:
  SpatialGrid grid_;
  double dt_;
  bool convective_;
  RMat n_;
  RVec eu_, et_;
  double max_n_ = 0.0;
};

// Limit column of one mode: [-theta + v.u + (|v|^2 - N) theta / 2] M^{1/2}.
CVec limit_column(const VelocityBasis& b, cplx u0, cplx u1, cplx theta) {
  CVec col = CVec::Zero(b.size());
  col(b.flat({0, 0})) = -theta;
  const cplx u[2] = {u0, u1};
  for (int i = 0; i < b.dim_v; ++i) {
    MultiIndex e1{0, 0}, e2{0, 0};
    e1[static_cast<std::size_t>(i)] = 1;
    e2[static_cast<std::size_t>(i)] = 2;
    col(b.flat(e1)) = u[i];
    col(b.flat(e2)) = theta / std::sqrt(2.0);
  }
  return col;
}

}  // namespace

VectorModes leray_project(const SpatialGrid& grid, const VectorModes& u) {
  require_2d(grid, "leray_project");
  VectorModes out = u;
  for (int m = 0; m < grid.modes(); ++m) {
    const Wavenumber n = grid.wavenumber(m);
    const double n0 = n[0], n1 = n[1];
    const double n2 = n0 * n0 + n1 * n1;
    if (n2 == 0.0) continue;
    const cplx div = (n0 * u[0](m) + n1 * u[1](m)) / n2;
    out[0](m) -= n0 * div;
    out[1](m) -= n1 * div;
  }
  return out;
}

double divergence_defect(const SpatialGrid& grid, const VectorModes& u) {
  double worst = 0.0;
  for (int m = 0; m < grid.modes(); ++m) {
    const Wavenumber n = grid.wavenumber(m);
    worst = std::max(worst, std::abs(double(n[0]) * u[0](m) + double(n[1]) * u[1](m)));
  }
  return worst;
}

std::vector<NSState> ns_solve(const NSState& state0, double t_end, double dt, const NSOptions& options) {
  require_2d(state0.grid, "ns_solve");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw std::invalid_argument("ns_solve: need dt > 0 and t_end >= 0");
  if (!(state0.nu > 0.0) || !(state0.kappa > 0.0)) throw std::invalid_argument("ns_solve: nu and kappa must be positive");
  if (options.sample_every < 1) throw std::invalid_argument("ns_solve: sample_every must be >= 1");
  const double scale = std::max(1.0, std::max(state0.u_hat[0].cwiseAbs().maxCoeff(), state0.u_hat[1].cwiseAbs().maxCoeff()));
  if (divergence_defect(state0.grid, state0.u_hat) > 1e-12 * scale * state0.grid.Mx)
    throw std::invalid_argument("ns_solve: initial velocity is not divergence-free");
  const int steps = std::max(1, static_cast<int>(std::ceil(t_end / dt - 1e-9)));
  const double h = t_end / steps;
  const NSStepper stepper(state0.grid, state0.nu, state0.kappa, h, options.convective);
  std::vector<NSState> out{state0};
  NSState s = state0;
  for (int i = 1; i <= steps; ++i) {
    stepper.step(s);
    if (i % options.sample_every == 0 || i == steps) out.push_back(s);
  }
  out.back().time = state0.time + t_end;
  return out;
}

SpectralField limit_field(BasisPtr basis, const NSState& s) {
  MomentFields m;
  m.grid = s.grid;
  m.dim = basis->dim_v;
  m.rho = -s.theta_hat;
  m.u = s.u_hat;
  m.theta = s.theta_hat;
  return kernel_field(std::move(basis), m);
}

NSState limit_initial_state(const MomentFields& in, double nu, double kappa) {
  require_2d(in.grid, "limit_initial_state");
  NSState s;
  s.grid = in.grid;
  s.nu = nu;
  s.kappa = kappa;
  s.u_hat = leray_project(in.grid, in.u);
  const double half_n = in.dim / 2.0;
  s.theta_hat = -(in.rho - half_n * in.theta) / (1.0 + half_n);
  return s;
}

std::string to_string(DataKind k) { return k == DataKind::well_prepared ? "well_prepared" : "ill_prepared"; }

DataKind parse_data_kind(const std::string& name) {
  if (name == "well_prepared") return DataKind::well_prepared;
  if (name == "ill_prepared") return DataKind::ill_prepared;
  throw std::invalid_argument("unknown data kind '" + name + "'");
}

SpectralField build_initial_data(const CollisionModel& model, const SpatialGrid& grid, const DataSpec& spec) {
  require_2d(grid, "build_initial_data");
  if (model.kernel_dim != model.dim_v() + 2 || model.dim_v() != 2)
    throw std::invalid_argument("build_initial_data: needs N = 2 and a mass-momentum-energy kernel");
  if (spec.max_mode < 1 || spec.max_mode > grid.Mx) throw std::invalid_argument("build_initial_data: max_mode outside the grid");
  if (!(spec.amplitude > 0.0)) throw std::invalid_argument("build_initial_data: amplitude must be positive");
  Lcg64 rng(spec.seed);
  MomentFields m;
  m.grid = grid;
  m.dim = 2;
  m.rho = random_scalar(grid, rng, spec.max_mode);
  m.u = {random_scalar(grid, rng, spec.max_mode), random_scalar(grid, rng, spec.max_mode)};
  if (spec.kind == DataKind::well_prepared) {
    m.u = leray_project(grid, m.u);
    m.theta = -m.rho;
  } else {
    m.theta = random_scalar(grid, rng, spec.max_mode);
  }
  SpectralField h = kernel_field(model.basis, m);
  if (spec.kind == DataKind::ill_prepared && spec.microscopic) {
    const VelocityBasis& b = *model.basis;
    SpectralField micro = h.like_zero();
    for (int s = 0; s < b.size(); ++s) {
      if (b.degree(s) < 3 || b.degree(s) > 4) continue;
      micro.coeffs.row(s) = random_scalar(grid, rng, spec.max_mode).transpose() / (1.0 + b.degree(s));
    }
    const CMat k = model.kernel.cast<cplx>();
    micro.coeffs -= k * (k.adjoint() * micro.coeffs);
    h.coeffs += micro.coeffs;
  }
  remove_conserved_part(h, model);
  h.coeffs *= spec.amplitude / h.coeffs.norm();
  return h;
}

ConvergenceResult convergence_study(const CollisionModel& model, const SpatialGrid& grid,
                                    const ConvergenceConfig& config, const BranchFit& fit) {
  if (config.eps_grid.size() < 4) throw std::invalid_argument("convergence_study: need at least 4 eps values");
  for (double e : config.eps_grid)
    if (!(e > 0.0) || e > 1.0) throw std::invalid_argument("convergence_study: eps must lie in (0, 1]");
  if (!(config.T > 0.0) || !(config.small_time > 0.0) || config.small_time > config.T)
    throw std::invalid_argument("convergence_study: need 0 < small_time <= T");
  if (config.k < 0 || config.k > 3) throw std::invalid_argument("convergence_study: k must lie in 0..3");
  if (!fit.beta.count(0) || !fit.beta.count(2)) throw std::invalid_argument("convergence_study: fit lacks beta_0 or beta_2");

  const VelocityBasis& b = *model.basis;
  ConvergenceResult res;
  res.nu = fit.beta.at(2);
  res.kappa = fit.beta.at(0);
  const SpectralField h_in = build_initial_data(model, grid, config.data);
  const NSState s0 = limit_initial_state(extract_moments(h_in), res.nu, res.kappa);
  const std::vector<int> modes = active_modes(h_in);
  std::vector<double> weight;
  for (int m : modes) weight.push_back(sobolev_weight(grid.wavenumber(m), config.k, 2));
  auto limit_col = [&](const NSState& s, int m) { return limit_column(b, s.u_hat[0](m), s.u_hat[1](m), s.theta_hat(m)); };

  NSOptions linear;
  linear.convective = false;
  const NSState at_small = ns_solve(s0, config.small_time, config.small_time, linear).back();
  const int count = static_cast<int>(config.eps_grid.size());
  res.rows.resize(static_cast<std::size_t>(count));
  std::vector<double> div(static_cast<std::size_t>(count), 0.0), bous(static_cast<std::size_t>(count), 0.0);
  parallel_for(count, config.threads, [&](int idx) {
    const double eps = config.eps_grid[static_cast<std::size_t>(idx)];
    const double step = std::min(0.01, eps / 8.0);
    const std::vector<NSState> limit = ns_solve(s0, config.T, step, linear);
    const int samples = static_cast<int>(limit.size());
    const double dt = config.T / (samples - 1);
    ConvergenceRow row;
    row.eps = eps;
    row.samples = samples;
    std::vector<double> err2(static_cast<std::size_t>(samples), 0.0);
    double avg2 = 0.0, small2 = 0.0, init2 = 0.0;
    for (std::size_t q = 0; q < modes.size(); ++q) {
      const int m = modes[q];
      const CVec x = h_in.coeffs.col(m);
      const ModePropagator prop(mode_generator(model, grid.wavenumber(m), eps, true, true));
      const CVec c = prop.diagonalized() ? prop.to_eigen(x) : CVec();
      CVec limit_integral = CVec::Zero(b.size());
      for (int i = 0; i < samples; ++i) {
        const double t = i * dt;
        const CVec kin = prop.diagonalized() ? prop.from_eigen(t, c) : prop.apply(t, x);
        const CVec lim = limit_col(limit[static_cast<std::size_t>(i)], m);
        err2[static_cast<std::size_t>(i)] += weight[q] * (kin - lim).squaredNorm();
        limit_integral += (i == 0 || i == samples - 1 ? 0.5 * dt : dt) * lim;
      }
      avg2 += weight[q] * (prop.integral(config.T, x) - limit_integral).squaredNorm();
      small2 += weight[q] * (prop.apply(config.small_time, x) - limit_col(at_small, m)).squaredNorm();
      init2 += weight[q] * (x - limit_col(s0, m)).squaredNorm();
    }
    double l2t = 0.0;
    for (int i = 0; i < samples; ++i) l2t += (i == 0 || i == samples - 1 ? 0.5 * dt : dt) * err2[static_cast<std::size_t>(i)];
    row.err_timeavg = std::sqrt(avg2);
    row.err_L2t = std::sqrt(l2t);
    row.err_sup = std::sqrt(*std::max_element(err2.begin(), err2.end()));
    row.err_small_time = std::sqrt(small2);
    row.initial_error = std::sqrt(init2);
    res.rows[static_cast<std::size_t>(idx)] = row;
    for (const NSState& st : limit) {
      div[static_cast<std::size_t>(idx)] = std::max(div[static_cast<std::size_t>(idx)], divergence_defect(grid, st.u_hat));
      const MomentFields mf = extract_moments(limit_field(model.basis, st));
      bous[static_cast<std::size_t>(idx)] =
          std::max(bous[static_cast<std::size_t>(idx)], (mf.rho + mf.theta).cwiseAbs().maxCoeff());
    }
  });
  res.divergence_defect = *std::max_element(div.begin(), div.end());
  res.boussinesq_defect = *std::max_element(bous.begin(), bous.end());
  std::vector<double> e, a, l, s;
  for (const auto& r : res.rows) {
    e.push_back(r.eps);
    a.push_back(r.err_timeavg);
    l.push_back(r.err_L2t);
    s.push_back(r.err_sup);
  }
  res.slope_timeavg = log_log_slope(e, a);
  res.slope_L2t = log_log_slope(e, l);
  res.slope_sup = log_log_slope(e, s);
  return res;
}

AcousticAveraging acoustic_averaging(const CollisionModel& model, const std::vector<double>& eps_grid,
                                     const Wavenumber& n, double T) {
  if (eps_grid.size() < 2) throw std::invalid_argument("acoustic_averaging: need at least 2 eps values");
  if (n[0] == 0 && n[1] == 0) throw std::invalid_argument("acoustic_averaging: n must be nonzero");
  if (!(T > 0.0)) throw std::invalid_argument("acoustic_averaging: T must be positive");
  const double len = std::hypot(double(n[0]), double(n[1]));
  AcousticAveraging out;
  for (double eps : eps_grid) {
    double num = 0.0, den = 0.0;
    for (double sign : {1.0, -1.0}) {
      const std::array<double, 2> omega{sign * n[0] / len, sign * n[1] / len};
      // the same real vector sits on n and -n, which keeps the field real
      const CVec x = leading_eigenvector(model, {n[0] / len, n[1] / len}, 1);
      const ModeSpectrum s = mode_spectrum(model, omega, eps * len);
      CVec part = CVec::Zero(x.size());
      for (int j : {-1, 1}) {
        const cplx rate = s.branch_eigenvalue.at(j) / (eps * eps);
        part += (std::exp(T * rate) - 1.0) / rate * (s.projectors.at(j) * x);
      }
      num += part.squaredNorm();
      den += x.squaredNorm();
    }
    out.eps.push_back(eps);
    out.value.push_back(num / den);
  }
  out.slope = log_log_slope(out.eps, out.value);
  return out;
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("log_log_slope: need matching samples");
  double mx = 0.0, my = 0.0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::invalid_argument("log_log_slope: samples must be positive");
    mx += std::log(x[i]) / n;
    my += std::log(y[i]) / n;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += std::pow(std::log(x[i]) - mx, 2);
  }
  return sxy / sxx;
}

}  // namespace knudsenlab
