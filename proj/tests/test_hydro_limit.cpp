#include "doctest.h"

#include "knudsenlab/hydro_limit.hpp"
#include "knudsenlab/evolution.hpp"

#include <cmath>

using namespace knudsenlab;

namespace {

NSState zero_state(const SpatialGrid& g, double nu = 1.0, double kappa = 1.0) {
  NSState s;
  s.grid = g;
  s.u_hat = {CVec::Zero(g.modes()), CVec::Zero(g.modes())};
  s.theta_hat = CVec::Zero(g.modes());
  s.nu = nu;
  s.kappa = kappa;
  return s;
}

// u = (sin x cos y, -cos x sin y), an exact decaying solution: u.grad u is a gradient
NSState taylor_green(const SpatialGrid& g, double nu) {
  NSState s = zero_state(g, nu, 1.0);
  const cplx q(0.0, 0.25);
  s.u_hat[0](g.flat({1, 1})) = -q;
  s.u_hat[0](g.flat({1, -1})) = -q;
  s.u_hat[0](g.flat({-1, 1})) = q;
  s.u_hat[0](g.flat({-1, -1})) = q;
  s.u_hat[1](g.flat({1, 1})) = q;
  s.u_hat[1](g.flat({-1, 1})) = q;
  s.u_hat[1](g.flat({1, -1})) = -q;
  s.u_hat[1](g.flat({-1, -1})) = -q;
  return s;
}

double energy(const NSState& s) { return s.u_hat[0].squaredNorm() + s.u_hat[1].squaredNorm(); }

}  // namespace

TEST_CASE("Leray projection: divergence-free, idempotent, kills gradients") {
  const SpatialGrid g = make_grid(2, 4);
  VectorModes u{CVec::Zero(g.modes()), CVec::Zero(g.modes())};
  for (int m = 0; m < g.modes(); ++m) {
    const Wavenumber n = g.wavenumber(m);
    u[0](m) = cplx(std::cos(1.0 + m), std::sin(0.3 * m)) / (1.0 + n[0] * n[0] + n[1] * n[1]);
    u[1](m) = cplx(std::sin(2.0 + m), 0.1) / (1.0 + n[0] * n[0] + n[1] * n[1]);
  }
  const VectorModes p = leray_project(g, u);
  CHECK(divergence_defect(g, p) < 1e-15);
  CHECK(divergence_defect(g, u) > 0.01);
  const VectorModes pp = leray_project(g, p);
  CHECK((pp[0] - p[0]).norm() + (pp[1] - p[1]).norm() < 1e-15);
  // grad phi with phi = e^{i(2x - y)} projects to zero
  VectorModes grad{CVec::Zero(g.modes()), CVec::Zero(g.modes())};
  grad[0](g.flat({2, -1})) = cplx(0, 2);
  grad[1](g.flat({2, -1})) = cplx(0, -1);
  const VectorModes pg = leray_project(g, grad);
  CHECK(pg[0].norm() + pg[1].norm() < 1e-15);
}

TEST_CASE("Taylor-Green vortex decays as exp(-2 nu t) with the convective term on") {
  const SpatialGrid g = make_grid(2, 4);
  const double nu = 0.5, T = 0.5;
  const NSState s0 = taylor_green(g, nu);
  const std::vector<NSState> run = ns_solve(s0, T, 0.01);
  const NSState& end = run.back();
  CHECK(end.time == doctest::Approx(T));
  const double decay = std::exp(-2.0 * nu * T);
  for (int c = 0; c < 2; ++c) CHECK((end.u_hat[c] - decay * s0.u_hat[c]).norm() < 1e-12);
  CHECK(divergence_defect(g, end.u_hat) < 1e-14);
}

TEST_CASE("a temperature mode diffuses at rate kappa |n|^2") {
  const SpatialGrid g = make_grid(2, 3);
  NSState s = zero_state(g, 1.0, 0.3);
  s.theta_hat(g.flat({1, 1})) = 0.5;
  s.theta_hat(g.flat({-1, -1})) = 0.5;
  const std::vector<NSState> run = ns_solve(s, 1.0, 0.05);
  CHECK(std::abs(run.back().theta_hat(g.flat({1, 1})) - 0.5 * std::exp(-0.6)) < 1e-14);
}

TEST_CASE("energy decreases for random divergence-free data") {
  const SpatialGrid g = make_grid(2, 4);
  NSState s = zero_state(g, 0.05, 0.05);
  for (int m = 0; m < g.modes(); ++m) {
    const Wavenumber n = g.wavenumber(m);
    const int n2 = n[0] * n[0] + n[1] * n[1];
    if (n2 == 0 || n2 > 5) continue;
    s.u_hat[0](m) = cplx(std::cos(0.7 * m), std::sin(1.1 * m)) / double(n2);
    s.u_hat[1](m) = cplx(std::sin(0.4 * m), std::cos(0.9 * m)) / double(n2);
  }
  // make the field real, then divergence-free
  for (int m = 0; m < g.modes(); ++m) {
    const Wavenumber n = g.wavenumber(m);
    const int mm = g.flat({-n[0], -n[1]});
    if (mm < m) continue;
    for (int c = 0; c < 2; ++c) {
      const cplx avg = 0.5 * (s.u_hat[c](m) + std::conj(s.u_hat[c](mm)));
      s.u_hat[c](m) = avg;
      s.u_hat[c](mm) = std::conj(avg);
    }
  }
  s.u_hat = leray_project(g, s.u_hat);
  const std::vector<NSState> run = ns_solve(s, 1.0, 0.01, {true, 10});
  CHECK(run.size() == 11);
  for (std::size_t i = 1; i < run.size(); ++i) {
    CHECK(energy(run[i]) < energy(run[i - 1]));
    CHECK(divergence_defect(g, run[i].u_hat) < 1e-13);
  }
}

TEST_CASE("ns_solve rejects divergent velocity data") {
  const SpatialGrid g = make_grid(2, 2);
  NSState s = zero_state(g);
  s.u_hat[0](g.flat({1, 0})) = 1.0;
  CHECK_THROWS_AS(ns_solve(s, 0.1, 0.01), std::invalid_argument);
}

TEST_CASE("limit data: Boussinesq projection and Leray projection") {
  const SpatialGrid g = make_grid(2, 3);
  MomentFields in;
  in.grid = g;
  in.dim = 2;
  in.rho = CVec::Zero(g.modes());
  in.theta = CVec::Zero(g.modes());
  in.u = {CVec::Zero(g.modes()), CVec::Zero(g.modes())};
  in.rho(g.flat({1, 0})) = 0.3;
  in.theta(g.flat({1, 0})) = 0.1;
  in.u[0](g.flat({1, 0})) = 0.2;  // compressive, removed by P
  in.u[1](g.flat({1, 0})) = 0.4;
  const NSState s = limit_initial_state(in, 0.7, 0.9);
  // rho = (rho_in - theta_in) / 2 at N = 2, theta = -rho
  CHECK(std::abs(s.theta_hat(g.flat({1, 0})) + 0.1) < 1e-15);
  CHECK(std::abs(s.u_hat[0](g.flat({1, 0}))) < 1e-15);
  CHECK(std::abs(s.u_hat[1](g.flat({1, 0})) - 0.4) < 1e-15);
  CHECK(s.nu == 0.7);
  CHECK(s.kappa == 0.9);
  // the limit field carries rho = -theta
  const BasisPtr b = build_basis(2, 4);
  const MomentFields back = extract_moments(limit_field(b, s));
  CHECK((back.rho + back.theta).norm() < 1e-15);
  CHECK(std::abs(back.rho(g.flat({1, 0})) - 0.1) < 1e-15);
}

TEST_CASE("initial data families") {
  const BasisPtr b = build_basis(2, 6);
  const SpatialGrid g = make_grid(2, 4);
  const CollisionModel m = make_model(ModelKind::HydroBGK, b);
  DataSpec spec;
  spec.amplitude = 1.5;
  const SpectralField w = build_initial_data(m, g, spec);
  CHECK(std::sqrt(norm_squared(w, NormKind::L2)) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK((project_fluid(w, m).coeffs - w.coeffs).norm() < 1e-13);
  const MomentFields mw = extract_moments(w);
  CHECK((mw.rho + mw.theta).norm() < 1e-13);
  CHECK(divergence_defect(g, mw.u) < 1e-13);
  CHECK(reality_defect(w) < 1e-15);

  spec.kind = DataKind::ill_prepared;
  const SpectralField il = build_initial_data(m, g, spec);
  const MomentFields mi = extract_moments(il);
  CHECK((mi.rho + mi.theta).norm() > 0.01);
  CHECK(divergence_defect(g, mi.u) > 0.01);
  CHECK(std::abs(mi.rho(g.zero_mode())) < 1e-15);

  spec.microscopic = true;
  const SpectralField micro = build_initial_data(m, g, spec);
  CHECK((micro.coeffs - project_fluid(micro, m).coeffs).norm() > 0.01);

  CHECK(parse_data_kind(to_string(DataKind::ill_prepared)) == DataKind::ill_prepared);
  CHECK_THROWS_AS(parse_data_kind("random"), std::invalid_argument);
}

TEST_CASE("log-log slope of an exact power law") {
  const std::vector<double> x{0.2, 0.1, 0.05, 0.025};
  std::vector<double> y;
  for (double e : x) y.push_back(3.0 * std::pow(e, 0.5));
  CHECK(log_log_slope(x, y) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("convergence study preconditions") {
  const BasisPtr b = build_basis(2, 6);
  const SpatialGrid g = make_grid(2, 2);
  ConvergenceConfig cfg;
  cfg.eps_grid = {0.2, 0.1, 0.05};
  const BranchFit fit;
  CHECK_THROWS_AS(convergence_study(make_model(ModelKind::HydroBGK, b), g, cfg, fit), std::invalid_argument);
  cfg.eps_grid.push_back(0.025);
  CHECK_THROWS_AS(convergence_study(make_model(ModelKind::LinearRelaxation, b), g, cfg, fit), std::invalid_argument);
}
