#include "doctest.h"
#include "oracles.hpp"

#include "knudsenlab/evolution.hpp"
#include "knudsenlab/initial_data.hpp"

using namespace knudsenlab;

namespace {

const std::vector<ModelKind> kAll{ModelKind::HydroBGK, ModelKind::LinearRelaxation, ModelKind::FokkerPlanck,
                                  ModelKind::SemiClassical, ModelKind::BGKQuadratic};

int expected_kernel_dim(ModelKind k) {
  return k == ModelKind::HydroBGK || k == ModelKind::BGKQuadratic ? 4 : 1;
}

}  // namespace

TEST_CASE("model names round-trip") {
  for (ModelKind k : kAll) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_model_kind("Boltzmann"), std::invalid_argument);
}

TEST_CASE("pi_L is an orthogonal projector onto Ker(L) of the expected dimension") {
  const BasisPtr b = build_basis(2, 8);
  for (ModelKind k : kAll) {
    CAPTURE(to_string(k));
    const CollisionModel m = make_model(k, b);
    const RMat& P = m.projector;
    CHECK((P * P - P).norm() < 1e-12);
    CHECK((P - P.transpose()).norm() < 1e-13);
    CHECK(m.kernel.cols() == expected_kernel_dim(k));
    CHECK((m.collision * m.kernel).norm() < 1e-12);
    // L symmetric and nonpositive
    CHECK((m.collision - m.collision.transpose()).norm() < 1e-12);
    Eigen::SelfAdjointEigenSolver<RMat> es(m.collision);
    CHECK(es.eigenvalues().maxCoeff() < 1e-12);
  }
}

TEST_CASE("HydroBGK kernel spans 1, v and |v|^2 times M^{1/2}") {
  const BasisPtr b = build_basis(2, 6);
  const CollisionModel m = make_model(ModelKind::HydroBGK, b);
  const RVec energy = project_function(*b, [&](double v1, double v2) {
    const double s = std::exp(-(v1 * v1 + v2 * v2) / 4) / std::sqrt(2 * std::numbers::pi);
    return (v1 * v1 + v2 * v2) * s;
  });
  CHECK((m.projector * energy - energy).norm() < 1e-12);
  RVec cubic = RVec::Zero(b->size());
  cubic(b->flat({3, 0})) = 1.0;
  CHECK((m.projector * cubic).norm() < 1e-14);
}

TEST_CASE("BGK linearization agrees with the finite-difference oracle") {
  const BasisPtr b = build_basis(2, 10);
  const CollisionModel m = make_model(ModelKind::HydroBGK, b);
  const RVec g = oracle::smooth_velocity_vector(*b);
  const RVec fd = oracle::bgk_linear_fd(*b, g);
  CHECK((m.collision * g - fd).norm() <= 1e-6 * fd.norm());
}

TEST_CASE("BGK quadratic term agrees with the second-derivative oracle") {
  const BasisPtr b = build_basis(2, 10);
  const CollisionModel m = make_model(ModelKind::BGKQuadratic, b);
  for (double scale : {1.0, 0.3}) {
    const RVec g = oracle::smooth_velocity_vector(*b, scale);
    const RVec fd = oracle::bgk_gamma_fd(*b, g);
    const CVec gamma = apply_gamma_velocity(m, g.cast<cplx>(), g.cast<cplx>());
    CHECK(gamma.imag().norm() == 0.0);
    CHECK((gamma.real() - fd).norm() <= 1e-6 * fd.norm());
  }
}

TEST_CASE("semi-classical L and Gamma agree with derivatives of the nonlinear relaxation") {
  const BasisPtr b = build_basis(2, 10);
  for (SemiClassicalParams p : {SemiClassicalParams{0.5, 1.0}, SemiClassicalParams{1.0, 0.7}}) {
    CAPTURE(p.delta_q);
    const CollisionModel m = make_model(ModelKind::SemiClassical, b, p);
    const RVec g = oracle::smooth_velocity_vector(*b);
    CHECK(oracle::semiclassical_defect(*b, p, g, 0.0).norm() < 1e-13);  // f_inf is an equilibrium
    const RVec lin = oracle::semiclassical_linear_fd(*b, p, g);
    CHECK((m.collision * g - lin).norm() <= 1e-8 * lin.norm());
    const RVec fd = oracle::semiclassical_gamma_fd(*b, p, g);
    const CVec gamma = apply_gamma_velocity(m, g.cast<cplx>(), g.cast<cplx>());
    CHECK((gamma.real() - fd).norm() <= 1e-6 * fd.norm());
  }
}

TEST_CASE("Gamma is symmetric, bilinear and orthogonal to Ker(L)") {
  const BasisPtr b = build_basis(2, 8);
  for (ModelKind k : {ModelKind::SemiClassical, ModelKind::BGKQuadratic}) {
    CAPTURE(to_string(k));
    const CollisionModel m = make_model(k, b);
    const CVec g = oracle::smooth_velocity_vector(*b).cast<cplx>();
    CVec h = CVec::Zero(b->size());
    for (int s = 0; s < b->size(); ++s) h(s) = cplx(std::sin(0.7 * s), 0.2 * std::cos(s)) / (1.0 + b->degree(s));
    const CVec gh = apply_gamma_velocity(m, g, h);
    CHECK((gh - apply_gamma_velocity(m, h, g)).norm() < 1e-13 * gh.norm());
    const CVec lin = apply_gamma_velocity(m, g, 2.0 * h + g);
    CHECK((lin - 2.0 * gh - apply_gamma_velocity(m, g, g)).norm() < 1e-12 * lin.norm());
    CHECK((m.kernel.transpose().cast<cplx>() * gh).norm() < 1e-12 * gh.norm());
  }
  CHECK_THROWS_AS(apply_gamma_velocity(make_model(ModelKind::HydroBGK, b), CVec::Zero(b->size()), CVec::Zero(b->size())),
                  std::invalid_argument);
}

TEST_CASE("transport symbol is symmetric, so the transport generator is skew-Hermitian") {
  const BasisPtr b = build_basis(2, 8);
  const CollisionModel m = make_model(ModelKind::HydroBGK, b);
  const RMat t = transport_symbol(*b, {0.6, 0.8});
  CHECK((t - t.transpose()).norm() < 1e-14);
  const CMat a = mode_generator(m, {2, -1}, 0.3, true, false);
  CHECK((a + a.adjoint()).norm() < 1e-12);
}

TEST_CASE("mode generator null space: Ker(L) at n = 0, trivial at n != 0") {
  const BasisPtr b = build_basis(2, 8);
  for (ModelKind k : kAll) {
    CAPTURE(to_string(k));
    const CollisionModel m = make_model(k, b);
    CHECK(oracle::null_dimension(assemble_mode_generator(m, {0, 0}, 0.5)) == expected_kernel_dim(k));
    CHECK(oracle::null_dimension(assemble_mode_generator(m, {1, 0}, 0.5)) == 0);
    CHECK(oracle::null_dimension(assemble_mode_generator(m, {2, 3}, 0.1)) == 0);
  }
}

TEST_CASE("pseudo-spectral Gamma on a one-mode field times a constant field") {
  const BasisPtr b = build_basis(2, 6);
  const SpatialGrid grid = make_grid(2, 3);
  const CollisionModel m = make_model(ModelKind::BGKQuadratic, b);
  const RVec g = oracle::smooth_velocity_vector(*b, 0.5);
  const RVec h = oracle::smooth_velocity_vector(*b, -0.2);
  SpectralField fg = SpectralField::zeros(b, grid), fh = SpectralField::zeros(b, grid);
  fg.coeffs.col(grid.flat({1, 0})) = g.cast<cplx>();
  fh.coeffs.col(grid.zero_mode()) = h.cast<cplx>();
  const SpectralField out = apply_gamma(m, fg, fh);
  const CVec expect = apply_gamma_velocity(m, g.cast<cplx>(), h.cast<cplx>());
  CHECK((out.coeffs.col(grid.flat({1, 0})) - expect).norm() < 1e-13);
  CHECK(std::abs(out.coeffs.norm() - expect.norm()) < 1e-13);
}

TEST_CASE("hypothesis certification passes for every model at tol 1e-10") {
  const BasisPtr b = build_basis(2, 10);
  const SpatialGrid grid = make_grid(2, 10);
  for (ModelKind k : kAll) {
    CAPTURE(to_string(k));
    const CollisionModel m = make_model(k, b);
    const OperatorConstants c = constants_ledger(m, 2, &grid);
    const HypothesisReport r = verify_hypotheses(m, c, 1e-10);
    for (const auto& check : r.checks) {
      CAPTURE(check.name);
      CAPTURE(check.detail);
      CHECK(check.pass);
    }
    CHECK(r.find("H1.coercivity") != nullptr);
    CHECK(r.find("H5") != nullptr);
    if (m.has_gamma()) CHECK(r.find("Gamma.symmetry") != nullptr);
  }
}

TEST_CASE("exact constants for the BGK family") {
  const BasisPtr b = build_basis(2, 10);
  const SpatialGrid grid = make_grid(2, 10);
  const OperatorConstants c = constants_ledger(make_model(ModelKind::HydroBGK, b), 2, &grid);
  CHECK(c.lambda == 1.0);
  CHECK(c.CL == 1.0);
  CHECK(c.nu[0] == 1.0);
  CHECK(c.nu[3] == 1.0);
  CHECK(c.Cgamma == 0.0);
}

TEST_CASE("SemiClassical parameters are validated") {
  const BasisPtr b = build_basis(2, 4);
  CHECK_THROWS_AS(make_model(ModelKind::SemiClassical, b, {0.0, 1.0}), std::invalid_argument);
}
