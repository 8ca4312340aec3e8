#include "doctest.h"

#include "knudsenlab/evolution.hpp"
#include "knudsenlab/fourier_grid.hpp"
#include "knudsenlab/initial_data.hpp"
#include "knudsenlab/operators.hpp"

#include <cmath>
#include <numbers>

using namespace knudsenlab;

TEST_CASE("Gauss-Hermite rule integrates polynomials against M exactly") {
  std::vector<double> x, w;
  gauss_hermite_probabilists(11, x, w);
  double s0 = 0, s2 = 0, s4 = 0, s20 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s0 += w[i];
    s2 += w[i] * x[i] * x[i];
    s4 += w[i] * std::pow(x[i], 4);
    s20 += w[i] * std::pow(x[i], 20);
  }
  CHECK(s0 == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(s2 == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(s4 == doctest::Approx(3.0).epsilon(1e-13));
  // (2m-1)!! for m = 10, degree 20 <= 2 * 11 - 1
  CHECK(s20 == doctest::Approx(654729075.0).epsilon(1e-11));
}

TEST_CASE("normalized Hermite values match the closed forms") {
  const double x = 0.7;
  const auto p = normalized_hermite(4, x);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(x));
  CHECK(p[2] == doctest::Approx((x * x - 1) / std::sqrt(2.0)));
  CHECK(p[3] == doctest::Approx((x * x * x - 3 * x) / std::sqrt(6.0)));
  CHECK(p[4] == doctest::Approx((std::pow(x, 4) - 6 * x * x + 3) / std::sqrt(24.0)));
}

TEST_CASE("tensor basis: size, orthonormality, square transforms") {
  const BasisPtr b = build_basis(2, 10);
  CHECK(b->size() == 121);
  CHECK(b->num_nodes() == 121);
  // forward * inverse is the identity on coefficients
  const RMat fi = b->forward_matrix * b->inverse_matrix;
  CHECK((fi - RMat::Identity(b->size(), b->size())).norm() < 1e-12);
  // Gram matrix of p_alpha under the node weights
  RMat gram = b->poly_at_nodes * b->node_weight.asDiagonal() * b->poly_at_nodes.transpose();
  CHECK((gram - RMat::Identity(b->size(), b->size())).norm() < 1e-11);
}

TEST_CASE("velocity ladders: v is symmetric, d/dv is skew on the Hermite functions") {
  const BasisPtr b = build_basis(2, 8);
  for (int axis = 0; axis < 2; ++axis) {
    CHECK((b->mulv[axis] - b->mulv[axis].transpose()).norm() < 1e-14);
    CHECK((b->ddv[axis] + b->ddv[axis].transpose()).norm() < 1e-14);
  }
  // v psi_0 = psi_{e_1}
  RVec e0 = RVec::Zero(b->size());
  e0(b->flat({0, 0})) = 1.0;
  const RVec v0 = b->mulv[0] * e0;
  CHECK(v0(b->flat({1, 0})) == doctest::Approx(1.0));
  CHECK(v0.norm() == doctest::Approx(1.0));
  // psi_0 = M^{1/2} and d/dv M^{1/2} = -(v/2) M^{1/2}
  const RVec d0 = b->ddv[0] * e0;
  CHECK(d0(b->flat({1, 0})) == doctest::Approx(-0.5));
}

TEST_CASE("project_function recovers Hermite coefficients of M^{1/2} times a polynomial") {
  const BasisPtr b = build_basis(2, 10);
  const RVec c = project_function(*b, [](double v1, double v2) {
    const double m = std::exp(-(v1 * v1 + v2 * v2) / 4) / std::sqrt(2 * std::numbers::pi);
    return (v1 * v2 + 2.0) * m;
  });
  RVec expect = RVec::Zero(b->size());
  expect(b->flat({0, 0})) = 2.0;
  expect(b->flat({1, 1})) = 1.0;
  CHECK((c - expect).norm() < 1e-12);
}

TEST_CASE("Fourier grid: round trip and the dealiased product") {
  const SpatialGrid g = make_grid(2, 4);
  CHECK(g.side() == 9);
  CHECK(g.modes() == 81);
  CHECK(g.n_phys >= 3 * g.Mx + 1);
  CVec a = CVec::Zero(g.modes()), b = CVec::Zero(g.modes());
  a(g.flat({1, 0})) = 0.5;
  a(g.flat({-1, 0})) = 0.5;  // cos x
  b(g.flat({0, 2})) = cplx(0, -0.5);
  b(g.flat({0, -2})) = cplx(0, 0.5);  // sin 2y
  const CVec back = to_modal(g, to_physical(g, a));
  CHECK((back - a).norm() < 1e-14);
  const CVec p = product(g, a, b);  // cos x sin 2y = (sin(x+2y) - sin(x-2y)) / 2
  CVec expect = CVec::Zero(g.modes());
  expect(g.flat({1, 2})) = cplx(0, -0.25);
  expect(g.flat({-1, -2})) = cplx(0, 0.25);
  expect(g.flat({1, -2})) = cplx(0, 0.25);
  expect(g.flat({-1, 2})) = cplx(0, -0.25);
  CHECK((p - expect).norm() < 1e-14);
}

TEST_CASE("Parseval: the L2 norm is the Euclidean norm of the coefficients") {
  const BasisPtr b = build_basis(2, 6);
  const SpatialGrid g = make_grid(2, 3);
  const CollisionModel m = make_model(ModelKind::HydroBGK, b);
  const SpectralField h = random_field(m, g, 3, 2.5, 2);
  CHECK(std::sqrt(norm_squared(h, NormKind::L2)) == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(norm_squared(h, NormKind::L2) == doctest::Approx(h.coeffs.squaredNorm()).epsilon(1e-14));
  CHECK(reality_defect(h) < 1e-14);
}

TEST_CASE("H^k norm weights: one Fourier mode times psi_0") {
  const BasisPtr b = build_basis(2, 4);
  const SpatialGrid g = make_grid(2, 3);
  SpectralField h = SpectralField::zeros(b, g);
  h.at({2, 1}, {0, 0}) = 1.0;
  // sum over |l| <= 1 of |n^l|^2 = 1 + 4 + 1
  CHECK(hkx_l2_norm_squared(h, 1) == doctest::Approx(6.0));
  // degree-two x-derivatives add 16 + 4 + 1
  CHECK(hkx_l2_norm_squared(h, 2) == doctest::Approx(27.0));
  // |d/dv_i psi_0|^2 = 1/4 per axis
  CHECK(norm_squared(h, NormKind::Hk, 1) == doctest::Approx(6.5));
  CHECK(norm_squared(h, NormKind::Hk_eps, 1, 0.1) == doctest::Approx(6.0 + 0.01 * 0.5));
}

TEST_CASE("ddx multiplies by i n") {
  const BasisPtr b = build_basis(2, 3);
  const SpatialGrid g = make_grid(2, 2);
  SpectralField h = SpectralField::zeros(b, g);
  h.at({2, -1}, {1, 0}) = 1.0;
  const OperatorResult r = apply_spectral_operator(h, SpectralOp::ddx, 1);
  CHECK(std::abs(r.field.at({2, -1}, {1, 0}) - cplx(0, -1)) < 1e-15);
  CHECK(r.dropped_mass == 0.0);
}

TEST_CASE("mulv at the top order reports the dropped mass") {
  const BasisPtr b = build_basis(2, 3);
  const SpatialGrid g = make_grid(2, 1);
  SpectralField h = SpectralField::zeros(b, g);
  h.at({0, 0}, {3, 0}) = 1.0;
  const OperatorResult r = apply_spectral_operator(h, SpectralOp::mulv, 0);
  // v psi_3 = sqrt(3) psi_2 + sqrt(4) psi_4; psi_4 is above the order
  CHECK(r.dropped_mass == doctest::Approx(4.0));
  CHECK(std::abs(r.field.at({0, 0}, {2, 0})) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("bad shapes are rejected") {
  const BasisPtr b = build_basis(2, 3);
  CHECK_THROWS_AS(velocity_transform(RVec(RVec::Zero(3)), *b, Direction::forward), std::invalid_argument);
}
