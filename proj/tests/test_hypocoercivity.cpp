#include "doctest.h"

#include "knudsenlab/evolution.hpp"
#include "knudsenlab/hypocoercivity.hpp"
#include "knudsenlab/initial_data.hpp"

#include <cmath>

using namespace knudsenlab;

namespace {

struct Fixture {
  BasisPtr basis = build_basis(2, 8);
  SpatialGrid grid = make_grid(2, 4);
  CollisionModel model = make_model(ModelKind::HydroBGK, basis);
  OperatorConstants constants = constants_ledger(model, 2, &grid);
};

}  // namespace

TEST_CASE("level-one coefficients for the BGK ledger") {
  const Fixture f;
  const HypNormCoefficients c = build_h1_coefficients(f.constants);
  // minimal b with -nu_3 b < -1 is anything above 1; doubled
  CHECK(c.h1.b == 2.0);
  CHECK(c.h1.a * c.h1.a <= c.h1.alpha * c.h1.b);
  CHECK(c.h1.b <= c.h1.alpha);
  for (double cond : c.h1_conditions) CHECK(cond <= -1.0 + 1e-12);
  CHECK(c.eps_max == 1.0);
}

TEST_CASE("k = 1 reduces to the level-one construction") {
  const Fixture f;
  const HypNormCoefficients a = build_h1_coefficients(f.constants);
  const HypNormCoefficients b = build_hk_coefficients(f.constants, 1, NormVariant::standard);
  CHECK(a.h1.A == b.h1.A);
  CHECK(a.h1.alpha == b.h1.alpha);
  CHECK(a.h1.b == b.h1.b);
  CHECK(a.h1.a == b.h1.a);
  CHECK(a.h1.e == b.h1.e);
  CHECK(a.eps_max == b.eps_max);
  CHECK(b.hk_blocks.empty());
}

TEST_CASE("level two: B = 2 / nu_5 and eps_max from the closing condition") {
  const Fixture f;
  const HypNormCoefficients c = build_hk_coefficients(f.constants, 2, NormVariant::standard);
  REQUIRE(c.hk_blocks.size() == 1);
  CHECK(c.hk_blocks[0].B == doctest::Approx(2.0 / f.constants.nu[5]));
  CHECK(c.hk_blocks[0].B == doctest::Approx(2.0));
  // min{1, sqrt((nu_5 nu_0)^2 / (6 N nu_1^2))} with every nu equal to 1 and N = 2
  CHECK(c.eps_max == doctest::Approx(std::sqrt(1.0 / 12.0)).epsilon(1e-15));
  for (double C : c.combo) CHECK(C > 0.0);
  CHECK(c.K0 > 0.0);
}

TEST_CASE("level-one sandwich bounds hold on random fields") {
  const Fixture f;
  const HypNormCoefficients c = build_h1_coefficients(f.constants);
  const HypNormEvaluator F(c, f.model);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SpectralField h = random_field(f.model, f.grid, seed, 1.0, 3);
    for (double eps : {1.0, 0.4, 0.05}) {
      const double l2 = norm_squared(h, NormKind::L2);
      const double gx = hkx_l2_norm_squared(h, 1) - l2;
      const double gv = norm_squared(h, NormKind::Hk, 1) - l2 - gx;
      const double mixed = gx + eps * eps * gv;
      const double value = F(h, eps);
      CHECK(value >= c.h1.A * l2 + 0.5 * c.h1.b * mixed - 1e-10 * value);
      CHECK(value <= c.h1.A * l2 + 1.5 * c.h1.alpha * mixed + 1e-10 * value);
      CHECK(value == doctest::Approx(eval_hyp_norm(h, c, eps, f.model)).epsilon(1e-12));
    }
  }
}

TEST_CASE("the evaluator rejects eps above eps_max") {
  const Fixture f;
  const HypNormCoefficients c = build_hk_coefficients(f.constants, 2, NormVariant::standard);
  const HypNormEvaluator F(c, f.model);
  const SpectralField h = random_field(f.model, f.grid, 1, 1.0, 2);
  CHECK_THROWS_AS(F(h, 0.5), std::invalid_argument);
  CHECK_NOTHROW(F(h, 0.25));
}

TEST_CASE("mode matrices are Hermitian and positive definite") {
  const Fixture f;
  for (NormVariant v : {NormVariant::standard, NormVariant::perp}) {
    const HypNormEvaluator F(build_hk_coefficients(f.constants, 2, v), f.model);
    const CMat m = F.mode_matrix({1, -2}, 0.2);
    CHECK((m - m.adjoint()).norm() < 1e-10 * m.norm());
    Eigen::SelfAdjointEigenSolver<CMat> es(m);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("perp equivalence constants do not depend on eps") {
  const Fixture f;
  const HypNormCoefficients c = build_hk_coefficients(f.constants, 1, NormVariant::perp);
  const EquivalenceBounds a = equivalence_constants(c, f.model, f.grid, 1.0);
  const EquivalenceBounds b = equivalence_constants(c, f.model, f.grid, 0.05);
  CHECK(a.lower > 0.0);
  CHECK(a.upper >= a.lower);
  CHECK(b.lower == doctest::Approx(a.lower).epsilon(0.05));
  CHECK(b.upper == doctest::Approx(a.upper).epsilon(0.05));
}

TEST_CASE("E functional") {
  TrajectoryRecord r;
  const int n = 20001;
  for (int i = 0; i < n; ++i) {
    const double t = 20.0 * i / (n - 1);
    r.times.push_back(t);
  }
  SUBCASE("both norms squared equal exp(-2t): the sup is attained at t = 0") {
    for (double t : r.times) {
      r.norms["HypEps"].push_back(std::exp(-t));
      r.norms["HkLambda"].push_back(std::exp(-t));
    }
    CHECK(eval_E_functional(r) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant functional, dissipation exp(-2t): 1 + 1/2") {
    for (double t : r.times) {
      r.norms["HypEps"].push_back(1.0);
      r.norms["HkLambda"].push_back(std::exp(-t));
    }
    CHECK(eval_E_functional(r) == doctest::Approx(1.5).epsilon(1e-6));
  }
  CHECK_THROWS(eval_E_functional(TrajectoryRecord{}));
}

TEST_CASE("dissipation monitor needs three samples") {
  const Fixture f;
  const HypNormCoefficients c = build_h1_coefficients(f.constants);
  TrajectoryRecord r;
  r.times = {0.0, 0.1};
  for (const char* key : {"HypEps", "Hk", "HkLambda", "L2"}) r.norms[key] = {1.0, 0.9};
  CHECK_THROWS_AS(dissipation_monitor(r, c, f.constants), std::invalid_argument);
}

TEST_CASE("linear runs: the functional is nonincreasing and the monitor is silent") {
  const Fixture f;
  const OperatorConstants k1 = constants_ledger(f.model, 1, &f.grid);
  IntegratorConfig cfg;
  cfg.t_end = 1.0;
  cfg.dt = 0.01;
  cfg.hyp_standard = build_hk_coefficients(k1, 1, NormVariant::standard);
  cfg.hyp_perp = build_hk_coefficients(k1, 1, NormVariant::perp);
  const SpectralField h = random_field(f.model, f.grid, 5, 1.0, 3);
  for (double eps : {1.0, 0.2}) {
    const TrajectoryRecord r = propagate(h, f.model, eps, cfg);
    const auto& F = r.norm("HypEps");
    for (std::size_t i = 1; i < F.size(); ++i) CHECK(F[i] <= F[i - 1] * (1.0 + 1e-10));
    const DissipationReport d = dissipation_monitor(r, *cfg.hyp_standard, k1);
    CHECK(d.pass());
    CHECK(d.identity_pass);
    for (double g : d.gamma_controls) CHECK(g == 0.0);
  }
}
