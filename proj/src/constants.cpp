#include "knudsenlab/operators.hpp"

#include "knudsenlab/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace knudsenlab {

namespace {

double lambda_max(const RMat& a) {
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double op_norm(const RMat& a) {
  Eigen::JacobiSVD<RMat> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

// Gram matrix of sum_{|j| = m} |D^j h|^2.
RMat level_gram(const VelocityBasis& b, int m) {
  RMat g = RMat::Zero(b.size(), b.size());
  for (const auto& j : multi_indices_upto(b.dim_v, m)) {
    if (abs_degree(j) != m) continue;
    const RMat d = velocity_derivative(b, j);
    g += d.transpose() * d;
  }
  return g;
}

RMat cumulative_gram(const VelocityBasis& b, int m) {
  RMat g = RMat::Zero(b.size(), b.size());
  for (int p = 0; p <= m; ++p) g += level_gram(b, p);
  return g;
}

std::vector<MultiIndex> velocity_indices(int dim, int lo, int hi) {
  std::vector<MultiIndex> out;
  for (const auto& j : multi_indices_upto(dim, hi))
    if (abs_degree(j) >= lo) out.push_back(j);
  return out;
}

// sum_{|l| <= k} |n^l|^2 on the Fourier side.
double sobolev_weight_sq(const Wavenumber& n, int dim, int k) {
  double s = 0.0;
  for (const auto& l : multi_indices_upto(dim, k)) s += std::norm(fourier_symbol(n, l, dim));
  return s;
}

RMat sqrt_inv_diag(const RVec& w) { return w.cwiseSqrt().cwiseInverse().asDiagonal(); }

// Velocity part of the bilinear bound: sqrt(sum_j c_j^2) with c_j bounding |D^j Gamma(g,h)| / (|g||h|)
// through the separable structure of the model.
double gamma_velocity_bound(const CollisionModel& model, int k) {
  const VelocityBasis& b = *model.basis;
  double total = 0.0;
  if (model.kind == ModelKind::BGKQuadratic) {
    const auto m = model.gamma_functionals.rows();
    for (const auto& j : multi_indices_upto(b.dim_v, k)) {
      const RMat d = velocity_derivative(b, j);
      double cj = 0.0;
      for (Eigen::Index a = 0; a < m; ++a)
        for (Eigen::Index c = 0; c < m; ++c)
          cj += (d * model.gamma_pairs.col(a * m + c)).norm() * model.gamma_functionals.row(a).norm() *
                model.gamma_functionals.row(c).norm();
      total += cj * cj;
    }
  } else if (model.kind == ModelKind::SemiClassical) {
    double cw = 0.0;
    for (const auto& j : multi_indices_upto(b.dim_v, k)) {
      const double nj = op_norm(velocity_derivative(b, j) * model.gamma_weight);
      cw += nj * nj;
    }
    const double s1 = model.gamma_functionals.row(0).norm();
    const double s2 = model.gamma_functionals.row(1).norm();
    total = std::pow(model.gamma_scale * (s1 + s2 * std::sqrt(cw)), 2);
  }
  return std::sqrt(total);
}

}  // namespace

double discrete_algebra_constant(const SpatialGrid& grid, int k, int k_low) {
  double worst = 0.0;
  for (int a = 0; a < grid.modes(); ++a) {
    const Wavenumber n = grid.wavenumber(a);
    const double wn = sobolev_weight_sq(n, grid.dim_x, k_low);
    double s = 0.0;
    for (int c = 0; c < grid.modes(); ++c) {
      const Wavenumber m = grid.wavenumber(c);
      const Wavenumber r{n[0] - m[0], n[1] - m[1]};
      if (!grid.contains(r)) continue;
      s += wn / (sobolev_weight_sq(m, grid.dim_x, k) * sobolev_weight_sq(r, grid.dim_x, k_low));
    }
    worst = std::max(worst, s);
  }
  return std::sqrt(worst);
}

double gamma_constant(const CollisionModel& model, int k, const SpatialGrid& grid) {
  if (!model.has_gamma()) return 0.0;
  double algebra = 0.0;
  for (int kl = 0; kl <= k; ++kl) algebra = std::max(algebra, discrete_algebra_constant(grid, k, kl));
  // G <= Cv * A * |g|_{H^k} |h|_{H^k} and the bound is C_Gamma (|g| |h|_Lambda + |h| |g|_Lambda).
  return 0.5 * gamma_velocity_bound(model, k) * algebra;
}

OperatorConstants constants_ledger(const CollisionModel& model, int k_max, const SpatialGrid* gamma_grid,
                                   std::uint64_t /*seed*/) {
  if (k_max < 1) throw std::invalid_argument("constants_ledger: k_max must be >= 1");
  const VelocityBasis& b = *model.basis;
  const int n = b.size();
  const RMat W = model.lambda_weights.asDiagonal();
  const RMat Winv_half = sqrt_inv_diag(model.lambda_weights);
  const RMat& Lam = model.lambda_op;
  const RMat& L = model.collision;
  const RMat& K = model.compact;
  const RMat eye = RMat::Identity(n, n);
  const RMat perp = eye - model.projector;
  OperatorConstants c;
  c.k0 = b.dim_v;

  const bool unit = model.kind == ModelKind::HydroBGK || model.kind == ModelKind::BGKQuadratic ||
                    model.kind == ModelKind::LinearRelaxation;

  // (H3): <Lh,h> <= -lambda |h_perp|_Lambda^2
  c.lambda = min_generalized_eigenvalue(-perp * sym(L) * perp, perp * W * perp);
  // (H1) coercivity of Lambda
  c.nu[1] = min_generalized_eigenvalue(Lam, W);
  c.nu[2] = max_generalized_eigenvalue(Lam, W);
  c.nu[0] = c.nu[1] * model.lambda_weights.minCoeff();
  // (H1) defect for one v-derivative
  RMat M1 = RMat::Zero(n, n), M2 = RMat::Zero(n, n);
  for (int i = 0; i < b.dim_v; ++i) {
    const RMat& d = b.ddv[static_cast<std::size_t>(i)];
    M1 += sym(Lam * d.transpose() * d);
    M2 += d.transpose() * W * d;
  }
  c.nu[3] = min_generalized_eigenvalue(M1, M2);
  c.nu[4] = std::max(0.0, max_generalized_eigenvalue(c.nu[3] * M2 - M1, W));
  // (H1') for 1 <= |j| <= k_max
  c.nu[5] = c.nu[3];
  for (const auto& j : velocity_indices(b.dim_v, 1, k_max)) {
    const RMat d = velocity_derivative(b, j);
    c.nu[5] = std::min(c.nu[5], min_generalized_eigenvalue(sym(Lam * d.transpose() * d), d.transpose() * W * d));
  }
  // A nonpositive ratio at higher levels is absorbed by nu_6.
  if (c.nu[5] <= 0.0) c.nu[5] = c.nu[3];
  c.nu[6] = 0.0;
  for (const auto& j : velocity_indices(b.dim_v, 1, k_max)) {
    const RMat d = velocity_derivative(b, j);
    const RMat gap = c.nu[5] * d.transpose() * W * d - sym(Lam * d.transpose() * d);
    c.nu[6] = std::max(c.nu[6], max_generalized_eigenvalue(gap, cumulative_gram(b, abs_degree(j) - 1)));
  }
  c.CL = op_norm(Winv_half * L * Winv_half);
  c.Cp = 1.0;

  if (unit) {
    c.lambda = 1.0;
    c.nu = {1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0};
    c.CL = 1.0;
  }

  // C_{pi k}: continuity of pi_L on H^k and the derivative control on the fluid part.
  c.Cpi.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
  const RMat& P = model.projector;
  const int probe = 6;
  for (int k = 0; k <= k_max; ++k) {
    double ck = 1.0;
    for (int n0 = 0; n0 <= probe; ++n0)
      for (int n1 = 0; n1 <= (b.dim_v == 2 ? n0 : 0); ++n1) {
        RMat g = RMat::Zero(n, n);
        for (int m = 0; m <= k; ++m) g += sobolev_weight_sq({n0, n1}, b.dim_v, k - m) * level_gram(b, m);
        ck = std::max(ck, max_generalized_eigenvalue(P.transpose() * g * P, g));
      }
    for (const auto& j : multi_indices_upto(b.dim_v, k)) {
      const RMat dk = velocity_derivative(b, j) * model.kernel;
      ck = std::max(ck, std::pow(op_norm(dk), 2));
    }
    c.Cpi[static_cast<std::size_t>(k)] = ck;
  }
  c.Cpi_fluid = lambda_max(P * W * P);

  // (H2) table
  RMat dkd = RMat::Zero(n, n), dd = RMat::Zero(n, n);
  for (int i = 0; i < b.dim_v; ++i) {
    const RMat& d = b.ddv[static_cast<std::size_t>(i)];
    dkd += sym(K.transpose() * d.transpose() * d);
    dd += d.transpose() * d;
  }
  auto c_delta = [&](double delta) { return std::max(lambda_max(dkd - delta * dd), 1e-300); };
  for (double delta : {0.01, 0.05, 0.1, 0.2, 0.5, 1.0}) c.CdeltaTable[delta] = c_delta(delta);
  c.delta_dv = c.nu[0] * c.nu[3] / (6.0 * c.nu[1]);
  c.C_delta_dv = c_delta(c.delta_dv);
  c.CdeltaTable[c.delta_dv] = c.C_delta_dv;
  // (H2') at delta_dv per level
  c.C_delta_level.assign(static_cast<std::size_t>(k_max), 0.0);
  for (int k = 1; k <= k_max; ++k) {
    double worst = 0.0;
    for (const auto& j : velocity_indices(b.dim_v, 1, k)) {
      const RMat d = velocity_derivative(b, j);
      const RMat form = sym(K.transpose() * d.transpose() * d) - c.delta_dv * d.transpose() * d;
      worst = std::max(worst, max_generalized_eigenvalue(form, cumulative_gram(b, abs_degree(j) - 1)));
    }
    c.C_delta_level[static_cast<std::size_t>(k - 1)] = std::max(worst, 1e-300);
  }

  if (model.has_gamma()) {
    c.Cgamma_velocity = 0.5 * gamma_velocity_bound(model, k_max);
    if (gamma_grid) {
      c.algebra_constant = 0.0;
      for (int kl = 0; kl <= k_max; ++kl)
        c.algebra_constant = std::max(c.algebra_constant, discrete_algebra_constant(*gamma_grid, k_max, kl));
      c.Cgamma = c.Cgamma_velocity * c.algebra_constant;
    } else {
      c.Cgamma = c.Cgamma_velocity;
    }
  }
  return c;
}

bool HypothesisReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.pass; });
}

const HypothesisCheck* HypothesisReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

HypothesisReport verify_hypotheses(const CollisionModel& model, const OperatorConstants& c, double tol,
                                   std::uint64_t seed) {
  const VelocityBasis& b = *model.basis;
  const int n = b.size();
  const int k_max = std::max<int>(1, static_cast<int>(c.Cpi.size()) - 1);
  const RMat W = model.lambda_weights.asDiagonal();
  const RMat& Lam = model.lambda_op;
  const RMat& L = model.collision;
  const RMat& K = model.compact;
  const RMat eye = RMat::Identity(n, n);
  const RMat perp = eye - model.projector;
  HypothesisReport report;
  auto add = [&](const std::string& name, double witness, double scale, const std::string& detail = "") {
    report.checks.push_back({name, witness <= tol * std::max(1.0, scale), witness, detail});
  };

  add("H1.self_adjoint", (L - L.transpose()).cwiseAbs().maxCoeff(), 1.0);
  add("H1.splitting", (K - Lam - L).cwiseAbs().maxCoeff(), 1.0);
  {
    const double w0 = lambda_max(c.nu[0] * eye - c.nu[1] * W);
    const double w1 = lambda_max(c.nu[1] * W - sym(Lam));
    const double w2 = lambda_max(sym(Lam) - c.nu[2] * W);
    const bool positive = c.nu[0] > 0 && c.nu[1] > 0 && c.nu[2] > 0;
    add("H1.coercivity", positive ? std::max({w0, w1, w2}) : 1.0, W.maxCoeff());
  }
  {
    RMat M1 = RMat::Zero(n, n), M2 = RMat::Zero(n, n);
    for (int i = 0; i < b.dim_v; ++i) {
      const RMat& d = b.ddv[static_cast<std::size_t>(i)];
      M1 += sym(Lam * d.transpose() * d);
      M2 += d.transpose() * W * d;
    }
    const double w = lambda_max(c.nu[3] * M2 - c.nu[4] * W - M1);
    add("H1.v_derivative", c.nu[3] > 0 ? w : 1.0, M2.cwiseAbs().maxCoeff());
  }
  {
    const RMat wi = sqrt_inv_diag(model.lambda_weights);
    add("H1.CL", op_norm(wi * L * wi) - c.CL, c.CL);
  }
  {
    double worst = -1e300;
    for (const auto& j : velocity_indices(b.dim_v, 1, k_max)) {
      const RMat d = velocity_derivative(b, j);
      const RMat dwd = d.transpose() * W * d;
      const RMat form = c.nu[5] * dwd - c.nu[6] * cumulative_gram(b, abs_degree(j) - 1) - sym(Lam * d.transpose() * d);
      worst = std::max(worst, lambda_max(form) / std::max(1.0, dwd.cwiseAbs().maxCoeff()));
    }
    add("H1'", c.nu[5] > 0 ? worst : 1.0, 1.0);
  }
  {
    RMat dkd = RMat::Zero(n, n), dd = RMat::Zero(n, n);
    for (int i = 0; i < b.dim_v; ++i) {
      const RMat& d = b.ddv[static_cast<std::size_t>(i)];
      dkd += sym(K.transpose() * d.transpose() * d);
      dd += d.transpose() * d;
    }
    double worst = -1e300;
    for (const auto& [delta, cd] : c.CdeltaTable)
      worst = std::max(worst, lambda_max(dkd - cd * eye - delta * dd) / std::max(1.0, dd.cwiseAbs().maxCoeff()));
    add("H2", worst, 1.0);
  }
  {
    double worst = -1e300;
    for (int k = 1; k <= static_cast<int>(c.C_delta_level.size()); ++k)
      for (const auto& j : velocity_indices(b.dim_v, 1, k)) {
        const RMat d = velocity_derivative(b, j);
        const RMat dtd = d.transpose() * d;
        const RMat form = sym(K.transpose() * dtd) - c.C_delta_level[static_cast<std::size_t>(k - 1)] *
                                                         cumulative_gram(b, abs_degree(j) - 1) -
                          c.delta_dv * dtd;
        worst = std::max(worst, lambda_max(form) / std::max(1.0, dtd.cwiseAbs().maxCoeff()));
      }
    add("H2'", worst, 1.0);
  }
  {
    const RMat gram = model.kernel.transpose() * model.kernel;
    const double ortho = (gram - RMat::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
    const double null = (L * model.kernel).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<RMat> es(sym(L), Eigen::EigenvaluesOnly);
    int zero = 0;
    for (int i = 0; i < n; ++i)
      if (std::abs(es.eigenvalues()(i)) <= 1e-8) ++zero;
    std::ostringstream detail;
    detail << "kernel dimension " << zero;
    const bool dim_ok = zero == model.kernel_dim;
    add("H3.kernel", dim_ok ? std::max(ortho, null) : 1.0, 1.0, detail.str());
    add("H3.coercivity", lambda_max(perp * sym(L) * perp + c.lambda * perp * W * perp), W.maxCoeff());
  }

  if (!model.has_gamma()) {
    report.checks.push_back({"H4", true, 0.0, "no bilinear term"});
    report.checks.push_back({"H5", true, 0.0, "no bilinear term"});
    return report;
  }

  Lcg64 rng(seed);
  auto random_vec = [&]() {
    CVec v(n);
    for (int i = 0; i < n; ++i) v(i) = cplx(rng.symmetric(), 0.0) / (1.0 + b.degree(i));
    return v;
  };
  double h5 = 0.0, symmetry = 0.0, h4 = -1e300;
  for (int trial = 0; trial < 20; ++trial) {
    const CVec g = random_vec();
    const CVec h = random_vec();
    const CVec gh = apply_gamma_velocity(model, g, h);
    const CVec hg = apply_gamma_velocity(model, h, g);
    const double scale = std::max(1.0, g.norm() * h.norm());
    h5 = std::max(h5, (model.kernel.transpose().cast<cplx>() * gh).cwiseAbs().maxCoeff() / scale);
    symmetry = std::max(symmetry, (gh - hg).norm() / scale);
    // Dual Lambda-norm of D^j Gamma summed over |j| <= k_max against the (H4) bound.
    double g_exact = 0.0, hk_g = 0.0, hk_h = 0.0, hkl_g = 0.0, hkl_h = 0.0;
    for (const auto& j : multi_indices_upto(b.dim_v, k_max)) {
      const CMat d = velocity_derivative(b, j).cast<cplx>();
      g_exact += (sqrt_inv_diag(model.lambda_weights).cast<cplx>() * d * gh).squaredNorm();
      hk_g += (d * g).squaredNorm();
      hk_h += (d * h).squaredNorm();
      hkl_g += (model.lambda_weights.cwiseSqrt().cast<cplx>().asDiagonal() * (d * g)).squaredNorm();
      hkl_h += (model.lambda_weights.cwiseSqrt().cast<cplx>().asDiagonal() * (d * h)).squaredNorm();
    }
    const double bound = c.Cgamma * (std::sqrt(hk_g * hkl_h) + std::sqrt(hk_h * hkl_g));
    h4 = std::max(h4, (std::sqrt(g_exact) - bound) / scale);
  }
  add("H4", c.Cgamma > 0 ? h4 : 1.0, 1.0);
  add("H5", h5, 1.0);
  add("Gamma.symmetry", symmetry, 1.0);
  return report;
}

}  // namespace knudsenlab
