#include "knudsenlab/operators.hpp"

#include "knudsenlab/fourier_grid.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace knudsenlab {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::LinearRelaxation: return "LinearRelaxation";
    case ModelKind::HydroBGK: return "HydroBGK";
    case ModelKind::FokkerPlanck: return "FokkerPlanck";
    case ModelKind::SemiClassical: return "SemiClassical";
    case ModelKind::BGKQuadratic: return "BGKQuadratic";
  }
  return "unknown";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto k : {ModelKind::LinearRelaxation, ModelKind::HydroBGK, ModelKind::FokkerPlanck, ModelKind::SemiClassical,
                 ModelKind::BGKQuadratic})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown model kind '" + name + "'");
}

namespace {

RMat hydro_kernel(const VelocityBasis& b) {
  const int N = b.dim_v;
  RMat k = RMat::Zero(b.size(), N + 2);
  k(b.flat({0, 0}), 0) = 1.0;
  for (int i = 0; i < N; ++i) {
    MultiIndex e{0, 0};
    e[static_cast<std::size_t>(i)] = 1;
    k(b.flat(e), 1 + i) = 1.0;
  }
  // (|v|^2 - N) / sqrt(2N) M^{1/2} = sum_i psi_{2 e_i} / sqrt(N)
  for (int i = 0; i < N; ++i) {
    MultiIndex e{0, 0};
    e[static_cast<std::size_t>(i)] = 2;
    k(b.flat(e), N + 1) = 1.0 / std::sqrt(static_cast<double>(N));
  }
  return k;
}

RMat unit_kernel(const VelocityBasis& b) {
  RMat k = RMat::Zero(b.size(), 1);
  k(0, 0) = 1.0;
  return k;
}

RMat bgk_moment_functionals(const VelocityBasis& b) {
  const int N = b.dim_v;
  RMat s = RMat::Zero(N + 2, b.size());
  s(0, b.flat({0, 0})) = 1.0;
  for (int i = 0; i < N; ++i) {
    MultiIndex e{0, 0};
    e[static_cast<std::size_t>(i)] = 1;
    s(1 + i, b.flat(e)) = 1.0;
  }
  // e = <|v|^2 M^{1/2}, h> = N rho + sqrt(2) sum_i c_{2 e_i}
  s(N + 1, b.flat({0, 0})) = N;
  for (int i = 0; i < N; ++i) {
    MultiIndex e{0, 0};
    e[static_cast<std::size_t>(i)] = 2;
    s(N + 1, b.flat(e)) = std::sqrt(2.0);
  }
  return s;
}

RVec bgk_quadratic_coeffs(const VelocityBasis& b, const RVec& mu) {
  const int N = b.dim_v;
  std::array<double, 2> m{0.0, 0.0};
  for (int i = 0; i < N; ++i) m[static_cast<std::size_t>(i)] = mu(1 + i);
  return b.forward_matrix * bgk_quadratic_nodes(b, mu(0), m, mu(N + 1));
}

}  // namespace

RVec bgk_quadratic_nodes(const VelocityBasis& basis, double rho, const std::array<double, 2>& m, double e) {
  const int N = basis.dim_v;
  const double Nd = N;
  const double m2 = m[0] * m[0] + m[1] * m[1];
  const double tau1 = (e - Nd * rho) / Nd;
  const double tau2 = (Nd * rho * rho - e * rho - m2) / Nd;
  RVec out(basis.num_nodes());
  for (int q = 0; q < basis.num_nodes(); ++q) {
    const auto& v = basis.nodes[static_cast<std::size_t>(q)];
    const double v2 = v[0] * v[0] + (N == 2 ? v[1] * v[1] : 0.0);
    const double vm = v[0] * m[0] + (N == 2 ? v[1] * m[1] : 0.0);
    const double phi1 = rho + vm + 0.5 * (v2 - Nd) * tau1;
    const double phi2 = -0.5 * rho * rho - 0.5 * Nd * (tau2 - 0.5 * tau1 * tau1) - 0.5 * v2 * (tau1 * tau1 - tau2) -
                        rho * vm - tau1 * vm - 0.5 * m2;
    out(q) = (phi2 + 0.5 * phi1 * phi1) * std::sqrt(basis.maxwellian(q));
  }
  return out;
}

CollisionModel make_model(ModelKind kind, BasisPtr basis, SemiClassicalParams params) {
  CollisionModel model;
  model.kind = kind;
  model.params = params;
  model.basis = basis;
  const VelocityBasis& b = *basis;
  const int n = b.size();
  const RMat eye = RMat::Identity(n, n);
  model.lambda_weights = RVec::Ones(n);

  switch (kind) {
    case ModelKind::HydroBGK:
    case ModelKind::BGKQuadratic: {
      model.kernel = hydro_kernel(b);
      model.projector = model.kernel * model.kernel.transpose();
      model.collision = model.projector - eye;
      model.compact = model.projector;
      break;
    }
    case ModelKind::LinearRelaxation: {
      model.kernel = unit_kernel(b);
      model.projector = model.kernel * model.kernel.transpose();
      model.collision = model.projector - eye;
      model.compact = model.projector;
      break;
    }
    case ModelKind::FokkerPlanck: {
      model.kernel = unit_kernel(b);
      model.projector = model.kernel * model.kernel.transpose();
      model.collision = RMat::Zero(n, n);
      for (int s = 0; s < n; ++s) {
        model.collision(s, s) = -static_cast<double>(b.degree(s));
        model.lambda_weights(s) = 1.0 + b.degree(s);
      }
      model.compact = model.projector;
      break;
    }
    case ModelKind::SemiClassical: {
      if (params.delta_q <= 0.0 || params.kappa_inf <= 0.0)
        throw std::invalid_argument("SemiClassical: delta_q and kappa_inf must be positive");
      const double dk = params.delta_q * params.kappa_inf;
      const RVec& M = b.maxwellian;
      // Discrete rho_inf so that the kernel function is exact on the truncated space.
      double rho_over_kappa = 0.0;
      for (int q = 0; q < b.num_nodes(); ++q) rho_over_kappa += b.node_weight(q) / (1.0 + dk * M(q));
      RVec nu_nodes(b.num_nodes()), r_nodes(b.num_nodes()), i1_nodes(b.num_nodes());
      for (int q = 0; q < b.num_nodes(); ++q) {
        nu_nodes(q) = rho_over_kappa * (1.0 + dk * M(q));
        r_nodes(q) = std::sqrt(M(q)) / (1.0 + dk * M(q));
        i1_nodes(q) = M(q) * r_nodes(q);
      }
      const RMat nu = multiplication_matrix(b, nu_nodes);
      const RVec r = b.forward_matrix * r_nodes;
      model.kernel = r / r.norm();
      model.projector = model.kernel * model.kernel.transpose();
      const RMat psi0 = unit_kernel(b);
      model.compact = psi0 * psi0.transpose();
      model.collision = model.compact - nu;
      model.gamma_functionals.resize(2, n);
      model.gamma_functionals.row(0) = (b.forward_matrix * i1_nodes).transpose();
      model.gamma_functionals.row(1) = r.transpose();
      model.gamma_weight = multiplication_matrix(b, M);
      model.gamma_scale = 0.5 * params.delta_q * std::sqrt(params.kappa_inf);
      break;
    }
  }
  model.kernel_dim = static_cast<int>(model.kernel.cols());
  model.lambda_op = model.compact - model.collision;

  if (kind == ModelKind::BGKQuadratic) {
    const RMat s = bgk_moment_functionals(b);
    const int m = static_cast<int>(s.rows());
    model.gamma_functionals = s;
    model.gamma_pairs = RMat::Zero(n, m * m);
    std::vector<RVec> diag(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) {
      RVec ea = RVec::Zero(m);
      ea(a) = 1.0;
      diag[static_cast<std::size_t>(a)] = bgk_quadratic_coeffs(b, ea);
      model.gamma_pairs.col(a * m + a) = diag[static_cast<std::size_t>(a)];
    }
    for (int a = 0; a < m; ++a)
      for (int c = a + 1; c < m; ++c) {
        RVec e = RVec::Zero(m);
        e(a) = 1.0;
        e(c) = 1.0;
        const RVec pair = 0.5 * (bgk_quadratic_coeffs(b, e) - diag[static_cast<std::size_t>(a)] - diag[static_cast<std::size_t>(c)]);
        model.gamma_pairs.col(a * m + c) = pair;
        model.gamma_pairs.col(c * m + a) = pair;
      }
  }
  return model;
}

RMat kernel_basis(const CollisionModel& model) { return model.kernel; }

SpectralField project_fluid(const SpectralField& h, const CollisionModel& model) {
  SpectralField out = h.like_zero();
  out.coeffs = model.projector.cast<cplx>() * h.coeffs;
  return out;
}

SpectralField apply_collision(const CollisionModel& model, const SpectralField& h) {
  SpectralField out = h.like_zero();
  out.coeffs = model.collision.cast<cplx>() * h.coeffs;
  return out;
}

SpectralField apply_transport(const SpectralField& h) {
  SpectralField out = h.like_zero();
  for (int axis = 0; axis < h.basis->dim_v; ++axis) {
    const auto dx = apply_spectral_operator(h, SpectralOp::ddx, axis);
    out.coeffs += apply_spectral_operator(dx.field, SpectralOp::mulv, axis).field.coeffs;
  }
  return out;
}

RMat transport_symbol(const VelocityBasis& basis, const std::array<double, 2>& omega) {
  RMat t = RMat::Zero(basis.size(), basis.size());
  for (int axis = 0; axis < basis.dim_v; ++axis) t += omega[static_cast<std::size_t>(axis)] * basis.mulv[static_cast<std::size_t>(axis)];
  return t;
}

CMat assemble_mode_generator(const CollisionModel& model, const Wavenumber& n, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("assemble_mode_generator: eps must be positive");
  const RMat vn = transport_symbol(*model.basis, {static_cast<double>(n[0]), static_cast<double>(n[1])});
  CMat a = (model.collision / (eps * eps)).cast<cplx>();
  a += cplx(0.0, -1.0 / eps) * vn.cast<cplx>();
  return a;
}

CVec apply_gamma_velocity(const CollisionModel& model, const CVec& g, const CVec& h) {
  if (!model.has_gamma()) throw std::invalid_argument("apply_gamma: model " + to_string(model.kind) + " has no bilinear term");
  const CMat s = model.gamma_functionals.cast<cplx>();
  if (model.kind == ModelKind::BGKQuadratic) {
    const CVec sg = s * g;
    const CVec sh = s * h;
    const Eigen::Index m = s.rows();
    CVec prod(m * m);
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index c = 0; c < m; ++c) prod(a * m + c) = sg(a) * sh(c);
    return model.gamma_pairs.cast<cplx>() * prod;
  }
  const CMat w = model.gamma_weight.cast<cplx>();
  const CVec sg = s * g;
  const CVec sh = s * h;
  const cplx i1g = sg(0), i2g = sg(1), i1h = sh(0), i2h = sh(1);
  return model.gamma_scale * (i1h * g + i1g * h - i2h * (w * g) - i2g * (w * h));
}

SpectralField apply_gamma(const CollisionModel& model, const SpectralField& g, const SpectralField& h) {
  if (!model.has_gamma()) throw std::invalid_argument("apply_gamma: model " + to_string(model.kind) + " has no bilinear term");
  const SpatialGrid& grid = g.grid;
  SpectralField out = g.like_zero();
  const CMat s = model.gamma_functionals.cast<cplx>();
  const bool same = &g == &h;

  if (model.kind == ModelKind::BGKQuadratic) {
    const CMat pg = to_physical_rows(grid, s * g.coeffs);
    const CMat ph = same ? pg : to_physical_rows(grid, s * h.coeffs);
    const Eigen::Index m = s.rows();
    CMat products(m * m, grid.phys_size());
    for (Eigen::Index a = 0; a < m; ++a)
      for (Eigen::Index c = 0; c < m; ++c) products.row(a * m + c) = pg.row(a).cwiseProduct(ph.row(c));
    out.coeffs = model.gamma_pairs.cast<cplx>() * to_modal_rows(grid, products);
    return out;
  }

  // Multiplication by M(v) commutes with x-products, so it is applied once after the transforms.
  const CMat sg = to_physical_rows(grid, s * g.coeffs);
  const CMat sh = same ? sg : to_physical_rows(grid, s * h.coeffs);
  const CMat gp = to_physical_rows(grid, g.coeffs);
  const CMat hp = same ? gp : to_physical_rows(grid, h.coeffs);
  const CMat first = gp * sh.row(0).asDiagonal() + hp * sg.row(0).asDiagonal();
  const CMat second = gp * sh.row(1).asDiagonal() + hp * sg.row(1).asDiagonal();
  const CMat weighted = model.gamma_weight * to_modal_rows(grid, second);
  out.coeffs = model.gamma_scale * (to_modal_rows(grid, first) - weighted);
  return out;
}

double max_generalized_eigenvalue(const RMat& A, const RMat& B) {
  Eigen::SelfAdjointEigenSolver<RMat> eb(sym(B));
  const double top = eb.eigenvalues().cwiseAbs().maxCoeff();
  std::vector<int> keep;
  for (int i = 0; i < eb.eigenvalues().size(); ++i)
    if (eb.eigenvalues()(i) > 1e-12 * std::max(top, 1.0)) keep.push_back(i);
  RMat t(B.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    t.col(static_cast<Eigen::Index>(c)) = eb.eigenvectors().col(keep[c]) / std::sqrt(eb.eigenvalues()(keep[c]));
  const RMat reduced = t.transpose() * sym(A) * t;
  Eigen::SelfAdjointEigenSolver<RMat> er(reduced, Eigen::EigenvaluesOnly);
  return er.eigenvalues().maxCoeff();
}

double min_generalized_eigenvalue(const RMat& A, const RMat& B) { return -max_generalized_eigenvalue(-A, B); }

}  // namespace knudsenlab
