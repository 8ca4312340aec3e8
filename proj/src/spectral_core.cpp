#include "knudsenlab/spectral_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace knudsenlab {

void gauss_hermite_probabilists(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_probabilists: n must be positive");
  // Jacobi matrix of the monic recurrence He_{k+1} = x He_k - k He_{k-1}.
  RMat jacobi = RMat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = std::sqrt(static_cast<double>(k));
    jacobi(k - 1, k) = jacobi(k, k - 1);
  }
  Eigen::SelfAdjointEigenSolver<RMat> es(jacobi);
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    nodes[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    const double first = es.eigenvectors()(0, k);
    weights[static_cast<std::size_t>(k)] = first * first;
  }
  // Symmetrize nodes; the rule is exactly symmetric and this removes eigensolver jitter.
  for (int k = 0; k < n / 2; ++k) {
    const auto lo = static_cast<std::size_t>(k);
    const auto hi = static_cast<std::size_t>(n - 1 - k);
    const double x = 0.5 * (nodes[hi] - nodes[lo]);
    const double w = 0.5 * (weights[hi] + weights[lo]);
    nodes[lo] = -x;
    nodes[hi] = x;
    weights[lo] = weights[hi] = w;
  }
  if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

std::vector<double> normalized_hermite(int order, double x) {
  std::vector<double> p(static_cast<std::size_t>(order) + 1, 0.0);
  p[0] = 1.0;
  if (order >= 1) p[1] = x;
  for (int n = 1; n < order; ++n) {
    const auto k = static_cast<std::size_t>(n);
    p[k + 1] = (x * p[k] - std::sqrt(static_cast<double>(n)) * p[k - 1]) / std::sqrt(static_cast<double>(n + 1));
  }
  return p;
}

int VelocityBasis::flat(const MultiIndex& a) const {
  if (dim_v == 1) return a[0];
  return a[0] * per_axis() + a[1];
}

namespace {

RMat ladder_mulv_1d(int order) {
  RMat m = RMat::Zero(order + 1, order + 1);
  for (int n = 0; n < order; ++n) {
    m(n + 1, n) = std::sqrt(static_cast<double>(n + 1));
    m(n, n + 1) = m(n + 1, n);
  }
  return m;
}

RMat ladder_ddv_1d(int order) {
  RMat d = RMat::Zero(order + 1, order + 1);
  for (int n = 0; n < order; ++n) {
    d(n + 1, n) = -0.5 * std::sqrt(static_cast<double>(n + 1));
    d(n, n + 1) = 0.5 * std::sqrt(static_cast<double>(n + 1));
  }
  return d;
}

RMat lift_to_axis(const RMat& one_d, int dim, int axis) {
  if (dim == 1) return one_d;
  const RMat eye = RMat::Identity(one_d.rows(), one_d.cols());
  const RMat& a = axis == 0 ? one_d : eye;
  const RMat& b = axis == 0 ? eye : one_d;
  RMat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

BasisPtr build_basis(int dim_v, int order) {
  if (dim_v != 1 && dim_v != 2) throw std::invalid_argument("build_basis: dim_v must be 1 or 2");
  if (order < 2) throw std::invalid_argument("build_basis: order must be >= 2 to represent |v|^2");
  auto basis = std::make_shared<VelocityBasis>();
  basis->dim_v = dim_v;
  basis->order = order;
  const int p = order + 1;
  gauss_hermite_probabilists(p, basis->quad_nodes, basis->quad_weights);

  if (dim_v == 1) {
    for (int a = 0; a < p; ++a) basis->index.push_back({a, 0});
    for (int q = 0; q < p; ++q) basis->nodes.push_back({basis->quad_nodes[static_cast<std::size_t>(q)], 0.0});
  } else {
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b) basis->index.push_back({a, b});
    for (int q0 = 0; q0 < p; ++q0)
      for (int q1 = 0; q1 < p; ++q1)
        basis->nodes.push_back({basis->quad_nodes[static_cast<std::size_t>(q0)], basis->quad_nodes[static_cast<std::size_t>(q1)]});
  }

  const int nq = basis->num_nodes();
  const int nb = basis->size();
  basis->node_weight.resize(nq);
  basis->maxwellian.resize(nq);
  basis->poly_at_nodes.resize(nb, nq);
  const double norm_const = std::pow(2.0 * std::numbers::pi, -0.5 * dim_v);
  for (int q = 0; q < nq; ++q) {
    const auto& v = basis->nodes[static_cast<std::size_t>(q)];
    double w = 1.0;
    double v2 = 0.0;
    for (int d = 0; d < dim_v; ++d) {
      const auto it = std::find(basis->quad_nodes.begin(), basis->quad_nodes.end(), v[static_cast<std::size_t>(d)]);
      w *= basis->quad_weights[static_cast<std::size_t>(it - basis->quad_nodes.begin())];
      v2 += v[static_cast<std::size_t>(d)] * v[static_cast<std::size_t>(d)];
    }
    basis->node_weight(q) = w;
    basis->maxwellian(q) = norm_const * std::exp(-0.5 * v2);
    const auto h0 = normalized_hermite(order, v[0]);
    const auto h1 = normalized_hermite(order, v[1]);
    for (int s = 0; s < nb; ++s) {
      const auto& a = basis->index[static_cast<std::size_t>(s)];
      double val = h0[static_cast<std::size_t>(a[0])];
      if (dim_v == 2) val *= h1[static_cast<std::size_t>(a[1])];
      basis->poly_at_nodes(s, q) = val;
    }
  }

  basis->forward_matrix.resize(nb, nq);
  basis->inverse_matrix.resize(nq, nb);
  for (int q = 0; q < nq; ++q) {
    const double sqrt_m = std::sqrt(basis->maxwellian(q));
    basis->forward_matrix.col(q) = basis->poly_at_nodes.col(q) * (basis->node_weight(q) / sqrt_m);
    basis->inverse_matrix.row(q) = basis->poly_at_nodes.col(q).transpose() * sqrt_m;
  }

  const RMat mv = ladder_mulv_1d(order);
  const RMat dv = ladder_ddv_1d(order);
  for (int axis = 0; axis < 2; ++axis) {
    if (axis < dim_v) {
      basis->mulv[static_cast<std::size_t>(axis)] = lift_to_axis(mv, dim_v, axis);
      basis->ddv[static_cast<std::size_t>(axis)] = lift_to_axis(dv, dim_v, axis);
    } else {
      basis->mulv[static_cast<std::size_t>(axis)] = RMat::Zero(nb, nb);
      basis->ddv[static_cast<std::size_t>(axis)] = RMat::Zero(nb, nb);
    }
  }
  return basis;
}

RVec project_function(const VelocityBasis& basis, const std::function<double(double, double)>& f) {
  RVec values(basis.num_nodes());
  for (int q = 0; q < basis.num_nodes(); ++q) {
    const auto& v = basis.nodes[static_cast<std::size_t>(q)];
    values(q) = f(v[0], v[1]);
  }
  return basis.forward_matrix * values;
}

RMat multiplication_matrix(const VelocityBasis& basis, const RVec& m_at_nodes) {
  const RVec w = basis.node_weight.cwiseProduct(m_at_nodes);
  return basis.poly_at_nodes * w.asDiagonal() * basis.poly_at_nodes.transpose();
}

Wavenumber SpatialGrid::wavenumber(int m) const {
  if (dim_x == 1) return {m - Mx, 0};
  return {m / side() - Mx, m % side() - Mx};
}

int SpatialGrid::flat(const Wavenumber& n) const {
  if (dim_x == 1) return n[0] + Mx;
  return (n[0] + Mx) * side() + (n[1] + Mx);
}

bool SpatialGrid::contains(const Wavenumber& n) const {
  if (std::abs(n[0]) > Mx) return false;
  if (dim_x == 1) return n[1] == 0;
  return std::abs(n[1]) <= Mx;
}

SpatialGrid make_grid(int dim_x, int Mx, int n_phys) {
  if (dim_x != 1 && dim_x != 2) throw std::invalid_argument("make_grid: dim_x must be 1 or 2");
  if (Mx < 1) throw std::invalid_argument("make_grid: Mx must be >= 1");
  SpatialGrid g;
  g.dim_x = dim_x;
  g.Mx = Mx;
  if (n_phys == 0) {
    n_phys = 1;
    while (n_phys < 3 * Mx + 1) n_phys *= 2;
  }
  if (n_phys < 3 * Mx + 1) throw std::invalid_argument("make_grid: n_phys too small for alias-free products");
  g.n_phys = n_phys;
  return g;
}

SpectralField SpectralField::zeros(BasisPtr basis, const SpatialGrid& grid) {
  if (basis->dim_v != grid.dim_x) throw std::invalid_argument("SpectralField: velocity and space dimensions differ");
  SpectralField f;
  f.basis = std::move(basis);
  f.grid = grid;
  f.coeffs = CMat::Zero(f.basis->size(), grid.modes());
  return f;
}

std::vector<int> active_modes(const SpectralField& f) {
  std::vector<int> out;
  for (int m = 0; m < f.coeffs.cols(); ++m)
    if ((f.coeffs.col(m).array() != cplx(0.0, 0.0)).any()) out.push_back(m);
  return out;
}

namespace {

int mirror_mode(const SpatialGrid& g, int m) {
  const auto n = g.wavenumber(m);
  return g.flat({-n[0], -n[1]});
}

}  // namespace

void enforce_reality(SpectralField& f) {
  for (int m = 0; m < f.coeffs.cols(); ++m) {
    const int mm = mirror_mode(f.grid, m);
    if (mm < m) continue;
    const CVec avg = 0.5 * (f.coeffs.col(m) + f.coeffs.col(mm).conjugate());
    f.coeffs.col(m) = avg;
    f.coeffs.col(mm) = avg.conjugate();
  }
}

double reality_defect(const SpectralField& f) {
  double worst = 0.0;
  for (int m = 0; m < f.coeffs.cols(); ++m) {
    const int mm = mirror_mode(f.grid, m);
    worst = std::max(worst, (f.coeffs.col(m) - f.coeffs.col(mm).conjugate()).cwiseAbs().maxCoeff());
  }
  return worst;
}

OperatorResult apply_spectral_operator(const SpectralField& f, SpectralOp op, int axis) {
  const int dim = f.basis->dim_v;
  if (axis < 0 || axis >= dim) throw std::invalid_argument("apply_spectral_operator: axis out of range");
  OperatorResult r{f.like_zero(), 0.0};
  const auto ax = static_cast<std::size_t>(axis);
  switch (op) {
    case SpectralOp::ddx:
      for (int m = 0; m < f.coeffs.cols(); ++m)
        r.field.coeffs.col(m) = f.coeffs.col(m) * cplx(0.0, f.grid.wavenumber(m)[ax]);
      return r;
    case SpectralOp::ddv:
    case SpectralOp::mulv: {
      const RMat& ladder = op == SpectralOp::ddv ? f.basis->ddv[ax] : f.basis->mulv[ax];
      r.field.coeffs = ladder * f.coeffs;
      const int top = f.basis->order;
      const double gain = op == SpectralOp::ddv ? 0.25 * (top + 1) : static_cast<double>(top + 1);
      for (int s = 0; s < f.basis->size(); ++s)
        if (f.basis->index[static_cast<std::size_t>(s)][ax] == top) r.dropped_mass += gain * f.coeffs.row(s).squaredNorm();
      return r;
    }
  }
  return r;
}

std::vector<MultiIndex> multi_indices_upto(int dim, int k) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= k; ++total) {
    if (dim == 1) {
      out.push_back({total, 0});
      continue;
    }
    for (int a = total; a >= 0; --a) out.push_back({a, total - a});
  }
  return out;
}

std::vector<DerivativePair> derivative_pairs(int dim, int k) {
  std::vector<DerivativePair> out;
  for (const auto& j : multi_indices_upto(dim, k))
    for (const auto& l : multi_indices_upto(dim, k - abs_degree(j))) out.push_back({j, l});
  return out;
}

RMat velocity_derivative(const VelocityBasis& basis, const MultiIndex& j) {
  RMat d = RMat::Identity(basis.size(), basis.size());
  for (int axis = 0; axis < basis.dim_v; ++axis)
    for (int p = 0; p < j[static_cast<std::size_t>(axis)]; ++p) d = basis.ddv[static_cast<std::size_t>(axis)] * d;
  return d;
}

cplx fourier_symbol(const Wavenumber& n, const MultiIndex& l, int dim) {
  cplx s(1.0, 0.0);
  for (int axis = 0; axis < dim; ++axis)
    for (int p = 0; p < l[static_cast<std::size_t>(axis)]; ++p) s *= cplx(0.0, n[static_cast<std::size_t>(axis)]);
  return s;
}

cplx inner_or_norm(const SpectralField& f, const SpectralField* g, NormKind kind, int k, double eps,
                   const RVec* lambda_weights) {
  if (k < 0) throw std::invalid_argument("inner_or_norm: k must be >= 0");
  if (kind == NormKind::Hk_eps && (eps <= 0.0 || eps > 1.0)) throw std::invalid_argument("inner_or_norm: eps must lie in (0,1]");
  if (kind == NormKind::Lambda && lambda_weights == nullptr)
    throw std::invalid_argument("inner_or_norm: Lambda norm requested with no model bound");
  const SpectralField& gg = g ? *g : f;
  if (gg.coeffs.rows() != f.coeffs.rows() || gg.coeffs.cols() != f.coeffs.cols())
    throw std::invalid_argument("inner_or_norm: shape mismatch");
  const int dim = f.basis->dim_v;
  const int level = kind == NormKind::L2 ? 0 : k;

  std::vector<int> modes;
  for (int m = 0; m < f.coeffs.cols(); ++m)
    if ((f.coeffs.col(m).array() != cplx(0.0, 0.0)).any() && (gg.coeffs.col(m).array() != cplx(0.0, 0.0)).any()) modes.push_back(m);
  if (modes.empty()) return cplx(0.0, 0.0);

  CMat fa(f.coeffs.rows(), static_cast<Eigen::Index>(modes.size()));
  CMat ga(fa.rows(), fa.cols());
  for (std::size_t i = 0; i < modes.size(); ++i) {
    fa.col(static_cast<Eigen::Index>(i)) = f.coeffs.col(modes[i]);
    ga.col(static_cast<Eigen::Index>(i)) = gg.coeffs.col(modes[i]);
  }
  RVec weights = RVec::Ones(f.coeffs.rows());
  if (kind == NormKind::Lambda) weights = *lambda_weights;

  std::array<Eigen::SparseMatrix<cplx>, 2> ladders;
  if (level > 0)
    for (int axis = 0; axis < dim; ++axis)
      ladders[static_cast<std::size_t>(axis)] = f.basis->ddv[static_cast<std::size_t>(axis)].cast<cplx>().sparseView();

  cplx total(0.0, 0.0);
  for (const auto& j : multi_indices_upto(dim, level)) {
    const auto derive = [&](CMat x) {
      for (int axis = 0; axis < dim; ++axis)
        for (int p = 0; p < j[static_cast<std::size_t>(axis)]; ++p)
          x = ladders[static_cast<std::size_t>(axis)] * x;
      return x;
    };
    const CMat dfa = derive(fa);
    const CMat dga = g ? derive(ga) : dfa;
    const double vfactor = (kind == NormKind::Hk_eps && abs_degree(j) >= 1) ? eps * eps : 1.0;
    for (Eigen::Index c = 0; c < fa.cols(); ++c) {
      const auto n = f.grid.wavenumber(modes[static_cast<std::size_t>(c)]);
      double xfactor = 0.0;
      for (const auto& l : multi_indices_upto(dim, level - abs_degree(j))) xfactor += std::norm(fourier_symbol(n, l, dim));
      const cplx term = (dfa.col(c).conjugate().cwiseProduct(weights).cwiseProduct(dga.col(c))).sum();
      total += vfactor * xfactor * term;
    }
  }
  return total;
}

double norm_squared(const SpectralField& f, NormKind kind, int k, double eps, const RVec* lambda_weights) {
  return inner_or_norm(f, nullptr, kind, k, eps, lambda_weights).real();
}

}  // namespace knudsenlab
