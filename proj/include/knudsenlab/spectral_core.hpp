#pragma once

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace knudsenlab {

using cplx = std::complex<double>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RVec = Vec<double>;
using CVec = Vec<cplx>;
using RMat = Mat<double>;
using CMat = Mat<cplx>;

using MultiIndex = std::array<int, 2>;
using Wavenumber = std::array<int, 2>;

inline int abs_degree(const MultiIndex& a) { return a[0] + a[1]; }

/// Tensor Hermite basis psi_alpha(v) = p_alpha(v) M(v)^{1/2}, orthonormal in L^2(dv).
/// p_alpha is the product of probabilists' Hermite polynomials He_n / sqrt(n!).
/// Quadrature uses order+1 Gauss-Hermite nodes per axis, so transforms are square.
struct VelocityBasis {
  int dim_v = 1;
  int order = 2;
  std::vector<double> quad_nodes;    ///< 1-D abscissae
  std::vector<double> quad_weights;  ///< 1-D weights for the measure M(v)dv (sum to 1)

  std::vector<MultiIndex> index;  ///< flat slot -> multi-index, axis 0 slowest
  std::vector<std::array<double, 2>> nodes;  ///< tensor nodes
  RVec node_weight;     ///< tensor probability weights
  RVec maxwellian;      ///< M at tensor nodes
  RMat poly_at_nodes;   ///< p_alpha(v_q), rows alpha
  RMat forward_matrix;  ///< node values -> coefficients
  RMat inverse_matrix;  ///< coefficients -> node values

  std::array<RMat, 2> mulv;  ///< v_axis ladder, truncated to order
  std::array<RMat, 2> ddv;   ///< d/dv_axis ladder, truncated to order

  int size() const { return static_cast<int>(index.size()); }
  int per_axis() const { return order + 1; }
  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int flat(const MultiIndex& a) const;
  int degree(int slot) const { return abs_degree(index[static_cast<std::size_t>(slot)]); }
};

using BasisPtr = std::shared_ptr<const VelocityBasis>;

/// Throws std::invalid_argument for dim_v outside {1,2} or order < 2.
BasisPtr build_basis(int dim_v, int order);

/// Gauss-Hermite rule for the weight e^{-v^2/2}/sqrt(2 pi) via Golub-Welsch.
void gauss_hermite_probabilists(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Normalized probabilists' Hermite polynomials p_0..p_order at x.
std::vector<double> normalized_hermite(int order, double x);

enum class Direction { forward, inverse };

template <typename Scalar>
Vec<Scalar> velocity_transform(const Vec<Scalar>& values, const VelocityBasis& basis, Direction dir) {
  const Eigen::Index expected = dir == Direction::forward ? basis.num_nodes() : basis.size();
  if (values.size() != expected) throw std::invalid_argument("velocity_transform: shape mismatch");
  if (dir == Direction::forward) return basis.forward_matrix.cast<Scalar>() * values;
  return basis.inverse_matrix.cast<Scalar>() * values;
}

/// Coefficients of the L^2 projection of f; f is sampled on the tensor nodes.
RVec project_function(const VelocityBasis& basis, const std::function<double(double, double)>& f);

/// Matrix of h -> m(v) h on the truncated space, by collocation on the nodes.
RMat multiplication_matrix(const VelocityBasis& basis, const RVec& m_at_nodes);

/// Spatial Fourier truncation |n_i| <= Mx on the torus [0, 2 pi)^N.
struct SpatialGrid {
  int dim_x = 1;
  int Mx = 1;
  int n_phys = 4;  ///< physical points per axis used by pseudo-spectral products

  int side() const { return 2 * Mx + 1; }
  int modes() const { return dim_x == 1 ? side() : side() * side(); }
  int phys_size() const { return dim_x == 1 ? n_phys : n_phys * n_phys; }
  Wavenumber wavenumber(int m) const;
  int flat(const Wavenumber& n) const;
  bool contains(const Wavenumber& n) const;
  int zero_mode() const { return flat({0, 0}); }
};

/// n_phys = 0 picks the smallest power of two >= 3 Mx + 1, which keeps quadratic products alias-free.
SpatialGrid make_grid(int dim_x, int Mx, int n_phys = 0);

/// h(x,v) = sum_n sum_alpha coeffs(alpha, n) e^{i n.x} psi_alpha(v).
/// Torus measure is normalized (dx / (2 pi)^N), so the L^2 norm is the Euclidean norm of coeffs.
struct SpectralField {
  BasisPtr basis;
  SpatialGrid grid;
  CMat coeffs;  ///< rows: velocity slot, columns: Fourier mode

  static SpectralField zeros(BasisPtr basis, const SpatialGrid& grid);
  SpectralField like_zero() const { return zeros(basis, grid); }
  cplx& at(const Wavenumber& n, const MultiIndex& a) { return coeffs(basis->flat(a), grid.flat(n)); }
  cplx at(const Wavenumber& n, const MultiIndex& a) const { return coeffs(basis->flat(a), grid.flat(n)); }
};

/// Columns with any nonzero entry.
std::vector<int> active_modes(const SpectralField& f);

/// Enforce coeffs(-n) = conj(coeffs(n)) by averaging; used at I/O boundaries.
void enforce_reality(SpectralField& f);

/// max |coeffs(-n) - conj(coeffs(n))|.
double reality_defect(const SpectralField& f);

enum class SpectralOp { ddx, ddv, mulv };

struct OperatorResult {
  SpectralField field;
  double dropped_mass = 0.0;  ///< squared l2 norm of coefficients pushed above the order
};

/// ddx multiplies mode n by i n_axis; ddv and mulv apply the truncated ladder.
OperatorResult apply_spectral_operator(const SpectralField& f, SpectralOp op, int axis);

enum class NormKind { L2, Lambda, Hk, Hk_eps };

/// Sesquilinear <f, g> = sum conj(f) g with the weights of `kind`.
/// Lambda needs `lambda_weights` (diagonal in the Hermite basis); with k > 0 it is the H^k_Lambda form.
/// Hk_eps weights v-derivative terms by eps^2 and keeps pure x-derivatives at weight 1.
cplx inner_or_norm(const SpectralField& f, const SpectralField* g, NormKind kind, int k, double eps,
                   const RVec* lambda_weights = nullptr);

/// Real convenience wrapper: the squared norm of f.
double norm_squared(const SpectralField& f, NormKind kind, int k = 0, double eps = 1.0,
                    const RVec* lambda_weights = nullptr);

/// All (j, l) multi-index pairs with |j| + |l| <= k for the dimension N.
struct DerivativePair {
  MultiIndex j{0, 0};
  MultiIndex l{0, 0};
};
std::vector<MultiIndex> multi_indices_upto(int dim, int k);
std::vector<DerivativePair> derivative_pairs(int dim, int k);

/// Product of truncated ddv ladders for velocity multi-index j.
RMat velocity_derivative(const VelocityBasis& basis, const MultiIndex& j);

/// a * x for real a and complex x, through two real GEMMs.
inline CMat real_times(const RMat& a, const CMat& x) {
  CMat out(a.rows(), x.cols());
  out.real() = a * x.real();
  out.imag() = a * x.imag();
  return out;
}

/// (i n)^l
cplx fourier_symbol(const Wavenumber& n, const MultiIndex& l, int dim);

}  // namespace knudsenlab
