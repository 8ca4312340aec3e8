#pragma once

#include "knudsenlab/spectral_core.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace knudsenlab {

enum class ModelKind { LinearRelaxation, HydroBGK, FokkerPlanck, SemiClassical, BGKQuadratic };

std::string to_string(ModelKind kind);
/// Throws std::invalid_argument on an unknown name.
ModelKind parse_model_kind(const std::string& name);

struct SemiClassicalParams {
  double delta_q = 0.5;
  double kappa_inf = 1.0;
};

/// Linear collision operator L = K - Lambda and, where defined, the bilinear term Gamma.
/// All velocity operators are real matrices on the Hermite coefficients of `basis`.
struct CollisionModel {
  ModelKind kind = ModelKind::HydroBGK;
  SemiClassicalParams params;
  BasisPtr basis;
  int kernel_dim = 0;
  RVec lambda_weights;  ///< diagonal of the Lambda_v inner product, all >= 1
  RMat kernel;          ///< orthonormal kernel functions as columns
  RMat projector;       ///< pi_L = kernel kernel^T
  RMat collision;       ///< L
  RMat compact;         ///< K in the (H1)/(H2) splitting
  RMat lambda_op;       ///< Lambda = K - L

  // Gamma(g,h) = scale * sum_r [ s_r(g) W_r h + s_r(h) W_r g ] for SemiClassical, and
  // Gamma(g,h) = sum_{a,b} pair(a,b) s_a(g) s_b(h) for BGKQuadratic.
  RMat gamma_functionals;  ///< rows s_r
  RMat gamma_pairs;        ///< columns pair(a,b) at a * m + b, symmetric in (a,b)
  RMat gamma_weight;       ///< multiplication by M(v) for SemiClassical
  double gamma_scale = 0.0;

  bool has_gamma() const { return kind == ModelKind::SemiClassical || kind == ModelKind::BGKQuadratic; }
  int dim_v() const { return basis->dim_v; }
};

CollisionModel make_model(ModelKind kind, BasisPtr basis, SemiClassicalParams params = {});

/// Orthonormal kernel functions as columns (coefficient vectors).
RMat kernel_basis(const CollisionModel& model);

SpectralField project_fluid(const SpectralField& h, const CollisionModel& model);
SpectralField apply_collision(const CollisionModel& model, const SpectralField& h);

/// v . grad_x h (without the 1/eps factor).
SpectralField apply_transport(const SpectralField& h);

/// sum_i omega_i mulv_i on the velocity space.
RMat transport_symbol(const VelocityBasis& basis, const std::array<double, 2>& omega);

/// A(n, eps) = L / eps^2 - i (v . n) / eps.
CMat assemble_mode_generator(const CollisionModel& model, const Wavenumber& n, double eps);

/// Gamma on velocity coefficient vectors of x-independent functions.
CVec apply_gamma_velocity(const CollisionModel& model, const CVec& g, const CVec& h);

/// Gamma(g,h) with x-products evaluated pseudo-spectrally and dealiased.
/// Throws std::invalid_argument for models without a bilinear term.
SpectralField apply_gamma(const CollisionModel& model, const SpectralField& g, const SpectralField& h);

/// Node values of the quadratic BGK term (phi_2 + phi_1^2 / 2) M^{1/2} for moments (rho, m, e).
RVec bgk_quadratic_nodes(const VelocityBasis& basis, double rho, const std::array<double, 2>& m, double e);

/// Hypothesis constants. nu[0..6] are nu_0^Lambda .. nu_6^Lambda.
struct OperatorConstants {
  double lambda = 0.0;
  std::array<double, 7> nu{};
  double CL = 0.0;
  double Cp = 1.0;
  std::vector<double> Cpi;  ///< C_{pi k}, k = 0..k_max
  double Cpi_fluid = 0.0;
  double Cgamma = 0.0;
  int k0 = 2;
  std::map<double, double> CdeltaTable;  ///< (H2) mixing bound C(delta)
  double delta_dv = 0.0;                 ///< delta used in the v-derivative estimate
  double C_delta_dv = 0.0;               ///< C(delta_dv)
  std::vector<double> C_delta_level;     ///< (H2') bound at delta_dv for level k = 1..k_max
  double Cgamma_velocity = 0.0;          ///< velocity-only bilinear bound
  double algebra_constant = 0.0;         ///< discrete H^k_x algebra constant at k = k0
};

/// sqrt(sup_n sum_m w_k_low(n)^2 / (w_k(m)^2 w_k_low(n-m)^2)) with w_k(n)^2 = sum_{|l|<=k} |n^l|^2:
/// |f g|_{H^k_low} <= A |f|_{H^k} |g|_{H^k_low} for fields truncated to the grid.
double discrete_algebra_constant(const SpatialGrid& grid, int k, int k_low);

/// C_Gamma at Sobolev level k on the grid (0 for models without Gamma).
double gamma_constant(const CollisionModel& model, int k, const SpatialGrid& grid);

/// gamma_grid is used for the x-dependent part of C_Gamma; pass nullptr to skip it.
/// Cgamma is computed at level k_max.
OperatorConstants constants_ledger(const CollisionModel& model, int k_max, const SpatialGrid* gamma_grid = nullptr,
                                   std::uint64_t seed = 1);

struct HypothesisCheck {
  std::string name;
  bool pass = false;
  double witness = 0.0;  ///< extremal value of the checked quantity (<= 0 passes unless noted)
  std::string detail;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  bool all_pass() const;
  const HypothesisCheck* find(const std::string& name) const;
};

HypothesisReport verify_hypotheses(const CollisionModel& model, const OperatorConstants& constants, double tol,
                                   std::uint64_t seed = 1);

/// Largest generalized eigenvalue of (A, B) with B symmetric positive semidefinite;
/// directions in the null space of B are handled by restricting to its range.
double max_generalized_eigenvalue(const RMat& A, const RMat& B);
double min_generalized_eigenvalue(const RMat& A, const RMat& B);

/// Symmetric part.
inline RMat sym(const RMat& a) { return 0.5 * (a + a.transpose()); }

}  // namespace knudsenlab
