#pragma once

#include "knudsenlab/operators.hpp"
#include "knudsenlab/trajectory.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <string>
#include <vector>

namespace knudsenlab {

enum class NormVariant { standard, perp };

/// Level-one functional A|h|^2 + alpha|grad_x h|^2 + b w_v |grad_v h|^2 + a eps <grad_x h, grad_v h>,
/// with w_v = eps^2 (standard) or 1 on the microscopic part (perp).
struct H1Block {
  double A = 0.0, alpha = 0.0, b = 0.0, a = 0.0, e = 0.0;
};

/// Level p >= 2: F_p = B sum_{|j|>=2} w_v |d^j_l h|^2 + B' sum_{(l,i)} Q_{l,i}.
struct LevelBlock {
  int level = 2;
  double B = 0.0, Bp = 0.0;
  double alpha = 0.0, b = 0.0, a = 0.0, e = 0.0;
};

struct HypNormCoefficients {
  int k = 1;
  NormVariant variant = NormVariant::standard;
  int dim = 2;
  H1Block h1;
  std::vector<LevelBlock> hk_blocks;  ///< levels 2..k
  std::vector<double> combo;          ///< C_1..C_k
  double eps_max = 1.0;
  double K0 = 0.0, K1 = 0.0, K2 = 0.0;  ///< a priori constants of the standard functional
  std::array<double, 5> h1_conditions{};  ///< left sides of the five level-one choices, each <= -1
};

/// Throws std::domain_error naming the failing condition when the ledger makes a choice impossible.
HypNormCoefficients build_h1_coefficients(const OperatorConstants& c, int dim = 2);
HypNormCoefficients build_hk_coefficients(const OperatorConstants& c, int k, NormVariant variant, int dim = 2);

/// Evaluates the quadratic form with cached velocity matrices.
class HypNormEvaluator {
 public:
  HypNormEvaluator(const HypNormCoefficients& coeffs, const CollisionModel& model);

  /// Squared functional value. Throws std::invalid_argument for eps outside (0, eps_max].
  double operator()(const SpectralField& h, double eps) const;

  /// Hermitian matrix of the form on Fourier mode n.
  CMat mode_matrix(const Wavenumber& n, double eps) const;

  const HypNormCoefficients& coefficients() const { return coeffs_; }

 private:
  struct Term {
    double weight;
    int eps_power;
    int v1, v2;  // indices into vel_
    MultiIndex l1, l2;
  };
  HypNormCoefficients coeffs_;
  std::vector<RMat> vel_;  // D^j or D^j (I - pi_L)
  std::vector<Eigen::SparseMatrix<cplx>> vel_sparse_;  // D^j
  std::vector<bool> vel_perp_;
  CMat kernel_;
  std::vector<Term> terms_;
  std::vector<CMat> gram_;  // vel_[v1]^T vel_[v2] per term
  int vel_index(const MultiIndex& j, bool perp, const CollisionModel& model);
  std::vector<std::pair<MultiIndex, bool>> vel_keys_;
};

double eval_hyp_norm(const SpectralField& h, const HypNormCoefficients& coeffs, double eps,
                     const CollisionModel& model);

/// c, C with c R <= F <= C R over all modes of the grid, where R is the Hk_eps form (standard)
/// or the plain H^k form (perp).
struct EquivalenceBounds {
  double lower = 0.0;
  double upper = 0.0;
};
EquivalenceBounds equivalence_constants(const HypNormCoefficients& coeffs, const CollisionModel& model,
                                        const SpatialGrid& grid, double eps);

/// sup_t (HypEps(t)^2 + int_0^t HkLambda^2 ds), trapezoidal in time. Throws on an empty record.
double eval_E_functional(const TrajectoryRecord& record);

struct DissipationReport {
  std::vector<double> times;
  std::vector<double> lhs;             ///< centered difference of HypEps^2
  std::vector<double> rhs_bound;       ///< -K0 |h|_{HkLambda}^2 + (K1 + eps^2 K2) G^2
  std::vector<double> gamma_controls;  ///< G = C_Gamma (2 |h|_{Hk} |h|_{HkLambda}), 0 for linear runs
  std::vector<std::size_t> violations;
  double slack = 0.0;
  double identity_defect = 0.0;     ///< max |d/dt |h|^2 - 2 eps^-2 <Lh,h> - 2 eps^-1 <Gamma,h>|
  double identity_tolerance = 0.0;  ///< from a Richardson estimate of the difference error
  bool identity_pass = true;
  bool pass() const { return violations.empty(); }
};

/// Needs the HypEps, Hk and HkLambda series. Throws std::invalid_argument for fewer than 3 samples.
DissipationReport dissipation_monitor(const TrajectoryRecord& record, const HypNormCoefficients& coeffs,
                                      const OperatorConstants& constants);

}  // namespace knudsenlab
