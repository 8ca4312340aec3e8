#pragma once

#include "knudsenlab/operators.hpp"

#include <map>
#include <stdexcept>

namespace knudsenlab {

/// Branch index of an eigenvalue: -1, 0, 1, 2 for the fluid branches, kRemainder otherwise.
inline constexpr int kRemainder = 99;

/// Raised when the fluid eigenvalues can no longer be separated from the rest of the spectrum.
struct ContinuationFailure : std::runtime_error {
  ContinuationFailure(const std::string& what, double z) : std::runtime_error(what), zeta(z) {}
  double zeta;
};

/// Spectrum of B(zeta, omega) = L - i zeta (v . omega). B is complex symmetric, so the spectral
/// projector of a simple eigenvalue with eigenvector r is r r^T / (r^T r).
struct ModeSpectrum {
  double zeta = 0.0;
  std::array<double, 2> omega{1.0, 0.0};
  CVec eigenvalues;
  CMat eigenvectors;           ///< columns, paired with eigenvalues
  std::vector<int> labels;     ///< per eigenvalue
  std::map<int, CMat> projectors;  ///< per branch and kRemainder (= I - sum of branch projectors)
  std::map<int, cplx> branch_eigenvalue;  ///< lambda_j(zeta); at zeta = 0 all are 0
  double separation = 0.0;     ///< min Re over branches - max Re over the remainder
};

/// B(zeta, omega) as a dense matrix.
CMat branch_operator(const CollisionModel& model, const std::array<double, 2>& omega, double zeta);

/// Branch labels used by the model: {-1, 0, 1, 2} for a kernel of dimension N + 2 (N = 2),
/// {-1, 0, 1} for N = 1, and {0} for a one-dimensional kernel.
std::vector<int> branch_indices(const CollisionModel& model);

/// zeta = 0 uses the limit projectors onto the leading-order eigenvectors inside Ker(L).
/// Throws ContinuationFailure when the fluid eigenvalues are not separated or labels are ambiguous.
ModeSpectrum mode_spectrum(const CollisionModel& model, const std::array<double, 2>& omega, double zeta);

/// Leading-order eigenvector inside Ker(L) for branch j, unit L^2 norm, as Hermite coefficients.
CVec leading_eigenvector(const CollisionModel& model, const std::array<double, 2>& omega, int j);

struct BranchFit {
  std::map<int, double> alpha;  ///< Im lambda_j ~ alpha_j zeta
  std::map<int, double> beta;   ///< Re lambda_j ~ -beta_j zeta^2, stored as a damping rate
  double gamma_bound = 0.0;     ///< max_j,zeta |gamma_j(zeta)| / zeta^3 on the fit grid
  double sigma = 0.0;           ///< -max Re(remainder) over (0, n0]
  double n0 = 0.0;
  double continuation_limit = 0.0;  ///< largest scanned zeta with a successful continuation
  std::map<int, double> fit_residuals;  ///< RMS |gamma_j| over the grid
  double acoustic_collinearity = 0.0;   ///< vs 1 -/+ c omega.v + (|v|^2 - N)/N, c^2 = 1 + 2/N
  double acoustic_collinearity_unit = 0.0;  ///< vs 1 -/+ omega.v + (|v|^2 - N)/2
  double sound_speed = 0.0;     ///< sqrt(1 + 2/N) from the kernel-restricted transport
};

struct FitOptions {
  double scan_step = 0.05;   ///< zeta step of the continuation scan for n0
  double scan_max = 4.0;
  int sigma_points = 40;     ///< uniform points on (0, n0] for sigma
};

/// zeta_grid: at least 6 points in (0, n0]. Throws ContinuationFailure on the grid.
BranchFit fit_dispersion(const CollisionModel& model, const std::array<double, 2>& omega,
                         const std::vector<double>& zeta_grid, const FitOptions& options = {});

/// Remainder constant: max over zeta in {0} + zeta_grid and tau in [0, tau_max] of
/// |exp(tau B) - sum_j e^{tau lambda_j} P_j|_2 e^{sigma tau}.
double remainder_constant(const CollisionModel& model, const std::array<double, 2>& omega,
                          const std::vector<double>& zeta_grid, double sigma, double tau_max, int tau_points = 60);

struct SemigroupParts {
  double t = 0.0;
  double eps = 1.0;
  std::map<int, SpectralField> branches;  ///< U_j(t) h_in
  SpectralField remainder;                ///< U_R(t) h_in
  SpectralField full;                     ///< U(t) h_in
  double remainder_norm = 0.0;
  double remainder_bound = 0.0;           ///< C_R e^{-sigma t / eps^2} |h_in|
  int modes_outside_n0 = 0;               ///< active modes with eps |n| > n0 (pure remainder)
};

/// Per active mode with eps |n| <= n0: branch parts from exact eigenvalues and projectors at zeta = eps |n|.
SpectralField semigroup_full(const SpectralField& h_in, const CollisionModel& model, double eps, double t);
SemigroupParts semigroup_decompose(const SpectralField& h_in, const CollisionModel& model, double eps, double t,
                                   const BranchFit& fit, double C_R);

}  // namespace knudsenlab
