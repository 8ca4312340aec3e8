#pragma once

#include "knudsenlab/branch_analysis.hpp"
#include "knudsenlab/moments.hpp"

#include <cstdint>

namespace knudsenlab {

using VectorModes = std::array<CVec, 2>;

/// Per mode n != 0: u <- u - n (n.u) / |n|^2. The mean mode is untouched. 2-D grids only.
VectorModes leray_project(const SpatialGrid& grid, const VectorModes& u);

/// max_n |n . u(n)|
double divergence_defect(const SpatialGrid& grid, const VectorModes& u);

/// Incompressible Navier-Stokes velocity plus a transported, diffused temperature.
/// rho is implicit: rho = -theta.
struct NSState {
  SpatialGrid grid;
  VectorModes u_hat;
  CVec theta_hat;
  double nu = 1.0;
  double kappa = 1.0;
  double time = 0.0;
};

struct NSOptions {
  bool convective = true;  ///< false drops u.grad u and u.grad theta (Stokes-Fourier)
  int sample_every = 1;
};

/// Integrating-factor RK2 (Heun) on the diffusion terms; the nonlinear terms are evaluated on the
/// padded physical grid (alias-free for quadratic products) and Leray-projected.
/// Returns the states at t = 0 and every sample_every steps, always including t_end.
/// Throws NumericalFailure when max|u| dt max|n| > 1, std::invalid_argument on a bad state.
std::vector<NSState> ns_solve(const NSState& state0, double t_end, double dt, const NSOptions& options = {});

/// [rho + v.u + (|v|^2 - N) theta / 2] M^{1/2} with rho = -theta.
SpectralField limit_field(BasisPtr basis, const NSState& s);

/// Limit data from kinetic data: u = P u_in; theta = -rho with rho the orthogonal projection of
/// (rho_in, theta_in) onto the Boussinesq line, i.e. rho = (rho_in - N theta_in / 2) / (1 + N / 2),
/// which is (rho_in - theta_in) / 2 at N = 2.
NSState limit_initial_state(const MomentFields& in, double nu, double kappa);

enum class DataKind { well_prepared, ill_prepared };

std::string to_string(DataKind k);
/// Throws std::invalid_argument on an unknown name.
DataKind parse_data_kind(const std::string& name);

struct DataSpec {
  DataKind kind = DataKind::well_prepared;
  std::uint64_t seed = 1;
  double amplitude = 1.0;    ///< L^2 norm of h_in
  int max_mode = 2;
  bool microscopic = false;  ///< ill-prepared only: add a component orthogonal to Ker(L)
};

/// Well-prepared: rho = -theta, u divergence-free, h_in in Ker(L). Ill-prepared: independent
/// rho, theta and unprojected u. Both are real and have zero x-averaged kernel moments.
SpectralField build_initial_data(const CollisionModel& model, const SpatialGrid& grid, const DataSpec& spec);

struct ConvergenceConfig {
  std::vector<double> eps_grid;
  DataSpec data;
  double T = 1.0;
  int k = 1;                 ///< errors are measured in H^k_x L^2_v
  double small_time = 0.02;  ///< probe time for the non-limit component
  int threads = 1;  ///< eps values run in parallel; results do not depend on this
};

struct ConvergenceRow {
  double eps = 0.0;
  double err_timeavg = 0.0;  ///< |int_0^T (h_eps - h) dt|
  double err_L2t = 0.0;      ///< (int_0^T |h_eps - h|^2 dt)^{1/2}
  double err_sup = 0.0;      ///< max over samples of |h_eps - h|
  double err_small_time = 0.0;  ///< |h_eps - h| at small_time
  double initial_error = 0.0;   ///< |h_in - h(0)|, the acoustic (plus microscopic) component
  int samples = 0;
};

struct ConvergenceResult {
  double nu = 0.0;
  double kappa = 0.0;
  std::vector<ConvergenceRow> rows;
  double slope_timeavg = 0.0;
  double slope_L2t = 0.0;
  double slope_sup = 0.0;
  double boussinesq_defect = 0.0;  ///< max |rho + theta| over limit samples
  double divergence_defect = 0.0;  ///< max |n.u| over limit samples
};

/// Linear kinetic runs (exact per-mode exponentials) against the Stokes-Fourier limit with
/// nu = beta_2 and kappa = beta_0 from fit_dispersion. Samples every min(0.01, eps/8).
/// Throws std::invalid_argument for a model without the N + 2 dimensional kernel or fewer than 4 eps values.
ConvergenceResult convergence_study(const CollisionModel& model, const SpatialGrid& grid,
                                    const ConvergenceConfig& config, const BranchFit& fit);

struct AcousticAveraging {
  std::vector<double> eps;
  std::vector<double> value;  ///< |int_0^T (U_{-1} + U_1)(t) h_in dt|^2 / |h_in|^2
  double slope = 0.0;
};

/// h_in is the real acoustic leading eigenfunction on the modes +-n. Branch parts use the exact
/// eigenvalues and projectors at zeta = eps |n|.
AcousticAveraging acoustic_averaging(const CollisionModel& model, const std::vector<double>& eps_grid,
                                     const Wavenumber& n, double T);

/// Least-squares slope of log y against log x.
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace knudsenlab
