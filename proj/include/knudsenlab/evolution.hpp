#pragma once

#include "knudsenlab/hypocoercivity.hpp"
#include "knudsenlab/operators.hpp"
#include "knudsenlab/trajectory.hpp"

#include <limits>
#include <optional>
#include <stdexcept>

namespace knudsenlab {

/// NaN, overflow or a solver breakdown; `time` is the offending instant.
struct NumericalFailure : std::runtime_error {
  NumericalFailure(const std::string& what, double t) : std::runtime_error(what), time(t) {}
  double time;
};

enum class Scheme { exact_linear, strang_imex };

std::string to_string(Scheme s);
/// Throws std::invalid_argument on an unknown name.
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::exact_linear;
  double dt = 0.01;       ///< step; strang_imex uses min(dt, c_nl eps)
  double t_end = 1.0;
  int sample_every = 1;   ///< record every m-th step
  double c_nl = 0.1;
  bool transport = true;  ///< false drops v.grad_x
  bool collision = true;  ///< false drops L
  bool nonlinear = false; ///< adds eps^-1 Gamma(h,h); requires strang_imex
  int k = 1;              ///< Sobolev level of the recorded norms
  std::optional<HypNormCoefficients> hyp_standard;  ///< records HypEps when eps <= eps_max
  std::optional<HypNormCoefficients> hyp_perp;      ///< records HypPerp when eps <= eps_max
  bool record_moments = false;
  int state_every = 0;    ///< keep every m-th sampled state (0: none)
  double delta_k = std::numeric_limits<double>::infinity();  ///< smallness threshold on |h_in|_{Hk}
};

/// exp(t A) for one Fourier mode. Uses the eigendecomposition of A unless its eigenvector
/// matrix has 1-norm condition number above 1e8, in which case Pade scaling and squaring is used.
class ModePropagator {
 public:
  explicit ModePropagator(const CMat& generator);

  CVec apply(double t, const CVec& x) const;
  CMat matrix(double t) const;
  /// int_0^t exp(s A) x ds
  CVec integral(double t, const CVec& x) const;
  /// Coordinates in the eigenbasis and back; only valid when diagonalized().
  CVec to_eigen(const CVec& x) const;
  CVec from_eigen(double t, const CVec& c) const;
  bool diagonalized() const { return diagonal_; }
  double condition() const { return condition_; }
  const CVec& eigenvalues() const { return mu_; }

 private:
  CMat a_;
  bool diagonal_ = false;
  double condition_ = 0.0;
  CVec mu_;
  CMat v_, vinv_;
};

/// Generator of one mode with optional transport/collision parts.
CMat mode_generator(const CollisionModel& model, const Wavenumber& n, double eps, bool transport, bool collision);

/// Throws NumericalFailure on non-finite states and std::invalid_argument on a bad config.
TrajectoryRecord propagate(const SpectralField& h_in, const CollisionModel& model, double eps,
                           const IntegratorConfig& config);

struct DecayFit {
  double tau = 0.0;
  double residual = 0.0;  ///< RMS of the log-linear fit
  int samples = 0;
};

/// Least-squares slope of log(norm) on [t0, t1]: norm ~ C exp(-tau t).
/// Throws std::invalid_argument for fewer than 5 samples or a nonpositive sample.
DecayFit fit_decay_rate(const std::vector<double>& times, const std::vector<double>& norm, double t0, double t1);
DecayFit fit_decay_rate(const TrajectoryRecord& record, const std::string& norm_key, double t0, double t1);

/// sum_n sum_{|l|<=k} |n^l|^2 |h_n|^2
double hkx_l2_norm_squared(const SpectralField& h, int k);

}  // namespace knudsenlab
