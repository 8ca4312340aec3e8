#include "knudsenlab/branch_analysis.hpp"

#include "knudsenlab/evolution.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace knudsenlab {

namespace {

constexpr double kKernelTol = 1e-10;

bool hydro_kernel(const CollisionModel& model) { return model.kernel_dim == model.dim_v() + 2; }

// Kernel columns are psi_0, psi_{e_i} (i < N), energy.
RVec kernel_combination(const CollisionModel& model, const std::vector<double>& c) {
  RVec out = RVec::Zero(model.basis->size());
  for (std::size_t i = 0; i < c.size(); ++i) out += c[i] * model.kernel.col(static_cast<Eigen::Index>(i));
  return out.normalized();
}

double spectral_gap(const CollisionModel& model) {
  Eigen::SelfAdjointEigenSolver<RMat> es(sym(model.collision), Eigen::EigenvaluesOnly);
  double top = -1e300;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) < -kKernelTol) top = std::max(top, es.eigenvalues()(i));
  return -top;
}

double overlap(const CVec& a, const CVec& b) { return std::abs(a.dot(b)) / (a.norm() * b.norm()); }

[[noreturn]] void fail(const std::string& why, double zeta) {
  std::ostringstream msg;
  msg << "branch continuation failed at zeta = " << zeta << ": " << why;
  throw ContinuationFailure(msg.str(), zeta);
}

}  // namespace

CMat branch_operator(const CollisionModel& model, const std::array<double, 2>& omega, double zeta) {
  if (!(zeta >= 0.0)) throw std::invalid_argument("branch_operator: zeta must be >= 0");
  CMat b = model.collision.cast<cplx>();
  b += cplx(0.0, -zeta) * transport_symbol(*model.basis, omega).cast<cplx>();
  return b;
}

std::vector<int> branch_indices(const CollisionModel& model) {
  if (hydro_kernel(model)) return model.dim_v() == 2 ? std::vector<int>{-1, 0, 1, 2} : std::vector<int>{-1, 0, 1};
  if (model.kernel_dim == 1) return {0};
  throw std::invalid_argument("branch_indices: unsupported kernel dimension");
}

CVec leading_eigenvector(const CollisionModel& model, const std::array<double, 2>& omega, int j) {
  const int n = model.dim_v();
  if (model.kernel_dim == 1) {
    if (j != 0) throw std::invalid_argument("leading_eigenvector: one-dimensional kernel has only branch 0");
    return model.kernel.col(0).cast<cplx>();
  }
  if (!hydro_kernel(model)) throw std::invalid_argument("leading_eigenvector: unsupported kernel dimension");
  const double a = std::sqrt(2.0 / n);
  const double c = std::sqrt(1.0 + a * a);
  std::vector<double> coef(static_cast<std::size_t>(n) + 2, 0.0);
  auto momentum = [&](double s, std::array<double, 2> dir) {
    for (int i = 0; i < n; ++i) coef[static_cast<std::size_t>(i) + 1] = s * dir[static_cast<std::size_t>(i)];
  };
  switch (j) {
    case 1:  // Im lambda > 0: transport eigenvalue -c on the kernel
    case -1:
      coef[0] = 1.0;
      momentum(j == 1 ? -c : c, omega);
      coef.back() = a;
      break;
    case 0:
      coef[0] = a;
      coef.back() = -1.0;
      break;
    case 2:
      if (n != 2) throw std::invalid_argument("leading_eigenvector: shear branch needs N = 2");
      momentum(1.0, {-omega[1], omega[0]});
      break;
    default:
      throw std::invalid_argument("leading_eigenvector: unknown branch");
  }
  return kernel_combination(model, coef).cast<cplx>();
}

ModeSpectrum mode_spectrum(const CollisionModel& model, const std::array<double, 2>& omega, double zeta) {
  if (!(zeta >= 0.0)) throw std::invalid_argument("mode_spectrum: zeta must be >= 0");
  const std::vector<int> idx = branch_indices(model);
  const int d = static_cast<int>(idx.size());
  const int size = model.basis->size();
  ModeSpectrum s;
  s.zeta = zeta;
  s.omega = omega;
  const CMat identity = CMat::Identity(size, size);
  CMat rest = identity;

  if (zeta == 0.0) {
    Eigen::SelfAdjointEigenSolver<RMat> es(sym(model.collision));
    s.eigenvalues = es.eigenvalues().cast<cplx>();
    s.eigenvectors = es.eigenvectors().cast<cplx>();
    s.labels.assign(static_cast<std::size_t>(size), kRemainder);
    // eigenvalues ascending: the kernel block is the top d
    for (int i = 0; i < d; ++i) {
      const int col = size - d + i;
      if (std::abs(es.eigenvalues()(col)) > kKernelTol) fail("kernel dimension mismatch", zeta);
      const CVec e = leading_eigenvector(model, omega, idx[static_cast<std::size_t>(i)]);
      s.eigenvectors.col(col) = e;
      s.eigenvalues(col) = 0.0;
      s.labels[static_cast<std::size_t>(col)] = idx[static_cast<std::size_t>(i)];
      s.projectors[idx[static_cast<std::size_t>(i)]] = e * e.transpose();
      s.branch_eigenvalue[idx[static_cast<std::size_t>(i)]] = 0.0;
      rest -= s.projectors[idx[static_cast<std::size_t>(i)]];
    }
    s.projectors[kRemainder] = rest;
    s.separation = spectral_gap(model);
    return s;
  }

  Eigen::ComplexEigenSolver<CMat> es(branch_operator(model, omega, zeta));
  if (es.info() != Eigen::Success) fail("eigensolver did not converge", zeta);
  s.eigenvalues = es.eigenvalues();
  s.eigenvectors = es.eigenvectors();
  std::vector<int> order(static_cast<std::size_t>(size));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return s.eigenvalues(a).real() > s.eigenvalues(b).real(); });
  std::vector<int> top(order.begin(), order.begin() + d);
  double min_branch = 1e300, max_rest = -1e300;
  for (int i = 0; i < size; ++i) {
    const double re = s.eigenvalues(order[static_cast<std::size_t>(i)]).real();
    if (i < d) min_branch = std::min(min_branch, re);
    else max_rest = std::max(max_rest, re);
  }
  s.separation = min_branch - max_rest;
  if (s.separation < 0.1 * spectral_gap(model)) fail("fluid eigenvalues merge with the remainder", zeta);

  s.labels.assign(static_cast<std::size_t>(size), kRemainder);
  auto im = [&](int k) { return s.eigenvalues(k).imag(); };
  if (d == 1) {
    s.labels[static_cast<std::size_t>(top[0])] = 0;
  } else {
    std::sort(top.begin(), top.end(), [&](int a, int b) { return im(a) > im(b); });
    const double im_tol = 1e-3 * zeta;
    if (!(im(top.front()) > im_tol) || !(im(top.back()) < -im_tol)) fail("acoustic pair not separated", zeta);
    s.labels[static_cast<std::size_t>(top.front())] = 1;
    s.labels[static_cast<std::size_t>(top.back())] = -1;
    std::vector<int> middle(top.begin() + 1, top.end() - 1);
    for (int k : middle)
      if (std::abs(im(k)) > std::min(im(top.front()), -im(top.back())) / 2) fail("non-acoustic branch oscillates", zeta);
    if (middle.size() == 1) {
      s.labels[static_cast<std::size_t>(middle[0])] = 0;
    } else {
      const CVec shear = leading_eigenvector(model, omega, 2);
      const double o0 = overlap(shear, s.eigenvectors.col(middle[0]));
      const double o1 = overlap(shear, s.eigenvectors.col(middle[1]));
      if (std::abs(o0 - o1) < 0.1) fail("thermal and shear branches indistinguishable", zeta);
      s.labels[static_cast<std::size_t>(middle[0])] = o0 > o1 ? 2 : 0;
      s.labels[static_cast<std::size_t>(middle[1])] = o0 > o1 ? 0 : 2;
    }
  }
  for (int i = 0; i < size; ++i) {
    const int j = s.labels[static_cast<std::size_t>(i)];
    if (j == kRemainder) continue;
    const CVec r = s.eigenvectors.col(i);
    const cplx q = r.transpose() * r;
    if (std::abs(q) < 1e-8 * r.squaredNorm()) fail("near-defective branch eigenvalue", zeta);
    s.projectors[j] = r * r.transpose() / q;
    s.branch_eigenvalue[j] = s.eigenvalues(i);
    rest -= s.projectors[j];
  }
  s.projectors[kRemainder] = rest;
  return s;
}

BranchFit fit_dispersion(const CollisionModel& model, const std::array<double, 2>& omega,
                         const std::vector<double>& zeta_grid, const FitOptions& options) {
  if (zeta_grid.size() < 6) throw std::invalid_argument("fit_dispersion: need at least 6 grid points");
  for (double z : zeta_grid)
    if (!(z > 0.0)) throw std::invalid_argument("fit_dispersion: grid points must be positive");
  if (!(options.scan_step > 0.0) || !(options.scan_max > options.scan_step))
    throw std::invalid_argument("fit_dispersion: bad continuation scan");
  BranchFit fit;

  fit.continuation_limit = 0.0;
  for (int i = 1;; ++i) {
    const double z = i * options.scan_step;
    if (z > options.scan_max + 1e-12) break;
    try {
      mode_spectrum(model, omega, z);
      fit.continuation_limit = z;
    } catch (const ContinuationFailure&) {
      break;
    }
  }
  fit.n0 = 0.5 * fit.continuation_limit;
  const double grid_max = *std::max_element(zeta_grid.begin(), zeta_grid.end());
  if (grid_max > fit.n0 + 1e-12) {
    std::ostringstream msg;
    msg << "fit_dispersion: grid reaches zeta = " << grid_max << " beyond n0 = " << fit.n0;
    throw std::invalid_argument(msg.str());
  }

  const std::vector<int> idx = branch_indices(model);
  std::vector<ModeSpectrum> spectra;
  for (double z : zeta_grid) spectra.push_back(mode_spectrum(model, omega, z));
  // Im lambda is odd and Re lambda even in zeta, so the next term of each is fitted alongside
  // and alpha, beta carry O(zeta^4) and O(zeta^2) errors respectively.
  auto two_term = [](const std::vector<double>& z, const std::vector<double>& y, int p) {
    Eigen::Matrix2d n = Eigen::Matrix2d::Zero();
    Eigen::Vector2d r = Eigen::Vector2d::Zero();
    for (std::size_t i = 0; i < z.size(); ++i) {
      const Eigen::Vector2d phi(std::pow(z[i], p), std::pow(z[i], p + 2));
      n += phi * phi.transpose();
      r += phi * y[i];
    }
    return n.ldlt().solve(r)(0);
  };
  for (int j : idx) {
    std::vector<double> re, imag;
    for (const auto& s : spectra) {
      re.push_back(s.branch_eigenvalue.at(j).real());
      imag.push_back(s.branch_eigenvalue.at(j).imag());
    }
    fit.alpha[j] = two_term(zeta_grid, imag, 1);
    fit.beta[j] = -two_term(zeta_grid, re, 2);
    double rss = 0.0;
    for (const auto& s : spectra) {
      const cplx gamma = s.branch_eigenvalue.at(j) - cplx(-fit.beta[j] * s.zeta * s.zeta, fit.alpha[j] * s.zeta);
      fit.gamma_bound = std::max(fit.gamma_bound, std::abs(gamma) / std::pow(s.zeta, 3));
      rss += std::norm(gamma);
    }
    fit.fit_residuals[j] = std::sqrt(rss / static_cast<double>(spectra.size()));
  }

  std::vector<double> sigma_grid(zeta_grid);
  for (int i = 1; i <= options.sigma_points; ++i) sigma_grid.push_back(fit.n0 * i / options.sigma_points);
  fit.sigma = 1e300;
  for (double z : sigma_grid) {
    const ModeSpectrum s = z == zeta_grid.front() ? spectra.front() : mode_spectrum(model, omega, z);
    double top = -1e300;
    for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
      if (s.labels[static_cast<std::size_t>(i)] == kRemainder) top = std::max(top, s.eigenvalues(i).real());
    fit.sigma = std::min(fit.sigma, -top);
  }

  if (hydro_kernel(model)) {
    const int n = model.dim_v();
    fit.sound_speed = std::sqrt(1.0 + 2.0 / n);
    const auto smallest = std::min_element(spectra.begin(), spectra.end(),
                                           [](const ModeSpectrum& a, const ModeSpectrum& b) { return a.zeta < b.zeta; });
    fit.acoustic_collinearity = 1.0;
    fit.acoustic_collinearity_unit = 1.0;
    for (int j : {-1, 1}) {
      int col = -1;
      for (std::size_t i = 0; i < smallest->labels.size(); ++i)
        if (smallest->labels[i] == j) col = static_cast<int>(i);
      const CVec r = smallest->eigenvectors.col(col);
      fit.acoustic_collinearity = std::min(fit.acoustic_collinearity, overlap(leading_eigenvector(model, omega, j), r));
      // 1 -/+ omega.v + (|v|^2 - N)/2 in kernel coordinates; the energy column is (|v|^2 - N)/sqrt(2N)
      std::vector<double> coef(static_cast<std::size_t>(n) + 2, 0.0);
      coef[0] = 1.0;
      for (int i = 0; i < n; ++i) coef[static_cast<std::size_t>(i) + 1] = (j == 1 ? -1.0 : 1.0) * omega[static_cast<std::size_t>(i)];
      coef.back() = std::sqrt(n / 2.0);
      const RVec unit = kernel_combination(model, coef);
      fit.acoustic_collinearity_unit = std::min(fit.acoustic_collinearity_unit, overlap(unit.cast<cplx>(), r));
    }
  }
  return fit;
}

double remainder_constant(const CollisionModel& model, const std::array<double, 2>& omega,
                          const std::vector<double>& zeta_grid, double sigma, double tau_max, int tau_points) {
  if (tau_points < 2 || !(tau_max > 0.0)) throw std::invalid_argument("remainder_constant: bad tau grid");
  std::vector<double> zs{0.0};
  zs.insert(zs.end(), zeta_grid.begin(), zeta_grid.end());
  double worst = 0.0;
  for (double z : zs) {
    const ModeSpectrum s = mode_spectrum(model, omega, z);
    const ModePropagator prop(branch_operator(model, omega, z));
    for (int k = 0; k < tau_points; ++k) {
      const double tau = tau_max * k / (tau_points - 1);
      CMat r = prop.matrix(tau);
      for (const auto& [j, lam] : s.branch_eigenvalue) r -= std::exp(tau * lam) * s.projectors.at(j);
      Eigen::SelfAdjointEigenSolver<CMat> es(r.adjoint() * r, Eigen::EigenvaluesOnly);
      worst = std::max(worst, std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())) * std::exp(sigma * tau));
    }
  }
  return worst;
}

SpectralField semigroup_full(const SpectralField& h_in, const CollisionModel& model, double eps, double t) {
  SpectralField out = h_in.like_zero();
  for (int m : active_modes(h_in)) {
    const CMat a = mode_generator(model, h_in.grid.wavenumber(m), eps, true, true);
    out.coeffs.col(m) = CMat(t * a).exp() * h_in.coeffs.col(m);
  }
  return out;
}

SemigroupParts semigroup_decompose(const SpectralField& h_in, const CollisionModel& model, double eps, double t,
                                   const BranchFit& fit, double C_R) {
  if (!(t >= 0.0)) throw std::invalid_argument("semigroup_decompose: t must be >= 0");
  if (!(eps > 0.0) || eps > 1.0) throw std::invalid_argument("semigroup_decompose: eps must lie in (0, 1]");
  SemigroupParts parts;
  parts.t = t;
  parts.eps = eps;
  parts.full = h_in.like_zero();
  parts.remainder = h_in.like_zero();
  for (int j : branch_indices(model)) parts.branches.emplace(j, h_in.like_zero());
  for (int m : active_modes(h_in)) {
    const Wavenumber n = h_in.grid.wavenumber(m);
    const double len = std::hypot(double(n[0]), double(n[1]));
    const std::array<double, 2> omega = len > 0.0 ? std::array<double, 2>{n[0] / len, n[1] / len}
                                                  : std::array<double, 2>{1.0, 0.0};
    const double zeta = eps * len;
    const CVec x = h_in.coeffs.col(m);
    const CVec full = CMat(t * mode_generator(model, n, eps, true, true)).exp() * x;
    parts.full.coeffs.col(m) = full;
    CVec rem = full;
    if (zeta <= fit.n0) {
      const ModeSpectrum s = mode_spectrum(model, omega, zeta);
      for (const auto& [j, lam] : s.branch_eigenvalue) {
        const CVec part = std::exp(t * lam / (eps * eps)) * (s.projectors.at(j) * x);
        parts.branches.at(j).coeffs.col(m) = part;
        rem -= part;
      }
    } else {
      ++parts.modes_outside_n0;
    }
    parts.remainder.coeffs.col(m) = rem;
  }
  parts.remainder_norm = parts.remainder.coeffs.norm();
  parts.remainder_bound = C_R * std::exp(-fit.sigma * t / (eps * eps)) * h_in.coeffs.norm();
  return parts;
}

}  // namespace knudsenlab
