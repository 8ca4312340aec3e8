#include "knudsenlab/hypocoercivity.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace knudsenlab {

namespace {

void require_condition(bool ok, int index, double value) {
  if (ok) return;
  std::ostringstream msg;
  msg << "hypocoercive coefficient choice " << index << " unsatisfiable (value " << value << ")";
  throw std::domain_error(msg.str());
}

MultiIndex delta(int i) {
  MultiIndex d{0, 0};
  d[static_cast<std::size_t>(i)] = 1;
  return d;
}

MultiIndex minus(const MultiIndex& a, const MultiIndex& b) { return {a[0] - b[0], a[1] - b[1]}; }

std::vector<MultiIndex> indices_of_degree(int dim, int p) {
  std::vector<MultiIndex> out;
  for (const auto& l : multi_indices_upto(dim, p))
    if (abs_degree(l) == p) out.push_back(l);
  return out;
}

int count_high_v(int dim, int p) {
  int n = 0;
  for (const auto& pr : derivative_pairs(dim, p))
    if (abs_degree(pr.j) + abs_degree(pr.l) == p && abs_degree(pr.j) >= 2) ++n;
  return n;
}

int count_li(int dim, int p) {
  int n = 0;
  for (const auto& l : indices_of_degree(dim, p))
    for (int i = 0; i < dim; ++i)
      if (l[static_cast<std::size_t>(i)] > 0) ++n;
  return n;
}

void check_positive(const OperatorConstants& c) {
  if (!(c.lambda > 0 && c.nu[0] > 0 && c.nu[1] > 0 && c.nu[3] > 0 && c.nu[5] > 0 && c.CL > 0))
    throw std::domain_error("hypocoercive coefficients need lambda, nu_0, nu_1, nu_3, nu_5, C^L > 0");
}

H1Block standard_h1(const OperatorConstants& c, std::array<double, 5>& cond) {
  const double l = c.lambda, n0 = c.nu[0], n1 = c.nu[1], n3 = c.nu[3], n4 = c.nu[4];
  const double K1 = (n1 / n0) * (2.0 * n4 + 2.0 * c.C_delta_dv);
  const double Kdx = c.Cp * (2.0 * n4 + 2.0 * c.C_delta_dv) + 3.0 * n1 / (n0 * n3);
  H1Block h;
  h.b = 2.0 / n3;
  h.A = 2.0 * (h.b * K1 + 1.0) / l;
  h.a = 2.0 * (h.b * Kdx + 1.0);
  h.e = 4.0 * c.CL * h.a / (h.b * n3 - 1.0);
  h.alpha = 2.0 * std::max({(c.CL * h.e * h.a + 1.0) / l, h.a * h.a / h.b, h.b});
  cond = {-n3 * h.b, h.b * K1 - l * h.A, h.b * Kdx - h.a, 2.0 * c.CL * h.a / h.e - h.b * n3,
          c.CL * h.e * h.a - l * h.alpha};
  return h;
}

H1Block perp_h1(const OperatorConstants& c, std::array<double, 5>& cond) {
  const double l = c.lambda, n0 = c.nu[0], n1 = c.nu[1], n3 = c.nu[3], n4 = c.nu[4];
  const double cpi1 = c.Cpi.at(1), cpi = c.Cpi_fluid;
  const double K1 = (n1 / n0) * (2.0 * n4 + 2.0 * c.C_delta_dv);
  const double Kdx = 9.0 * n1 / (n0 * n3) * (1.0 + cpi1 + cpi1 * cpi1);
  const double Kp = 8.0 * c.CL * c.CL * cpi1 * cpi * c.Cp + 1.0 / (4.0 * cpi);
  H1Block h;
  h.b = 4.0 / n3;
  h.A = 2.0 * (h.b * K1 + 1.0) / l;
  h.a = 4.0 * (h.b * Kdx + 1.0);
  h.e = std::max(1.0, 2.0 * h.a / (4.0 * cpi1 * cpi * c.Cp * (h.b * n3 / 2.0 - 1.0)));
  h.alpha = 2.0 * std::max({(h.a * Kp * h.e + 1.0) / l, h.a * h.a / h.b, h.b});
  cond = {-h.b * n3 / 2.0, K1 * h.b - l * h.A, Kdx * h.b - h.a / 2.0,
          h.a / (4.0 * cpi1 * cpi * c.Cp * h.e) - h.b * n3 / 2.0, Kp * h.e * h.a - l * h.alpha};
  return h;
}

void verify_h1(const H1Block& h, const std::array<double, 5>& cond) {
  require_condition(cond[0] < -1.0, 1, cond[0]);
  for (int i = 1; i < 5; ++i) require_condition(cond[static_cast<std::size_t>(i)] <= -1.0, i + 1, cond[static_cast<std::size_t>(i)]);
  require_condition(h.a * h.a <= h.alpha * h.b, 6, h.a * h.a - h.alpha * h.b);
  require_condition(h.b <= h.alpha, 7, h.b - h.alpha);
}

LevelBlock level_block(const OperatorConstants& c, int p, NormVariant variant, int dim) {
  const double l = c.lambda, n0 = c.nu[0], n1 = c.nu[1], n5 = c.nu[5];
  const double cpi = c.Cpi_fluid;
  LevelBlock blk;
  blk.level = p;
  blk.B = 2.0 / n5;
  const double KQ = 1.0 / (2.0 * std::max(1.0, cpi));
  blk.Bp = 4.0 / KQ;
  blk.b = 2.0 / n5;
  if (variant == NormVariant::standard) {
    blk.a = 2.0 * (3.0 * n1 * blk.b / (n5 * n0) + 1.0);
    blk.e = 4.0 * c.CL * blk.a / (n5 * blk.b - 1.0);
    blk.alpha = 2.0 * std::max({(c.CL * blk.e * blk.a + 1.0) / l, blk.a * blk.a / blk.b, blk.b});
  } else {
    const double cpik = c.Cpi.at(static_cast<std::size_t>(p));
    const double Kdl = 9.0 * n1 / (n0 * n5) * (2.0 * cpik + 1.0);
    const double Kt = 8.0 * c.CL * c.CL * cpik * cpi * dim + 1.0 / (2.0 * cpi);
    blk.a = 4.0 * (dim * blk.b * Kdl + 1.0);
    blk.e = std::max(1.0, 2.0 * blk.a / (4.0 * cpik * cpi * dim * (blk.b * n5 - 1.0)));
    blk.alpha = 2.0 * std::max({(Kt * blk.e * blk.a + 1.0) / l, blk.a * blk.a / blk.b, blk.b});
  }
  require_condition(blk.a * blk.a <= blk.alpha * blk.b, 6, blk.a * blk.a - blk.alpha * blk.b);
  return blk;
}

}  // namespace

HypNormCoefficients build_h1_coefficients(const OperatorConstants& c, int dim) {
  return build_hk_coefficients(c, 1, NormVariant::standard, dim);
}

HypNormCoefficients build_hk_coefficients(const OperatorConstants& c, int k, NormVariant variant, int dim) {
  if (k < 1 || k > 3) throw std::invalid_argument("build_hk_coefficients: k must be 1, 2 or 3");
  if (dim < 1 || dim > 2) throw std::invalid_argument("build_hk_coefficients: dim must be 1 or 2");
  if (static_cast<int>(c.Cpi.size()) <= k || static_cast<int>(c.C_delta_level.size()) < k)
    throw std::invalid_argument("build_hk_coefficients: constants ledger built for a lower k_max");
  check_positive(c);
  HypNormCoefficients out;
  out.k = k;
  out.variant = variant;
  out.dim = dim;
  out.h1 = variant == NormVariant::standard ? standard_h1(c, out.h1_conditions) : perp_h1(c, out.h1_conditions);
  verify_h1(out.h1, out.h1_conditions);

  const double n0 = c.nu[0], n1 = c.nu[1], n3 = c.nu[3], n5 = c.nu[5];
  const double K0_1 = 1.0 / std::max(2.0, 2.0 * c.Cpi_fluid * (1.0 + c.Cp));
  const double K1_1 = out.h1.A * n1 / (n0 * c.lambda) + out.h1.alpha * n1 / (n0 * c.lambda) +
                      n1 * out.h1.e * out.h1.a / (c.CL * n0);
  const double K2_1 = 3.0 * n1 * out.h1.b / (n0 * n3);

  for (int p = 2; p <= k; ++p) out.hk_blocks.push_back(level_block(c, p, variant, dim));

  // C_k = 1; lower levels absorb the H^{p-1} remainders of the levels above.
  std::vector<double> cplus(static_cast<std::size_t>(k) + 1, 0.0);
  for (int p = 2; p <= k; ++p) {
    const auto& blk = out.hk_blocks[static_cast<std::size_t>(p - 2)];
    const double Kprev = 2.0 * (c.C_delta_level[static_cast<std::size_t>(p - 1)] + c.nu[6]);
    cplus[static_cast<std::size_t>(p)] =
        (count_high_v(dim, p) * Kprev * blk.B + count_li(dim, p) * blk.Bp * Kprev * blk.b) * (n1 / n0);
  }
  out.combo.assign(static_cast<std::size_t>(k), 0.0);
  out.combo[static_cast<std::size_t>(k - 1)] = 1.0;
  for (int q = k - 1; q >= 1; --q) {
    double s = 0.0;
    for (int p = q + 1; p <= k; ++p) s += out.combo[static_cast<std::size_t>(p - 1)] * cplus[static_cast<std::size_t>(p)];
    const double kdiss = q == 1 ? K0_1 : 1.0;
    out.combo[static_cast<std::size_t>(q - 1)] = 2.0 * s / kdiss;
  }

  if (k == 1) {
    out.eps_max = 1.0;
    out.K0 = K0_1;
  } else {
    out.eps_max = std::min(1.0, std::sqrt(std::pow(n5 * n0, 2) / (6.0 * dim * n1 * n1)));
    out.K0 = 1.0;
    for (int q = 1; q < k; ++q)
      out.K0 = std::min(out.K0, out.combo[static_cast<std::size_t>(q - 1)] * (q == 1 ? K0_1 : 1.0) / 2.0);
  }
  out.K1 = out.combo[0] * K1_1;
  out.K2 = out.combo[0] * K2_1;
  for (int p = 2; p <= k; ++p) {
    const auto& blk = out.hk_blocks[static_cast<std::size_t>(p - 2)];
    const double cp = out.combo[static_cast<std::size_t>(p - 1)];
    out.K1 += cp * blk.Bp * count_li(dim, p) *
              (blk.alpha * n1 / (n0 * c.lambda) + n1 * blk.e * blk.a / (c.CL * n0));
    out.K2 += cp * (blk.Bp * count_li(dim, p) * 3.0 * n1 * blk.b / (n0 * n5) +
                    blk.B * count_high_v(dim, p) * 2.0 * n1 / (n0 * n5));
  }
  return out;
}

int HypNormEvaluator::vel_index(const MultiIndex& j, bool perp, const CollisionModel& model) {
  for (std::size_t i = 0; i < vel_keys_.size(); ++i)
    if (vel_keys_[i].first == j && vel_keys_[i].second == perp) return static_cast<int>(i);
  RMat d = velocity_derivative(*model.basis, j);
  vel_sparse_.push_back(d.cast<cplx>().sparseView());
  vel_perp_.push_back(perp);
  if (perp) d = d * (RMat::Identity(d.cols(), d.cols()) - model.projector);
  vel_.push_back(std::move(d));
  vel_keys_.emplace_back(j, perp);
  return static_cast<int>(vel_.size()) - 1;
}

HypNormEvaluator::HypNormEvaluator(const HypNormCoefficients& coeffs, const CollisionModel& model)
    : coeffs_(coeffs), kernel_(model.kernel.cast<cplx>()) {
  if (model.dim_v() != coeffs.dim) throw std::invalid_argument("HypNormEvaluator: dimension mismatch");
  const int dim = coeffs.dim;
  const bool perp = coeffs.variant == NormVariant::perp;
  const int vpow = perp ? 0 : 2;
  const MultiIndex zero{0, 0};
  auto square = [&](double w, int pw, const MultiIndex& j, const MultiIndex& l, bool on_perp) {
    const int v = vel_index(j, on_perp, model);
    terms_.push_back({w, pw, v, v, l, l});
  };
  auto cross = [&](double w, const MultiIndex& j1, const MultiIndex& l1, const MultiIndex& j2, const MultiIndex& l2) {
    terms_.push_back({w, 1, vel_index(j1, false, model), vel_index(j2, false, model), l1, l2});
  };

  const double c1 = coeffs.combo.at(0);
  const H1Block& h = coeffs.h1;
  square(c1 * h.A, 0, zero, zero, false);
  for (int i = 0; i < dim; ++i) {
    square(c1 * h.alpha, 0, zero, delta(i), false);
    square(c1 * h.b, vpow, delta(i), zero, perp);
    cross(c1 * h.a, zero, delta(i), delta(i), zero);
  }
  for (const auto& blk : coeffs.hk_blocks) {
    const double cp = coeffs.combo.at(static_cast<std::size_t>(blk.level - 1));
    for (const auto& pr : derivative_pairs(dim, blk.level))
      if (abs_degree(pr.j) + abs_degree(pr.l) == blk.level && abs_degree(pr.j) >= 2)
        square(cp * blk.B, vpow, pr.j, pr.l, perp);
    for (const auto& l : indices_of_degree(dim, blk.level))
      for (int i = 0; i < dim; ++i) {
        if (l[static_cast<std::size_t>(i)] == 0) continue;
        const MultiIndex lm = minus(l, delta(i));
        square(cp * blk.Bp * blk.alpha, 0, zero, l, false);
        square(cp * blk.Bp * blk.b, vpow, delta(i), lm, perp);
        cross(cp * blk.Bp * blk.a, delta(i), lm, zero, l);
      }
  }
  for (const auto& t : terms_)
    gram_.push_back((vel_[static_cast<std::size_t>(t.v1)].transpose() * vel_[static_cast<std::size_t>(t.v2)]).cast<cplx>());
}

double HypNormEvaluator::operator()(const SpectralField& h, double eps) const {
  if (!(eps > 0.0) || eps > coeffs_.eps_max * (1.0 + 1e-12))
    throw std::invalid_argument("eval_hyp_norm: eps outside (0, eps_max]");
  const int dim = coeffs_.dim;
  const std::vector<int> modes = active_modes(h);
  if (modes.empty()) return 0.0;
  CMat cols(h.coeffs.rows(), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t c = 0; c < modes.size(); ++c) cols.col(static_cast<Eigen::Index>(c)) = h.coeffs.col(modes[c]);
  CMat perp_cols;
  if (std::find(vel_perp_.begin(), vel_perp_.end(), true) != vel_perp_.end())
    perp_cols = cols - kernel_ * (kernel_.adjoint() * cols);
  std::vector<CMat> v;
  v.reserve(vel_.size());
  for (std::size_t i = 0; i < vel_.size(); ++i) v.push_back(vel_sparse_[i] * (vel_perp_[i] ? perp_cols : cols));
  double total = 0.0;
  for (const auto& t : terms_) {
    const Eigen::RowVectorXcd ip =
        (v[static_cast<std::size_t>(t.v1)].conjugate().cwiseProduct(v[static_cast<std::size_t>(t.v2)])).colwise().sum();
    double part = 0.0;
    for (std::size_t c = 0; c < modes.size(); ++c) {
      const Wavenumber n = h.grid.wavenumber(modes[c]);
      const cplx s = std::conj(fourier_symbol(n, t.l1, dim)) * fourier_symbol(n, t.l2, dim);
      part += (s * ip(static_cast<Eigen::Index>(c))).real();
    }
    total += t.weight * std::pow(eps, t.eps_power) * part;
  }
  return total;
}

CMat HypNormEvaluator::mode_matrix(const Wavenumber& n, double eps) const {
  const int dim = coeffs_.dim;
  const Eigen::Index size = vel_.front().cols();
  CMat q = CMat::Zero(size, size);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Term& t = terms_[i];
    const cplx s = std::conj(fourier_symbol(n, t.l1, dim)) * fourier_symbol(n, t.l2, dim);
    const CMat& block = gram_[i];
    const double w = t.weight * std::pow(eps, t.eps_power);
    q += 0.5 * w * (s * block + std::conj(s) * block.adjoint());
  }
  return q;
}

double eval_hyp_norm(const SpectralField& h, const HypNormCoefficients& coeffs, double eps,
                     const CollisionModel& model) {
  return HypNormEvaluator(coeffs, model)(h, eps);
}

EquivalenceBounds equivalence_constants(const HypNormCoefficients& coeffs, const CollisionModel& model,
                                        const SpatialGrid& grid, double eps) {
  const HypNormEvaluator eval(coeffs, model);
  const VelocityBasis& b = *model.basis;
  const int dim = coeffs.dim;
  const bool perp = coeffs.variant == NormVariant::perp;
  std::vector<std::pair<DerivativePair, RMat>> ref;
  for (const auto& pr : derivative_pairs(dim, coeffs.k)) {
    const RMat d = velocity_derivative(b, pr.j);
    ref.emplace_back(pr, d.transpose() * d);
  }
  EquivalenceBounds out{1e300, 0.0};
  const int top = grid.Mx;
  for (int n0 = 0; n0 <= top; ++n0)
    for (int n1 = 0; n1 <= (dim == 2 ? n0 : 0); ++n1) {
      const Wavenumber n{n0, n1};
      CMat r = CMat::Zero(b.size(), b.size());
      for (const auto& [pr, g] : ref) {
        const double w = std::norm(fourier_symbol(n, pr.l, dim)) * (abs_degree(pr.j) >= 1 && !perp ? eps * eps : 1.0);
        r += w * g.cast<cplx>();
      }
      const CMat q = eval.mode_matrix(n, eps);
      Eigen::LLT<CMat> llt(r);
      const CMat linv = llt.matrixL().solve(CMat::Identity(r.rows(), r.cols()));
      const CMat m = linv * q * linv.adjoint();
      Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
      out.lower = std::min(out.lower, es.eigenvalues().minCoeff());
      out.upper = std::max(out.upper, es.eigenvalues().maxCoeff());
    }
  return out;
}

double eval_E_functional(const TrajectoryRecord& record) {
  if (record.times.empty()) throw std::invalid_argument("eval_E_functional: empty record");
  const auto& hyp = record.norm("HypEps");
  const auto& lam = record.norm("HkLambda");
  double integral = 0.0;
  double best = hyp[0] * hyp[0];
  for (std::size_t i = 1; i < record.times.size(); ++i) {
    const double dt = record.times[i] - record.times[i - 1];
    integral += 0.5 * dt * (lam[i - 1] * lam[i - 1] + lam[i] * lam[i]);
    best = std::max(best, hyp[i] * hyp[i] + integral);
  }
  return best;
}

DissipationReport dissipation_monitor(const TrajectoryRecord& record, const HypNormCoefficients& coeffs,
                                      const OperatorConstants& constants) {
  const std::size_t n = record.times.size();
  if (n < 3) throw std::invalid_argument("dissipation_monitor: fewer than 3 samples");
  const auto& t = record.times;
  const auto& hyp = record.norm("HypEps");
  const auto& hk = record.norm("Hk");
  const auto& hkl = record.norm("HkLambda");
  const auto& l2 = record.norm("L2");
  const double eps = record.eps;
  DissipationReport rep;
  double scale = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double lhs = (hyp[i + 1] * hyp[i + 1] - hyp[i - 1] * hyp[i - 1]) / (t[i + 1] - t[i - 1]);
    const double g = record.nonlinear ? constants.Cgamma * 2.0 * hk[i] * hkl[i] : 0.0;
    const double rhs = -coeffs.K0 * hkl[i] * hkl[i] + (coeffs.K1 + eps * eps * coeffs.K2) * g * g;
    rep.times.push_back(t[i]);
    rep.lhs.push_back(lhs);
    rep.rhs_bound.push_back(rhs);
    rep.gamma_controls.push_back(g);
    scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
  }
  rep.slack = 1e-8 * scale;
  for (std::size_t i = 0; i < rep.lhs.size(); ++i)
    if (!(rep.lhs[i] <= rep.rhs_bound[i] + rep.slack)) rep.violations.push_back(i);

  // d/dt |h|^2 = 2 eps^-2 <Lh,h> + 2 eps^-1 <Gamma,h>
  if (record.collision_form.size() == n) {
    double worst = 0.0, richardson = 0.0, id_scale = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double d1 = (l2[i + 1] * l2[i + 1] - l2[i - 1] * l2[i - 1]) / (t[i + 1] - t[i - 1]);
      const double g = record.gamma_form.size() == n ? record.gamma_form[i] : 0.0;
      const double exact = 2.0 * record.collision_form[i] / (eps * eps) + 2.0 * g / eps;
      worst = std::max(worst, std::abs(d1 - exact));
      id_scale = std::max(id_scale, std::abs(exact));
      if (i >= 2 && i + 2 < n) {
        const double d2 = (l2[i + 2] * l2[i + 2] - l2[i - 2] * l2[i - 2]) / (t[i + 2] - t[i - 2]);
        richardson = std::max(richardson, std::abs(d2 - d1) / 3.0);
      }
    }
    rep.identity_defect = worst;
    rep.identity_tolerance = 10.0 * richardson + 1e-8 * id_scale;
    rep.identity_pass = worst <= rep.identity_tolerance;
  }
  return rep;
}

}  // namespace knudsenlab
