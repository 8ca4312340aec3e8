#pragma once

// Independent reference computations shared by the unit tests and the acceptance binary.
// None of these call the quantity they check.

#include "knudsenlab/operators.hpp"

#include <cmath>
#include <numbers>

namespace oracle {

using namespace knudsenlab;

/// M^{-1/2}(M[f] - f) at the velocity nodes for f = M + s M^{1/2} g, in Hermite coefficients.
/// M[f] is the local Maxwellian with the mass, momentum and energy of f, moments by quadrature.
inline RVec bgk_defect(const VelocityBasis& b, const RVec& g, double s) {
  const RVec g_nodes = b.inverse_matrix * g;
  const int N = b.dim_v;
  double rho = 0.0, e = 0.0;
  std::array<double, 2> m{0.0, 0.0};
  RVec f(b.num_nodes());
  for (int q = 0; q < b.num_nodes(); ++q) {
    const double M = b.maxwellian(q);
    f(q) = M + s * std::sqrt(M) * g_nodes(q);
    const double w = b.node_weight(q) * f(q) / M;  // f dv as a weight against M dv
    const auto& v = b.nodes[static_cast<std::size_t>(q)];
    rho += w;
    for (int i = 0; i < N; ++i) m[static_cast<std::size_t>(i)] += w * v[static_cast<std::size_t>(i)];
    e += w * (v[0] * v[0] + (N == 2 ? v[1] * v[1] : 0.0));
  }
  const std::array<double, 2> u{m[0] / rho, m[1] / rho};
  const double T = (e / rho - u[0] * u[0] - u[1] * u[1]) / N;
  RVec out(b.num_nodes());
  for (int q = 0; q < b.num_nodes(); ++q) {
    const auto& v = b.nodes[static_cast<std::size_t>(q)];
    double d2 = (v[0] - u[0]) * (v[0] - u[0]);
    if (N == 2) d2 += (v[1] - u[1]) * (v[1] - u[1]);
    const double local = rho * std::pow(2.0 * std::numbers::pi * T, -0.5 * N) * std::exp(-d2 / (2.0 * T));
    out(q) = (local - f(q)) / std::sqrt(b.maxwellian(q));
  }
  return b.forward_matrix * out;
}

/// Gamma(g, g) = (1/2) d^2/ds^2 of bgk_defect at s = 0, fourth-order central differences.
inline RVec bgk_gamma_fd(const VelocityBasis& b, const RVec& g, double s = 1e-3) {
  const RVec p1 = bgk_defect(b, g, s), m1 = bgk_defect(b, g, -s);
  const RVec p2 = bgk_defect(b, g, 2 * s), m2 = bgk_defect(b, g, -2 * s);
  const RVec c0 = bgk_defect(b, g, 0.0);
  const RVec second = (-p2 + 16.0 * p1 - 30.0 * c0 + 16.0 * m1 - m2) / (12.0 * s * s);
  return 0.5 * second;
}

/// d/ds of bgk_defect at s = 0: the linearized operator applied to g.
inline RVec bgk_linear_fd(const VelocityBasis& b, const RVec& g, double s = 1e-4) {
  return (bgk_defect(b, g, s) - bgk_defect(b, g, -s)) / (2.0 * s);
}

/// (1/w) Q(f_inf + s w h) at the nodes, in Hermite coefficients, for the semi-classical relaxation
/// Q(f) = int [M (1 - delta f) f_* - M_* (1 - delta f_*) f] dv_*, with f_inf = kappa M / (1 + delta kappa M)
/// and w = sqrt(kappa M) / (1 + delta kappa M). Integrals by the Gauss-Hermite rule.
inline RVec semiclassical_defect(const VelocityBasis& b, const SemiClassicalParams& p, const RVec& h, double s) {
  const RVec h_nodes = b.inverse_matrix * h;
  const double delta = p.delta_q, kappa = p.kappa_inf;
  const int nq = b.num_nodes();
  RVec f(nq), w(nq);
  double mass = 0.0, weighted = 0.0;  // int f dv, int M f dv
  for (int q = 0; q < nq; ++q) {
    const double M = b.maxwellian(q);
    w(q) = std::sqrt(kappa * M) / (1.0 + delta * kappa * M);
    f(q) = kappa * M / (1.0 + delta * kappa * M) + s * w(q) * h_nodes(q);
    mass += b.node_weight(q) * f(q) / M;
    weighted += b.node_weight(q) * f(q);
  }
  RVec out(nq);
  for (int q = 0; q < nq; ++q) {
    const double M = b.maxwellian(q);
    const double gain = M * (1.0 - delta * f(q)) * mass;
    const double loss = f(q) * (1.0 - delta * weighted);  // int M_* dv_* = 1
    out(q) = (gain - loss) / w(q);
  }
  return b.forward_matrix * out;
}

inline RVec semiclassical_gamma_fd(const VelocityBasis& b, const SemiClassicalParams& p, const RVec& h,
                                   double s = 1e-3) {
  const RVec p1 = semiclassical_defect(b, p, h, s), m1 = semiclassical_defect(b, p, h, -s);
  const RVec p2 = semiclassical_defect(b, p, h, 2 * s), m2 = semiclassical_defect(b, p, h, -2 * s);
  const RVec c0 = semiclassical_defect(b, p, h, 0.0);
  return 0.5 * (-p2 + 16.0 * p1 - 30.0 * c0 + 16.0 * m1 - m2) / (12.0 * s * s);
}

inline RVec semiclassical_linear_fd(const VelocityBasis& b, const SemiClassicalParams& p, const RVec& h,
                                    double s = 1e-4) {
  return (semiclassical_defect(b, p, h, s) - semiclassical_defect(b, p, h, -s)) / (2.0 * s);
}

/// Smooth deterministic velocity vector with low-degree content, no RNG involved.
inline RVec smooth_velocity_vector(const VelocityBasis& b, double scale = 1.0) {
  RVec g = RVec::Zero(b.size());
  for (int s = 0; s < b.size(); ++s) {
    const int d = b.degree(s);
    if (d <= 4) g(s) = scale * std::cos(1.3 * s + 0.4) / (1.0 + d);
  }
  return g;
}

/// Dimension of the numerical null space: singular values below rel * largest.
inline int null_dimension(const CMat& a, double rel = 1e-10) {
  const Eigen::JacobiSVD<CMat> svd(a);
  const auto& s = svd.singularValues();
  int count = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) count += s(i) <= rel * s(0) ? 1 : 0;
  return count;
}

}  // namespace oracle
