#include "knudsenlab/moments.hpp"

#include <cmath>

namespace knudsenlab {

namespace {

MultiIndex unit(int axis, int degree) {
  MultiIndex a{0, 0};
  a[static_cast<std::size_t>(axis)] = degree;
  return a;
}

}  // namespace

MomentFields extract_moments(const SpectralField& h) {
  const VelocityBasis& b = *h.basis;
  MomentFields m;
  m.grid = h.grid;
  m.dim = b.dim_v;
  m.rho = h.coeffs.row(b.flat({0, 0})).transpose();
  m.theta = CVec::Zero(h.grid.modes());
  for (int i = 0; i < 2; ++i) m.u[static_cast<std::size_t>(i)] = CVec::Zero(h.grid.modes());
  for (int i = 0; i < b.dim_v; ++i) {
    m.u[static_cast<std::size_t>(i)] = h.coeffs.row(b.flat(unit(i, 1))).transpose();
    m.theta += std::sqrt(2.0) / b.dim_v * h.coeffs.row(b.flat(unit(i, 2))).transpose();
  }
  return m;
}

SpectralField kernel_field(BasisPtr basis, const MomentFields& m) {
  SpectralField h = SpectralField::zeros(basis, m.grid);
  const VelocityBasis& b = *basis;
  h.coeffs.row(b.flat({0, 0})) = m.rho.transpose();
  for (int i = 0; i < b.dim_v; ++i) {
    h.coeffs.row(b.flat(unit(i, 1))) = m.u[static_cast<std::size_t>(i)].transpose();
    // (v_i^2 - 1) M^{1/2} / 2 = psi_{2 e_i} / sqrt(2)
    h.coeffs.row(b.flat(unit(i, 2))) = m.theta.transpose() / std::sqrt(2.0);
  }
  return h;
}

}  // namespace knudsenlab
