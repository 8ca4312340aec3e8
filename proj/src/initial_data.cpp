#include "knudsenlab/initial_data.hpp"

#include "knudsenlab/random.hpp"

#include <cmath>
#include <stdexcept>

namespace knudsenlab {

void remove_conserved_part(SpectralField& h, const CollisionModel& model) {
  const int z = h.grid.zero_mode();
  const CMat k = model.kernel.cast<cplx>();
  h.coeffs.col(z) -= k * (k.adjoint() * h.coeffs.col(z));
}

SpectralField random_field(const CollisionModel& model, const SpatialGrid& grid, std::uint64_t seed,
                           double amplitude, int max_mode, int max_degree) {
  if (max_mode < 0 || max_mode > grid.Mx) throw std::invalid_argument("random_field: max_mode outside the grid");
  if (!(amplitude >= 0.0)) throw std::invalid_argument("random_field: amplitude must be nonnegative");
  SpectralField h = SpectralField::zeros(model.basis, grid);
  const VelocityBasis& b = *model.basis;
  Lcg64 rng(seed);
  for (int m = 0; m < grid.modes(); ++m) {
    const Wavenumber n = grid.wavenumber(m);
    if (std::abs(n[0]) > max_mode || std::abs(n[1]) > max_mode) continue;
    const double damp = 1.0 / (1.0 + n[0] * n[0] + n[1] * n[1]);
    for (int s = 0; s < b.size(); ++s) {
      if (b.degree(s) > max_degree) continue;
      const double re = rng.symmetric(), im = rng.symmetric();
      h.coeffs(s, m) = damp / (1.0 + b.degree(s)) * cplx(re, im);
    }
  }
  enforce_reality(h);
  remove_conserved_part(h, model);
  const double norm = h.coeffs.norm();
  if (norm > 0.0) h.coeffs *= amplitude / norm;
  return h;
}

}  // namespace knudsenlab
