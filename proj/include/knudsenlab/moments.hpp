#pragma once

#include "knudsenlab/spectral_core.hpp"

namespace knudsenlab {

/// Macroscopic fields as Fourier coefficients on the spatial grid (real fields, Hermitian-symmetric coefficients).
/// theta = <(|v|^2 - N) M^{1/2}, h> / N.
struct MomentFields {
  SpatialGrid grid;
  int dim = 2;
  CVec rho;
  std::array<CVec, 2> u;
  CVec theta;
};

MomentFields extract_moments(const SpectralField& h);

/// [rho + v.u + (|v|^2 - N) theta / 2] M^{1/2} as a spectral field.
SpectralField kernel_field(BasisPtr basis, const MomentFields& m);

}  // namespace knudsenlab
