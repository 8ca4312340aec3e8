#pragma once

#include "knudsenlab/spectral_core.hpp"

namespace knudsenlab {

/// Scalar field on the truncated torus: modal vector of length grid.modes().
/// to_physical samples sum_n c_n e^{i n.x} on the n_phys^N grid (axis 0 slowest).
CVec to_physical(const SpatialGrid& grid, const CVec& modal);

/// Inverse of to_physical followed by truncation to |n_i| <= Mx.
CVec to_modal(const SpatialGrid& grid, const CVec& physical);

/// Dealiased product of two truncated scalar fields.
CVec product(const SpatialGrid& grid, const CVec& a, const CVec& b);

/// Row-wise versions: each row of `modal` (rows x modes) is one scalar field.
CMat to_physical_rows(const SpatialGrid& grid, const CMat& modal);
CMat to_modal_rows(const SpatialGrid& grid, const CMat& physical);

}  // namespace knudsenlab
