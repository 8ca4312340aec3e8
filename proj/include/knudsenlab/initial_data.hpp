#pragma once

#include "knudsenlab/operators.hpp"

#include <cstdint>

namespace knudsenlab {

/// Seeded smooth real field: Lcg64 draws in (mode, slot) order for |n_i| <= max_mode and
/// velocity degree <= max_degree, damped by 1 / ((1 + |n|^2)(1 + |alpha|)), then made real,
/// stripped of its x-averaged kernel moments and scaled to L^2 norm `amplitude`.
SpectralField random_field(const CollisionModel& model, const SpatialGrid& grid, std::uint64_t seed,
                           double amplitude, int max_mode = 3, int max_degree = 4);

/// Removes the x-averaged kernel moments, i.e. projects onto Ker(G_eps)^perp.
void remove_conserved_part(SpectralField& h, const CollisionModel& model);

}  // namespace knudsenlab
