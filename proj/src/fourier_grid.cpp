#include "knudsenlab/fourier_grid.hpp"

#include <numbers>
#include <vector>

namespace knudsenlab {

CVec to_physical(const SpatialGrid& grid, const CVec& modal) {
  return to_physical_rows(grid, modal.transpose()).transpose();
}

CVec to_modal(const SpatialGrid& grid, const CVec& physical) {
  return to_modal_rows(grid, physical.transpose()).transpose();
}

CVec product(const SpatialGrid& grid, const CVec& a, const CVec& b) {
  return to_modal(grid, to_physical(grid, a).cwiseProduct(to_physical(grid, b)));
}

namespace {

// Truncated DFT matrices: phys(p) = sum_k e^{2 pi i k p / n} modal(k) for |k| <= Mx.
struct DftMatrices {
  CMat synth;     // n_phys x side
  CMat analysis;  // side x n_phys, includes 1 / n_phys
};

const DftMatrices& dft_matrices(const SpatialGrid& g) {
  thread_local std::vector<std::pair<std::pair<int, int>, DftMatrices>> cache;
  for (const auto& [key, mats] : cache)
    if (key.first == g.Mx && key.second == g.n_phys) return mats;
  const int side = g.side(), n = g.n_phys;
  DftMatrices d{CMat(n, side), CMat(side, n)};
  for (int p = 0; p < n; ++p)
    for (int c = 0; c < side; ++c) {
      const long k = c - g.Mx;
      const double phase = 2.0 * std::numbers::pi * static_cast<double>((k * p) % n) / n;
      d.synth(p, c) = std::polar(1.0, phase);
      d.analysis(c, p) = std::polar(1.0 / n, -phase);
    }
  cache.emplace_back(std::make_pair(g.Mx, g.n_phys), std::move(d));
  return cache.back().second;
}

}  // namespace

// Rows are fields; mode column (a, b) sits at a * side + b and physical column (p0, p1) at p0 * n + p1.
// Viewing an R x (s * s) block as an (R s) x s matrix puts the slow axis in its columns.
CMat to_physical_rows(const SpatialGrid& grid, const CMat& modal) {
  const DftMatrices& d = dft_matrices(grid);
  const Eigen::Index r = modal.rows(), side = grid.side(), n = grid.n_phys;
  if (grid.dim_x == 1) return modal * d.synth.transpose();
  Eigen::Map<const CMat> m(modal.data(), r * side, side);
  const CMat slow = m * d.synth.transpose();  // (r side) x n: rows (row, b), columns p0
  CMat out(r, n * n);
  for (Eigen::Index p0 = 0; p0 < n; ++p0) {
    Eigen::Map<const CMat> blk(slow.col(p0).data(), r, side);
    out.middleCols(p0 * n, n).noalias() = blk * d.synth.transpose();
  }
  return out;
}

CMat to_modal_rows(const SpatialGrid& grid, const CMat& physical) {
  const DftMatrices& d = dft_matrices(grid);
  const Eigen::Index r = physical.rows(), side = grid.side(), n = grid.n_phys;
  if (grid.dim_x == 1) return physical * d.analysis.transpose();
  Eigen::Map<const CMat> m(physical.data(), r * n, n);
  const CMat slow = m * d.analysis.transpose();  // (r n) x side: rows (row, p1), columns a
  CMat out(r, side * side);
  for (Eigen::Index a = 0; a < side; ++a) {
    Eigen::Map<const CMat> blk(slow.col(a).data(), r, n);
    out.middleCols(a * side, side).noalias() = blk * d.analysis.transpose();
  }
  return out;
}

}  // namespace knudsenlab
