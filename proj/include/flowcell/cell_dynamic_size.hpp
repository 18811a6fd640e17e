#pragma once

// Cell list whose cells are shrunken copies of the deformed box. Each cell
// has heights h_i / c_i >= d_cut, so the 27 surrounding cells always cover
// the interaction ball.

#include <array>
#include <vector>

#include "flowcell/cell_storage.hpp"
#include "flowcell/lattice.hpp"

namespace flowcell {

struct NeighborCell {
  CellIndex cell;
  IVec3 shift;  // lattice translation applied to occupants of `cell`
};

struct DSCellGrid {
  LatticeBasis basis;
  double d_cut = 0.0;
  CellStorage cells;
  ScanPlan plan;  // rebuilt only when the counts change
  RowCopies copies;

  const std::array<int, 3>& counts() const { return cells.counts; }
  CellIndex cell_of(std::size_t particle) const { return cells.unflatten(static_cast<int>(cells.flat_of[particle])); }
};

// c_i = floor(h_i / d_cut). Throws DegenerateGrid when any c_i < 3.
std::array<int, 3> ds_cell_counts(const LatticeBasis& l, double d_cut);

// Positions must already be wrapped into the unit cell.
DSCellGrid build_ds_grid(const LatticeBasis& l, double d_cut, const ParticleSet& ps);
// Reuses the grid's buffers.
void rebuild_ds_grid(DSCellGrid& grid, const LatticeBasis& l, double d_cut, std::span<const Vec3> q);

// The 27 cells around `cell`, in lexicographic (dz, dy, dx) order.
std::array<NeighborCell, 27> ds_neighborhood(const CellIndex& cell, const DSCellGrid& grid);

// 27 det(L) / (c1 c2 c3).
double ds_neighborhood_volume(const LatticeBasis& l, const std::array<int, 3>& c);

// The 13 offsets that, together with the self cell, visit every unordered
// pair of cells once.
const std::array<std::array<int, 3>, 13>& half_stencil();

struct ScanOptions {
  // Test hook: skip the +x face neighbor of every cell so the scan misses
  // pairs on purpose.
  bool drop_face_neighbor = false;
};

// Calls visit(a, b, d, r2) for every pair with r2 < cut2 where d is the
// displacement from particle a to the nearest image of particle b. Returns
// the number of distance checks.
template <class Visitor>
std::uint64_t ds_scan_pairs(const DSCellGrid& grid, double cut2, Visitor&& visit, ScanOptions opt = {}) {
  return scan_plan(grid.cells, grid.plan, grid.copies, cut2, visit, opt.drop_face_neighbor);
}

}  // namespace flowcell
