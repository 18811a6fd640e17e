#pragma once

// Cell list with axis-aligned rectangular cells over the box rotated so that
// v1 lies on x and v2 in the xy plane. Points outside the prism
// [0,r11)x[0,r22)x[0,r33) are moved in by lattice translations, and
// neighborhoods crossing the y or z faces are widened to absorb the offset
// between replicas.

#include <array>
#include <vector>

#include "flowcell/cell_dynamic_size.hpp"

namespace flowcell {

struct RotatedBasis {
  Mat3 qrot;  // proper rotation
  Mat3 r;     // upper triangular, positive diagonal; qrot * r == L
};

RotatedBasis qr_orient(const LatticeBasis& l);

// pt is in the rotated frame with fractional coordinates in [0,1)^3.
Vec3 do_rearrange(const Vec3& pt, const RotatedBasis& r);

// Start and width of a run of virtual cells covering a 3-cell span.
struct DOWindow {
  int start = 0;
  int count = 3;
  friend bool operator==(const DOWindow&, const DOWindow&) = default;
};

// Everything the neighborhood shape depends on: cell counts, the row window
// across each z face and the column window for each replica shift (n2, n3),
// all relative to the centre cell.
struct DOWindows {
  std::array<int, 3> l{};
  std::array<DOWindow, 3> rows;                  // index n3 + 1
  std::array<std::array<DOWindow, 3>, 3> cols;   // index [n3 + 1][n2 + 1]
  friend bool operator==(const DOWindows&, const DOWindows&) = default;
};

DOWindows do_windows(const RotatedBasis& rot, const std::array<int, 3>& l);

// Scan list for one (j, k) row of cells, valid for every i: the deduplicated
// neighborhood, excluding the cell itself, as runs of consecutive columns.
struct DORun {
  int dx;     // first column minus i, before wrapping along x
  int width;
  int cj, ck;
  int n2, n3;
  bool plus_x;  // the in-box +x face neighbor
};

struct DOStencil {
  DOWindows key;
  std::vector<std::uint32_t> row_start;  // per (k * l2 + j), size l2 l3 + 1
  std::vector<DORun> runs;
  std::size_t cells = 0;                 // neighbor cells covered by all runs
};

// Keeps the lexicographically positive half of the in-box cells and, for
// cells across a face, only those whose replica shift (n3, n2) is
// lexicographically positive. Every pair within d_cut sees the other across
// the same seam with the opposite shift, so each pair is visited once.
DOStencil build_do_stencil(const DOWindows& w);

struct DOCellGrid {
  LatticeBasis basis;
  RotatedBasis rot;
  double d_cut = 0.0;
  Vec3 width;        // r_ii / l_i
  CellStorage cells; // sorted_q holds the rearranged Cartesian positions
  DOStencil stencil; // rebuilt only when the window layout changes
  ScanPlan plan;     // the stencil resolved against row copies
  RowCopies copies;

  const std::array<int, 3>& counts() const { return cells.counts; }
  CellIndex cell_of(std::size_t particle) const { return cells.unflatten(static_cast<int>(cells.flat_of[particle])); }
};

// l_i = floor(r_ii / d_cut). Throws DegenerateGrid when any l_i < 4.
std::array<int, 3> do_cell_counts(const RotatedBasis& r, double d_cut);

DOCellGrid build_do_grid(const LatticeBasis& l, double d_cut, const ParticleSet& ps);
void rebuild_do_grid(DOCellGrid& grid, const LatticeBasis& l, double d_cut, std::span<const Vec3> q);

struct DONeighbor {
  CellIndex cell;
  IVec3 shift;
  // True when the entry lies across a y or z face of the prism.
  bool seam = false;
};

struct DONeighborhood {
  std::array<DONeighbor, 36> entries{};
  int count = 0;

  std::span<const DONeighbor> view() const { return {entries.data(), static_cast<std::size_t>(count)}; }
};

// Cells whose occupants (shifted by L n) can lie within d_cut of the given
// cell. Layers across a face are 4 wide on the side of the replica offset,
// or 3 wide when the offset is a whole number of cells. A deformed box gives
// 27, 30, 34 or 36 entries depending on which faces the cell touches.
DONeighborhood do_neighborhood(const CellIndex& cell, const DOCellGrid& grid);
DONeighborhood do_neighborhood(const CellIndex& cell, const RotatedBasis& rot, const std::array<int, 3>& l);
DONeighborhood do_neighborhood(const CellIndex& cell, const DOWindows& w);

// 27 + 14/l3 + 6/l2 - 4/(l2 l3).
double avg_neighborhood_count(int l1, int l2, int l3);

// Mean of do_neighborhood(...).count over every cell of the grid.
double mean_neighborhood_count(const RotatedBasis& rot, const std::array<int, 3>& l);

// r11 r22 r33 / (l1 l2 l3).
double do_cell_volume(const RotatedBasis& r, const std::array<int, 3>& l);

// Calls visit(a, b, d, r2) once per pair within sqrt(cut2), with d the
// displacement from a to the interacting image of b. Returns the number of
// distance checks performed.
template <class Visitor>
std::uint64_t do_scan_pairs(const DOCellGrid& grid, double cut2, Visitor&& visit, ScanOptions opt = {}) {
  return scan_plan(grid.cells, grid.plan, grid.copies, cut2, visit, opt.drop_face_neighbor);
}

}  // namespace flowcell
