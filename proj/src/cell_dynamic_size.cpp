#include "flowcell/cell_dynamic_size.hpp"

#include <string>

#include "flowcell/error.hpp"

namespace flowcell {

std::array<int, 3> ds_cell_counts(const LatticeBasis& l, double d_cut) {
  if (!(d_cut > 0.0)) throw InvalidArgument("cutoff must be positive");
  const Vec3 h = box_heights(l);
  std::array<int, 3> c{};
  for (int i = 0; i < 3; ++i) {
    c[i] = cells_along(h[i], d_cut);
    if (c[i] < 3)
      throw DegenerateGrid("dynamic-size grid has " + std::to_string(c[i]) + " cells along axis " +
                           std::to_string(i + 1) + " (need 3)");
  }
  return c;
}

namespace {

// The half stencil as column runs: the +x face cell, then three columns
// wide in the rows (dy, dz) = (1, 0), (-1, 1), (0, 1), (1, 1).
ScanPlan ds_scan_plan(const std::array<int, 3>& c) {
  static constexpr int run_dy[5] = {0, 1, -1, 0, 1};
  static constexpr int run_dz[5] = {0, 0, 1, 1, 1};
  std::vector<RunSpec> specs;
  std::vector<std::uint32_t> row_start;
  for (int k = 0; k < c[2]; ++k)
    for (int j = 0; j < c[1]; ++j) {
      row_start.push_back(static_cast<std::uint32_t>(specs.size()));
      for (int r = 0; r < 5; ++r) {
        const int sz = floor_div(k + run_dz[r], c[2]);
        const int sy = floor_div(j + run_dy[r], c[1]);
        const int ck = k + run_dz[r] - sz * c[2], cj = j + run_dy[r] - sy * c[1];
        if (r == 0) specs.push_back({ck, cj, sy, sz, 1, 1, true});
        else specs.push_back({ck, cj, sy, sz, -1, 3, false});
      }
    }
  row_start.push_back(static_cast<std::uint32_t>(specs.size()));
  return make_scan_plan(c, row_start, specs);
}

}  // namespace

void rebuild_ds_grid(DSCellGrid& grid, const LatticeBasis& l, double d_cut, std::span<const Vec3> q) {
  const std::array<int, 3> c = ds_cell_counts(l, d_cut);
  grid.basis = l;
  grid.d_cut = d_cut;
  std::vector<std::uint32_t>& flat = grid.cells.scratch_cell;
  flat.resize(q.size());
  const Mat3& inv = l.inverse();
  for (std::size_t n = 0; n < q.size(); ++n) {
    const Vec3 lam = inv * q[n];
    const int i = bin_index(lam.x * c[0], c[0]);
    const int j = bin_index(lam.y * c[1], c[1]);
    const int k = bin_index(lam.z * c[2], c[2]);
    flat[n] = static_cast<std::uint32_t>((k * c[1] + j) * c[0] + i);
  }
  grid.cells.fill(c, flat, q);
  if (grid.plan.empty() || grid.plan.counts != c) grid.plan = ds_scan_plan(c);
  grid.copies.fill(grid.plan, grid.cells, l.edge(0), l.edge(1), l.edge(2));
}

DSCellGrid build_ds_grid(const LatticeBasis& l, double d_cut, const ParticleSet& ps) {
  DSCellGrid g;
  rebuild_ds_grid(g, l, d_cut, ps.q);
  return g;
}

std::array<NeighborCell, 27> ds_neighborhood(const CellIndex& cell, const DSCellGrid& grid) {
  const auto& c = grid.counts();
  std::array<NeighborCell, 27> out{};
  int n = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int raw[3] = {cell[0] + dx, cell[1] + dy, cell[2] + dz};
        NeighborCell& e = out[n++];
        for (int ax = 0; ax < 3; ++ax) {
          const int w = static_cast<int>(std::floor(static_cast<double>(raw[ax]) / c[ax]));
          e.cell[ax] = raw[ax] - w * c[ax];
          e.shift[ax] = w;
        }
      }
  return out;
}

double ds_neighborhood_volume(const LatticeBasis& l, const std::array<int, 3>& c) {
  return 27.0 * l.volume() / (static_cast<double>(c[0]) * c[1] * c[2]);
}

const std::array<std::array<int, 3>, 13>& half_stencil() {
  static const std::array<std::array<int, 3>, 13> offsets = [] {
    std::array<std::array<int, 3>, 13> o{};
    int n = 0;
    for (int dz = -1; dz <= 1; ++dz)
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          // Lexicographically positive in (dz, dy, dx).
          if (dz > 0 || (dz == 0 && (dy > 0 || (dy == 0 && dx > 0)))) o[n++] = {dx, dy, dz};
        }
    return o;
  }();
  return offsets;
}

}  // namespace flowcell
