#include "flowcell/cell_dynamic_offset.hpp"

#include <cmath>
#include <string>

#include "flowcell/error.hpp"

namespace flowcell {

namespace {

Vec3 reorthogonalize(Vec3 u, const Vec3& q) { return u - q * dot(u, q); }

// Virtual cells needed to cover [v, v + 3) in units of cell widths.
DOWindow window_from(double v) {
  const double f = v - std::floor(v);
  if (f < 1e-10 || f > 1.0 - 1e-10) return {static_cast<int>(std::llround(v)), 3};
  return {static_cast<int>(std::floor(v)), 4};
}

// (floor(v / n), v mod n) for integer v, tabulated over [-2n, 3n).
class WrapTable {
 public:
  explicit WrapTable(int n) : n_(n), lo_(-2 * n) {
    e_.resize(static_cast<std::size_t>(5 * n));
    for (int v = lo_; v < 3 * n; ++v) {
      const int w = floor_div(v, n);
      e_[v - lo_] = {w, v - w * n};
    }
  }
  std::array<int, 2> operator()(int v) const {
    const auto u = static_cast<std::size_t>(v - lo_);
    if (u < e_.size()) return e_[u];
    const int w = floor_div(v, n_);
    return {w, v - w * n_};
  }

 private:
  int n_, lo_;
  std::vector<std::array<int, 2>> e_;
};

}  // namespace

RotatedBasis qr_orient(const LatticeBasis& l) {
  const Vec3 v1 = l.edge(0), v2 = l.edge(1), v3 = l.edge(2);
  RotatedBasis out;
  Mat3& r = out.r;
  r = Mat3{};
  r(0, 0) = norm(v1);
  const Vec3 q1 = v1 * (1.0 / r(0, 0));
  Vec3 u2 = reorthogonalize(v2, q1);
  u2 = reorthogonalize(u2, q1);
  r(1, 1) = norm(u2);
  const Vec3 q2 = u2 * (1.0 / r(1, 1));
  const Vec3 q3 = cross(q1, q2);
  r(0, 1) = dot(q1, v2);
  r(0, 2) = dot(q1, v3);
  r(1, 2) = dot(q2, v3);
  r(2, 2) = dot(q3, v3);
  out.qrot = Mat3::from_columns(q1, q2, q3);
  return out;
}

Vec3 do_rearrange(const Vec3& pt, const RotatedBasis& rb) {
  const Mat3& r = rb.r;
  const double k = std::floor(pt.y / r(1, 1));
  Vec3 out = pt;
  out.y = pt.y - k * r(1, 1);
  out.x = floor_mod(pt.x - k * r(0, 1), r(0, 0));
  return out;
}

std::array<int, 3> do_cell_counts(const RotatedBasis& rb, double d_cut) {
  if (!(d_cut > 0.0)) throw InvalidArgument("cutoff must be positive");
  std::array<int, 3> l{};
  for (int i = 0; i < 3; ++i) {
    l[i] = cells_along(rb.r(i, i), d_cut);
    if (l[i] < 4)
      throw DegenerateGrid("dynamic-offset grid has " + std::to_string(l[i]) + " cells along axis " +
                           std::to_string(i + 1) + " (need 4)");
  }
  return l;
}

void rebuild_do_grid(DOCellGrid& grid, const LatticeBasis& l, double d_cut, std::span<const Vec3> q) {
  grid.basis = l;
  grid.rot = qr_orient(l);
  grid.d_cut = d_cut;
  const std::array<int, 3> c = do_cell_counts(grid.rot, d_cut);
  const Mat3& r = grid.rot.r;
  for (int i = 0; i < 3; ++i) grid.width[i] = r(i, i) / c[i];

  const DOWindows w = do_windows(grid.rot, c);
  if (grid.stencil.row_start.empty() || !(grid.stencil.key == w)) {
    grid.stencil = build_do_stencil(w);
    std::vector<RunSpec> specs;
    specs.reserve(grid.stencil.runs.size());
    for (const DORun& r : grid.stencil.runs) specs.push_back({r.ck, r.cj, r.n2, r.n3, r.dx, r.width, r.plus_x});
    grid.plan = make_scan_plan(c, grid.stencil.row_start, specs);
  }

  const Mat3 qt = grid.rot.qrot.transpose();
  const Vec3 v1 = l.edge(0), v2 = l.edge(1);
  const double r12 = r(0, 1);
  const double inv_w1 = c[0] / r(0, 0), inv_w2 = c[1] / r(1, 1), inv_w3 = c[2] / r(2, 2);
  const int c0 = c[0], c1 = c[1], c2 = c[2];
  // Binning the y coordinate in cell widths gives the replica k and the row
  // at once; likewise for x after the row shift.
  const WrapTable wrap_x(c0), wrap_y(c1);
  std::vector<std::uint32_t>& flat = grid.cells.scratch_cell;
  std::vector<Vec3>& moved = grid.cells.scratch_q;
  flat.resize(q.size());
  moved.resize(q.size());
  std::uint32_t* fl = flat.data();
  Vec3* mv = moved.data();
  const Vec3* src = q.data();
  const std::size_t np = q.size();
  for (std::size_t n = 0; n < np; ++n) {
    const Vec3 rq = qt * src[n];
    const auto [kk, j] = wrap_y(floor_int(rq.y * inv_w2));
    const auto [mm, i] = wrap_x(floor_int((rq.x - kk * r12) * inv_w1));
    const int k = bin_index(rq.z * inv_w3, c2);
    fl[n] = static_cast<std::uint32_t>((k * c1 + j) * c0 + i);
    mv[n] = src[n] - v1 * static_cast<double>(mm) - v2 * static_cast<double>(kk);
  }
  grid.cells.fill(c, flat, moved);
  grid.copies.fill(grid.plan, grid.cells, v1, v2, l.edge(2));
}

DOCellGrid build_do_grid(const LatticeBasis& l, double d_cut, const ParticleSet& ps) {
  DOCellGrid g;
  rebuild_do_grid(g, l, d_cut, ps.q);
  return g;
}

DOWindows do_windows(const RotatedBasis& rot, const std::array<int, 3>& l) {
  const Mat3& r = rot.r;
  const double w1 = r(0, 0) / l[0];
  const double w2 = r(1, 1) / l[1];
  DOWindows w;
  w.l = l;
  for (int n3 = -1; n3 <= 1; ++n3) {
    w.rows[n3 + 1] = n3 == 0 ? DOWindow{-1, 3} : window_from(-1.0 - n3 * r(1, 2) / w2);
    for (int n2 = -1; n2 <= 1; ++n2)
      w.cols[n3 + 1][n2 + 1] =
          (n2 == 0 && n3 == 0) ? DOWindow{-1, 3} : window_from(-1.0 - (n2 * r(0, 1) + n3 * r(0, 2)) / w1);
  }
  return w;
}

DONeighborhood do_neighborhood(const CellIndex& cell, const DOWindows& w) {
  const auto& l = w.l;
  const int i = cell[0], j = cell[1], k = cell[2];
  DONeighborhood out;
  for (int dk = -1; dk <= 1; ++dk) {
    const int kk = k + dk;
    const int n3 = floor_div(kk, l[2]);
    const int ck = kk - n3 * l[2];
    const DOWindow rows = w.rows[n3 + 1];
    for (int rr = j + rows.start; rr < j + rows.start + rows.count; ++rr) {
      const int n2 = floor_div(rr, l[1]);
      const int cj = rr - n2 * l[1];
      const bool seam = n2 != 0 || n3 != 0;
      // Without a seam the column window is the plain 3-wide one; with one,
      // n2 can reach +-2 only on grids too thin to be built.
      const DOWindow cols = seam && n2 >= -1 && n2 <= 1 ? w.cols[n3 + 1][n2 + 1] : DOWindow{-1, 3};
      for (int cc = i + cols.start; cc < i + cols.start + cols.count; ++cc) {
        const int n1 = floor_div(cc, l[0]);
        DONeighbor& e = out.entries[out.count++];
        e.cell = {cc - n1 * l[0], cj, ck};
        e.shift = {n1, n2, n3};
        e.seam = seam;
      }
    }
  }
  return out;
}

DONeighborhood do_neighborhood(const CellIndex& cell, const RotatedBasis& rot, const std::array<int, 3>& l) {
  return do_neighborhood(cell, do_windows(rot, l));
}

DONeighborhood do_neighborhood(const CellIndex& cell, const DOCellGrid& grid) {
  return do_neighborhood(cell, grid.rot, grid.counts());
}

DOStencil build_do_stencil(const DOWindows& w) {
  const auto& l = w.l;
  DOStencil st;
  st.key = w;
  st.row_start.reserve(static_cast<std::size_t>(l[1]) * l[2] + 1);
  st.runs.reserve(static_cast<std::size_t>(l[1]) * l[2] * 6);
  for (int k = 0; k < l[2]; ++k)
    for (int j = 0; j < l[1]; ++j) {
      st.row_start.push_back(static_cast<std::uint32_t>(st.runs.size()));
      const std::size_t first = st.runs.size();
      const DONeighborhood nh = do_neighborhood({0, j, k}, w);
      for (const DONeighbor& nb : nh.view()) {
        const int dx = nb.cell[0] + static_cast<int>(nb.shift.x) * l[0];
        const int n2 = static_cast<int>(nb.shift.y), n3 = static_cast<int>(nb.shift.z);
        const int dy = nb.cell[1] - j, dz = nb.cell[2] - k;
        if (nb.seam) {
          if (!(n3 > 0 || (n3 == 0 && n2 > 0))) continue;
        } else if (dz < 0 || (dz == 0 && (dy < 0 || (dy == 0 && dx <= 0)))) {
          continue;
        }
        const bool plus_x = !nb.seam && dx == 1 && dy == 0 && dz == 0;
        ++st.cells;
        if (st.runs.size() > first) {
          DORun& last = st.runs.back();
          if (!last.plus_x && !plus_x && last.ck == nb.cell[2] && last.cj == nb.cell[1] && last.n2 == n2 &&
              last.n3 == n3 && last.dx + last.width == dx && last.width < l[0]) {
            ++last.width;
            continue;
          }
        }
        st.runs.push_back({dx, 1, nb.cell[1], nb.cell[2], n2, n3, plus_x});
      }
    }
  st.row_start.push_back(static_cast<std::uint32_t>(st.runs.size()));
  return st;
}

double avg_neighborhood_count(int l1, int l2, int l3) {
  if (l1 < 4 || l2 < 4 || l3 < 4) throw InvalidArgument("average neighborhood count needs l_i >= 4");
  return 27.0 + 14.0 / l3 + 6.0 / l2 - 4.0 / (static_cast<double>(l2) * l3);
}

double mean_neighborhood_count(const RotatedBasis& rot, const std::array<int, 3>& l) {
  // The count does not depend on the x index, so one column per (j, k) suffices.
  long long total = 0;
  const DOWindows w = do_windows(rot, l);
  for (int k = 0; k < l[2]; ++k)
    for (int j = 0; j < l[1]; ++j) total += do_neighborhood({0, j, k}, w).count;
  return static_cast<double>(total) / (static_cast<double>(l[1]) * l[2]);
}

double do_cell_volume(const RotatedBasis& rb, const std::array<int, 3>& l) {
  return rb.r(0, 0) * rb.r(1, 1) * rb.r(2, 2) / (static_cast<double>(l[0]) * l[1] * l[2]);
}

}  // namespace flowcell
