#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "flowcell/linalg.hpp"

namespace flowcell {

using CellIndex = std::array<int, 3>;

// Particles bucketed by cell with a counting sort. Positions are copied into
// cell order so neighborhood scans walk contiguous memory.
struct CellStorage {
  std::array<int, 3> counts{};
  std::vector<std::uint32_t> start;   // size ncells + 1
  std::vector<std::uint32_t> order;   // particle ids in cell order
  std::vector<Vec3> sorted_q;         // positions in cell order
  std::vector<std::uint32_t> flat_of; // cell of each particle id
  std::vector<std::uint32_t> cursor;
  // Per-particle buffers the grid builders fill before calling fill().
  std::vector<std::uint32_t> scratch_cell;
  std::vector<Vec3> scratch_q;

  int flat(const CellIndex& c) const { return (c[2] * counts[1] + c[1]) * counts[0] + c[0]; }
  std::size_t cell_count() const {
    return static_cast<std::size_t>(counts[0]) * counts[1] * counts[2];
  }
  CellIndex unflatten(int f) const {
    return {f % counts[0], (f / counts[0]) % counts[1], f / (counts[0] * counts[1])};
  }
  std::span<const std::uint32_t> members(int f) const {
    return {order.data() + start[f], order.data() + start[f + 1]};
  }

  // `cell` and `q` are indexed by particle id.
  void fill(const std::array<int, 3>& c, std::span<const std::uint32_t> cell, std::span<const Vec3> q);
};

// floor for values well inside the int range.
inline int floor_int(double x) {
  const int i = static_cast<int>(x);
  return i - (x < static_cast<double>(i) ? 1 : 0);
}

// Clamped bin index: floor(x * n) limited to [0, n-1].
inline int bin_index(double scaled, int n) {
  int i = floor_int(scaled);
  if (i >= n) i = n - 1;
  if (i < 0) i = 0;
  return i;
}

// floor(length / d_cut) with a relative slack of 1e-12 so that boxes whose
// sides are exact multiples of the cutoff do not lose a cell to rounding.
inline int cells_along(double length, double d_cut) {
  return static_cast<int>(std::floor(length / d_cut * (1.0 + 1e-12)));
}

inline int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// One run of a row's scan list: `width` consecutive columns of a source row
// (cell row ck, cj seen through the replica shift n2, n3), the first of them
// `dx` columns from the scanned cell before wrapping along x.
struct RunSpec {
  int ck, cj;
  int n2, n3;
  int dx, width;
  bool plus_x;  // the in-box +x face neighbor
};

// The scan lists of every row resolved against translated copies of the
// source rows, so that each run is one contiguous slice.
struct ScanPlan {
  struct Source {
    int row;         // ck * counts[1] + cj
    int n2, n3;
    int col0, ncols; // virtual columns col0 .. col0 + ncols - 1
  };
  struct Run {
    std::uint32_t first;  // column table entry of the slice start for cell 0
    std::uint32_t width;
    bool plus_x;
  };

  std::array<int, 3> counts{};
  std::vector<Source> sources;
  std::vector<std::uint32_t> source_col;  // first column table entry per source
  std::uint32_t columns = 0;              // column table entries in all
  std::vector<std::uint32_t> row_start;   // per own row, into runs
  std::vector<Run> runs;

  bool empty() const { return row_start.empty(); }
};

// specs[row_start[r] .. row_start[r + 1]) are the runs of own row r.
ScanPlan make_scan_plan(const std::array<int, 3>& counts, std::span<const std::uint32_t> row_start,
                        std::span<const RunSpec> specs);

// Occupants of every plan source, translated into place.
struct RowCopies {
  std::vector<std::uint32_t> col_start;  // per plan column entry, the start of its range in q
  std::vector<Vec3> q;
  std::vector<std::uint32_t> id;
  // Per-cell work space for scan_plan, sized by fill. A grid is scanned by
  // one thread at a time.
  mutable std::vector<std::uint32_t> hit, scratch_id;
  mutable std::vector<Vec3> scratch_q;

  void fill(const ScanPlan& plan, const CellStorage& cs, const Vec3& v1, const Vec3& v2, const Vec3& v3);
};

// Checks each occupant of every cell against the later occupants of its own
// cell and every occupant of the plan's runs. Calls visit(a, b, d, r2) for
// pairs with r2 < cut2 and returns the number of distance checks.
template <class Visitor>
std::uint64_t scan_plan(const CellStorage& cs, const ScanPlan& plan, const RowCopies& rc, double cut2,
                        Visitor& visit, bool drop_plus_x) {
  const int l0 = cs.counts[0];
  const int rows = cs.counts[1] * cs.counts[2];
  const std::uint32_t* col = rc.col_start.data();
  const Vec3* gq = rc.q.data();
  const std::uint32_t* gid = rc.id.data();
  const Vec3* sq = cs.sorted_q.data();
  const std::uint32_t* sid = cs.order.data();
  std::uint32_t* h = rc.hit.data();
  std::uint64_t checks = 0;
  for (int row = 0; row < rows; ++row) {
    const ScanPlan::Run* r0 = plan.runs.data() + plan.row_start[row];
    const ScanPlan::Run* r1 = plan.runs.data() + plan.row_start[row + 1];
    const std::uint32_t* own = cs.start.data() + static_cast<std::ptrdiff_t>(row) * l0;
    for (int i = 0; i < l0; ++i) {
      const std::uint32_t b0 = own[i], b1 = own[i + 1];
      if (b0 == b1) continue;
      if (b1 - b0 == 1) {
        const Vec3 qa = sq[b0];
        std::uint32_t nh = 0;
        for (const ScanPlan::Run* r = r0; r != r1; ++r) {
          if (r->plus_x && drop_plus_x) continue;
          const std::uint32_t s0 = col[r->first + i], s1 = col[r->first + i + r->width];
          checks += s1 - s0;
          for (std::uint32_t c = s0; c < s1; ++c) {
            h[nh] = c;
            nh += norm2(gq[c] - qa) < cut2 ? 1u : 0u;
          }
        }
        const std::uint32_t ida = sid[b0];
        for (std::uint32_t k = 0; k < nh; ++k) {
          const Vec3 d = gq[h[k]] - qa;
          visit(ida, gid[h[k]], d, norm2(d));
        }
        continue;
      }
      Vec3* q = rc.scratch_q.data();
      std::uint32_t* qid = rc.scratch_id.data();
      std::uint32_t n = 0;
      for (std::uint32_t k = b0; k < b1; ++k, ++n) {
        q[n] = sq[k];
        qid[n] = sid[k];
      }
      for (const ScanPlan::Run* r = r0; r != r1; ++r) {
        if (r->plus_x && drop_plus_x) continue;
        const std::uint32_t s0 = col[r->first + i], s1 = col[r->first + i + r->width];
        for (std::uint32_t k = s0; k < s1; ++k, ++n) {
          q[n] = gq[k];
          qid[n] = gid[k];
        }
      }
      const std::uint32_t own_n = b1 - b0;
      for (std::uint32_t a = 0; a < own_n; ++a) {
        const Vec3 qa = q[a];
        std::uint32_t nh = 0;
        for (std::uint32_t c = a + 1; c < n; ++c) {
          h[nh] = c;
          nh += norm2(q[c] - qa) < cut2 ? 1u : 0u;
        }
        for (std::uint32_t k = 0; k < nh; ++k) {
          const Vec3 d = q[h[k]] - qa;
          visit(qid[a], qid[h[k]], d, norm2(d));
        }
      }
      checks += std::uint64_t(own_n) * (n - 1) - std::uint64_t(own_n) * (own_n - 1) / 2;
    }
  }
  return checks;
}

}  // namespace flowcell
