#include "flowcell/cell_storage.hpp"

#include <algorithm>
#include <map>

namespace flowcell {

void CellStorage::fill(const std::array<int, 3>& c, std::span<const std::uint32_t> cell, std::span<const Vec3> q) {
  counts = c;
  const std::size_t ncells = cell_count();
  const std::size_t n = cell.size();
  start.assign(ncells + 1, 0);
  for (std::uint32_t f : cell) ++start[f + 1];
  for (std::size_t f = 0; f < ncells; ++f) start[f + 1] += start[f];
  order.assign(n, 0);
  sorted_q.assign(n, Vec3{});
  cursor.assign(start.begin(), start.end() - 1);
  for (std::uint32_t id = 0; id < n; ++id) {
    const std::uint32_t slot = cursor[cell[id]]++;
    order[slot] = id;
    sorted_q[slot] = q[id];
  }
  flat_of.assign(cell.begin(), cell.end());
}

ScanPlan make_scan_plan(const std::array<int, 3>& counts, std::span<const std::uint32_t> row_start,
                        std::span<const RunSpec> specs) {
  ScanPlan plan;
  plan.counts = counts;
  const int l0 = counts[0];
  std::map<std::array<int, 3>, std::size_t> index;
  std::vector<int> last_col;
  std::vector<std::size_t> source_of(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const RunSpec& sp = specs[k];
    const std::array<int, 3> key{sp.ck * counts[1] + sp.cj, sp.n2, sp.n3};
    auto [it, fresh] = index.try_emplace(key, plan.sources.size());
    const int lo = sp.dx, hi = sp.dx + sp.width - 1 + l0 - 1;
    if (fresh) {
      plan.sources.push_back({key[0], sp.n2, sp.n3, lo, 0});
      last_col.push_back(hi);
    } else {
      ScanPlan::Source& src = plan.sources[it->second];
      src.col0 = std::min(src.col0, lo);
      last_col[it->second] = std::max(last_col[it->second], hi);
    }
    source_of[k] = it->second;
  }
  plan.source_col.resize(plan.sources.size());
  std::uint32_t next = 0;
  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    ScanPlan::Source& src = plan.sources[s];
    src.ncols = last_col[s] - src.col0 + 1;
    plan.source_col[s] = next;
    next += static_cast<std::uint32_t>(src.ncols) + 1;
  }
  plan.columns = next;
  plan.row_start.assign(row_start.begin(), row_start.end());
  plan.runs.reserve(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    const RunSpec& sp = specs[k];
    const ScanPlan::Source& src = plan.sources[source_of[k]];
    plan.runs.push_back({plan.source_col[source_of[k]] + static_cast<std::uint32_t>(sp.dx - src.col0),
                         static_cast<std::uint32_t>(sp.width), sp.plus_x});
  }
  return plan;
}

void RowCopies::fill(const ScanPlan& plan, const CellStorage& cs, const Vec3& v1, const Vec3& v2, const Vec3& v3) {
  const int l0 = cs.counts[0];
  col_start.resize(plan.columns);
  std::uint32_t total = 0;
  for (const ScanPlan::Source& src : plan.sources) {
    const std::uint32_t* row = cs.start.data() + static_cast<std::ptrdiff_t>(src.row) * l0;
    int m = src.col0 - floor_div(src.col0, l0) * l0;
    for (int v = 0; v < src.ncols; ++v) {
      total += row[m + 1] - row[m];
      if (++m == l0) m = 0;
    }
  }
  q.resize(total);
  id.resize(total);
  const std::size_t cap = total + cs.order.size() + 1;
  if (hit.size() < cap) {
    hit.resize(cap);
    scratch_id.resize(cap);
    scratch_q.resize(cap);
  }
  Vec3* dq = q.data();
  std::uint32_t* di = id.data();
  const Vec3* sq = cs.sorted_q.data();
  const std::uint32_t* si = cs.order.data();
  std::uint32_t n = 0;
  for (std::size_t s = 0; s < plan.sources.size(); ++s) {
    const ScanPlan::Source& src = plan.sources[s];
    const Vec3 base = v2 * double(src.n2) + v3 * double(src.n3);
    const std::uint32_t* row = cs.start.data() + static_cast<std::ptrdiff_t>(src.row) * l0;
    std::uint32_t* c = col_start.data() + plan.source_col[s];
    int n1 = floor_div(src.col0, l0);
    int m = src.col0 - n1 * l0;
    Vec3 t = n1 == 0 ? base : base + v1 * double(n1);
    for (int v = 0; v < src.ncols; ++v) {
      *c++ = n;
      for (std::uint32_t k = row[m]; k < row[m + 1]; ++k, ++n) {
        dq[n] = sq[k] + t;
        di[n] = si[k];
      }
      if (++m == l0) {
        m = 0;
        ++n1;
        t = n1 == 0 ? base : base + v1 * double(n1);
      }
    }
    *c = n;
  }
}

}  // namespace flowcell
