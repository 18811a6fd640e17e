#include "flowcell/remap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "flowcell/error.hpp"

namespace flowcell {

Automorphism::Automorphism(const IMat3& m) : m_(m) {
  if (m.det() != 1) throw InvalidArgument("automorphism must have determinant +1");
}

Automorphism Automorphism::shear_reset(std::int64_t k) { return Automorphism(IMat3{{1, -k, 0, 0, 1, 0, 0, 0, 1}}); }

LatticeBasis apply_automorphism(const LatticeBasis& l, const Automorphism& m) {
  if (m.is_identity()) return l;
  return LatticeBasis(l.matrix() * m.matrix().to_real());
}

void validate_policy(const RemapPolicy& policy) {
  if (const auto* r = std::get_if<ReductionPolicy>(&policy)) {
    if (!(r->threshold > 1.0)) throw InvalidArgument("reduction threshold must exceed 1");
  } else if (const auto* le = std::get_if<LeesEdwardsPolicy>(&policy)) {
    if (!(le->side > 0.0)) throw InvalidArgument("Lees-Edwards side length must be positive");
  } else if (const auto* kr = std::get_if<KrPolicy>(&policy)) {
    if (!(kr->t_star > 0.0)) throw InvalidArgument("KR reset time must be positive");
  }
}

std::optional<Automorphism> lees_edwards_step(const LatticeBasis& l, const LeesEdwardsPolicy&) {
  const Mat3& m = l.matrix();
  const double a = m(0, 0);
  const double tol = 1e-9 * std::fmax(1.0, a);
  const bool layout_ok = std::fabs(m(1, 0)) <= tol && std::fabs(m(2, 0)) <= tol && std::fabs(m(2, 1)) <= tol &&
                         std::fabs(m(0, 2)) <= tol && std::fabs(m(1, 2)) <= tol &&
                         std::fabs(m(1, 1) - a) <= tol && std::fabs(m(2, 2) - a) <= tol;
  if (!layout_ok) throw LayoutMismatch("basis is not a sheared cube with v2 tilted along x");
  const double offset = m(0, 1);
  if (offset >= -0.5 * a && offset < 0.5 * a) return std::nullopt;
  const auto k = static_cast<std::int64_t>(std::floor(offset / a + 0.5));
  return Automorphism::shear_reset(k);
}

bool kr_reset_check(const LatticeBasis& l0, const FlowMatrix& a, const Automorphism& m, double t) {
  const Mat3 lhs = matrix_exponential(a.matrix() * t) * l0.matrix();
  const Mat3 rhs = l0.matrix() * m.matrix().to_real();
  return (lhs - rhs).max_abs() < 1e-8 * l0.matrix().max_abs();
}

namespace {

// Tries to shorten column i by an integer combination of columns j and k.
// Returns true and updates both the basis and the transform on success.
bool shorten_column(Mat3& cols, IMat3& transform, int i) {
  const int j = (i + 1) % 3;
  const int k = (i + 2) % 3;
  const Vec3 vi = cols.col(i), vj = cols.col(j), vk = cols.col(k);
  const double gjj = dot(vj, vj), gkk = dot(vk, vk), gjk = dot(vj, vk);
  const double bj = dot(vi, vj), bk = dot(vi, vk);
  const double det = gjj * gkk - gjk * gjk;
  // Real least-squares coefficients of the projection of vi onto span(vj, vk).
  const double xj = (bj * gkk - bk * gjk) / det;
  const double xk = (bk * gjj - bj * gjk) / det;

  const double current = norm2(vi);
  double best = current;
  std::int64_t best_j = 0, best_k = 0;
  auto consider = [&](std::int64_t cj, std::int64_t ck) {
    const double r2 = norm2(vi - vj * static_cast<double>(cj) - vk * static_cast<double>(ck));
    if (r2 < best) {
      best = r2;
      best_j = cj;
      best_k = ck;
    }
  };
  const auto fj = static_cast<std::int64_t>(std::floor(xj));
  const auto fk = static_cast<std::int64_t>(std::floor(xk));
  for (std::int64_t dj = -1; dj <= 2; ++dj)
    for (std::int64_t dk = -1; dk <= 2; ++dk) consider(fj + dj, fk + dk);
  // Pairwise Lagrange steps, so the pairwise condition holds at exit.
  consider(std::llround(bj / gjj), 0);
  consider(0, std::llround(bk / gkk));

  if (!(best < current * (1.0 - 1e-12))) return false;
  cols.set_col(i, vi - vj * static_cast<double>(best_j) - vk * static_cast<double>(best_k));
  IVec3 ti = transform.col(i);
  const IVec3 tj = transform.col(j), tk = transform.col(k);
  for (int r = 0; r < 3; ++r) ti[r] -= best_j * tj[r] + best_k * tk[r];
  transform.set_col(i, ti);
  return true;
}

}  // namespace

ReducedBasis reduce_basis(const LatticeBasis& l) {
  Mat3 cols = l.matrix();
  IMat3 transform = IMat3::identity();
  for (int iter = 0; iter < 10000; ++iter) {
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return norm2(cols.col(x)) > norm2(cols.col(y)); });
    bool changed = false;
    for (int i : order) {
      if (shorten_column(cols, transform, i)) {
        changed = true;
        break;
      }
    }
    if (!changed) break;
  }
  const Automorphism m(transform);
  // Recompute from the integer transform so basis == input * transform exactly
  // up to one rounding per entry.
  return {apply_automorphism(l, m), m};
}

DeformationMetrics deformation_metrics(const LatticeBasis& l) {
  const Vec3 h = box_heights(l);
  DeformationMetrics out;
  out.min_height = std::fmin(h.x, std::fmin(h.y, h.z));
  double longest = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double len = norm(l.edge(i));
    longest = std::fmax(longest, len);
    const double c = std::clamp(h[i] / len, -1.0, 1.0);
    out.tilt_degrees[i] = std::acos(c) * 180.0 / std::numbers::pi;
  }
  out.max_aspect = longest / out.min_height;
  return out;
}

LatticeBasis eigen_basis(const Automorphism& m, double side) {
  const Mat3 mr = m.matrix().to_real();
  if (!(mr == mr.transpose())) throw InvalidArgument("eigen basis requires a symmetric automorphism");
  const SymEigen e = symmetric_eigen(mr);
  Mat3 rows = e.vectors.transpose();
  if (rows.det() < 0.0)
    for (int c = 0; c < 3; ++c) rows(0, c) = -rows(0, c);
  return LatticeBasis(rows * side);
}

KrPolicy make_kr_policy(const FlowMatrix& flow, const Automorphism& m, double side) {
  const Mat3& a = flow.matrix();
  if (!(a(0, 1) == 0 && a(0, 2) == 0 && a(1, 0) == 0 && a(1, 2) == 0 && a(2, 0) == 0 && a(2, 1) == 0))
    throw InvalidArgument("KR reset requires a diagonal flow matrix");
  const Mat3 mr = m.matrix().to_real();
  if (!(mr == mr.transpose())) throw InvalidArgument("KR reset requires a symmetric automorphism");
  const SymEigen e = symmetric_eigen(mr);
  for (int k = 0; k < 3; ++k)
    if (!(e.values[k] > 0.0)) throw InvalidArgument("KR automorphism must have positive eigenvalues");

  std::array<int, 3> perm{0, 1, 2};
  do {
    // Row r of L0 is the eigenvector whose eigenvalue must equal e^{A_rr t*}.
    double t_star = -1.0;
    bool ok = true;
    for (int r = 0; r < 3 && ok; ++r) {
      const double logmu = std::log(e.values[perm[r]]);
      const double rate = a(r, r);
      if (rate == 0.0) {
        ok = std::fabs(logmu) < 1e-9;
      } else {
        const double t = logmu / rate;
        if (!(t > 0.0)) ok = false;
        else if (t_star < 0.0) t_star = t;
        else ok = std::fabs(t - t_star) <= 1e-9 * t_star;
      }
    }
    if (ok && t_star > 0.0) {
      Mat3 rows;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rows(r, c) = e.vectors(c, perm[r]);
      if (rows.det() < 0.0)
        for (int c = 0; c < 3; ++c) rows(0, c) = -rows(0, c);
      KrPolicy p;
      p.m = m;
      p.t_star = t_star;
      p.l0 = LatticeBasis(rows * side);
      return p;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  throw InvalidArgument("no eigenvector ordering makes the flow periodic under this automorphism");
}

std::optional<RemapEvent> check_remap(RemapPolicy& policy, const LatticeBasis& l, const FlowMatrix& flow,
                                      double dt) {
  struct Visitor {
    const LatticeBasis& l;
    const FlowMatrix& flow;
    double dt;

    std::optional<RemapEvent> operator()(NoRemapPolicy&) const { return std::nullopt; }

    std::optional<RemapEvent> operator()(LeesEdwardsPolicy& p) const {
      auto m = lees_edwards_step(l, p);
      if (!m) return std::nullopt;
      LatticeBasis remapped = apply_automorphism(l, *m);
      // Clean the rounding residue in the reset offset's neighbours.
      Mat3 cols = remapped.matrix();
      cols(1, 0) = cols(2, 0) = cols(2, 1) = cols(0, 2) = cols(1, 2) = 0.0;
      return RemapEvent{*m, LatticeBasis(cols)};
    }

    std::optional<RemapEvent> operator()(KrPolicy& p) const {
      p.elapsed += dt;
      if (p.elapsed < p.t_star * (1.0 - 1e-12)) return std::nullopt;
      p.elapsed = std::fmax(0.0, p.elapsed - p.t_star);
      // Rebuild from L0 instead of multiplying through, so resets never
      // accumulate drift.
      return RemapEvent{p.m.inverse(), evolve_basis(p.l0, flow, p.elapsed)};
    }

    std::optional<RemapEvent> operator()(ReductionPolicy& p) const {
      if (deformation_metrics(l).max_aspect <= p.threshold) return std::nullopt;
      ReducedBasis r = reduce_basis(l);
      if (r.transform.is_identity()) return std::nullopt;
      return RemapEvent{r.transform, r.basis};
    }
  };
  return std::visit(Visitor{l, flow, dt}, policy);
}

}  // namespace flowcell
