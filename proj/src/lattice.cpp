#include "flowcell/lattice.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "flowcell/error.hpp"

namespace flowcell {

FlowMatrix::FlowMatrix(const Mat3& a, double trace_tolerance) : a_(a) {
  for (double v : a.a)
    if (!std::isfinite(v)) throw InvalidArgument("flow matrix has non-finite entries");
  if (std::fabs(a.trace()) > trace_tolerance)
    throw CompressibleFlow("flow matrix trace " + std::to_string(a.trace()) + " is not zero");
}

FlowMatrix FlowMatrix::shear(double rate) {
  Mat3 m{};
  m(0, 1) = rate;
  return FlowMatrix(m);
}

FlowMatrix FlowMatrix::uniaxial(double rate) {
  return FlowMatrix(Mat3::diagonal(rate, -0.5 * rate, -0.5 * rate));
}

FlowMatrix FlowMatrix::planar_elongation(double rate) {
  return FlowMatrix(Mat3::diagonal(rate, -rate, 0.0));
}

LatticeBasis::LatticeBasis(const Mat3& cols) : cols_(cols) {
  for (int i = 0; i < 3; ++i) {
    const double n = norm(cols.col(i));
    if (!std::isfinite(n) || n == 0.0)
      throw InvalidArgument("lattice edge " + std::to_string(i + 1) + " is zero or not finite");
  }
  const double d = cols.det();
  if (!(d > 0.0)) throw InvalidArgument("lattice basis must have positive determinant");
  inv_ = cols.inverse();
}

namespace {

bool is_diagonal(const Mat3& m) {
  return m(0, 1) == 0 && m(0, 2) == 0 && m(1, 0) == 0 && m(1, 2) == 0 && m(2, 0) == 0 && m(2, 1) == 0;
}

Mat3 taylor_exp(const Mat3& m) {
  // Scale so the norm is below 1/2, sum the series, square back.
  const double nrm = m.max_abs() * 3.0;
  int squarings = 0;
  if (nrm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
  const Mat3 scaled = m * std::ldexp(1.0, -squarings);
  Mat3 sum = Mat3::identity();
  Mat3 term = Mat3::identity();
  for (int k = 1; k <= 30; ++k) {
    term = term * scaled * (1.0 / k);
    sum += term;
    if (term.max_abs() < 1e-18 * sum.max_abs()) break;
  }
  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  return sum;
}

}  // namespace

Mat3 matrix_exponential(const Mat3& m) {
  if (is_diagonal(m)) return Mat3::diagonal(std::exp(m(0, 0)), std::exp(m(1, 1)), std::exp(m(2, 2)));
  const Mat3 m2 = m * m;
  if (m2.max_abs() == 0.0) return Mat3::identity() + m;
  const Mat3 m3 = m2 * m;
  if (m3.max_abs() == 0.0) return Mat3::identity() + m + m2 * 0.5;
  return taylor_exp(m);
}

LatticeBasis evolve_basis(const LatticeBasis& l0, const FlowMatrix& a, double t) {
  if (t < 0.0) throw InvalidArgument("evolve_basis requires t >= 0");
  if (a.is_zero() || t == 0.0) return l0;
  return LatticeBasis(matrix_exponential(a.matrix() * t) * l0.matrix());
}

Vec3 box_heights(const LatticeBasis& l) {
  const double vol = l.volume();
  Vec3 h;
  for (int i = 0; i < 3; ++i) h[i] = vol / norm(cross(l.edge((i + 1) % 3), l.edge((i + 2) % 3)));
  return h;
}

Vec3 to_fractional(const Vec3& q, const LatticeBasis& l) { return l.to_fractional(q); }

Vec3 wrap_fractional(Vec3 lambda) {
  for (int i = 0; i < 3; ++i) {
    double f = lambda[i] - std::floor(lambda[i]);
    // 1 - ulp inputs can round up to exactly 1.
    if (f >= 1.0) f = 0.0;
    lambda[i] = f;
  }
  return lambda;
}

Vec3 wrap_into_cell(const Vec3& q, const LatticeBasis& l) {
  const Vec3 lam = l.to_fractional(q);
  if (lam.x >= 0.0 && lam.x < 1.0 && lam.y >= 0.0 && lam.y < 1.0 && lam.z >= 0.0 && lam.z < 1.0) return q;
  const Vec3 n{std::floor(lam.x), std::floor(lam.y), std::floor(lam.z)};
  Vec3 out = q - l.matrix() * n;
  // Rounding in the subtraction can leave a coordinate a hair outside.
  const Vec3 check = l.to_fractional(out);
  if (check.x < 0.0 || check.x >= 1.0 || check.y < 0.0 || check.y >= 1.0 || check.z < 0.0 || check.z >= 1.0)
    out = l.to_cartesian(wrap_fractional(check));
  return out;
}

void wrap_all(std::span<Vec3> q, const LatticeBasis& l) {
  for (Vec3& v : q) v = wrap_into_cell(v, l);
}

Vec3 minimum_image_displacement(const Vec3& qi, const Vec3& qj, const LatticeBasis& l) {
  const Vec3 base = qj - qi;
  Vec3 best = base;
  double best_r2 = std::numeric_limits<double>::infinity();
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) {
        const Vec3 d = base + l.translation({a, b, c});
        const double r2 = norm2(d);
        if (r2 < best_r2) {
          best_r2 = r2;
          best = d;
        }
      }
  return best;
}

}  // namespace flowcell
