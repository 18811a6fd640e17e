#pragma once

// Deforming periodic simulation box: flow matrix, lattice basis, particle
// storage, and the geometric primitives everything else builds on.

#include <span>
#include <vector>

#include "flowcell/linalg.hpp"

namespace flowcell {

// Traceless velocity-gradient matrix of a homogeneous linear flow u(x) = A x.
class FlowMatrix {
 public:
  static constexpr double kTraceTolerance = 1e-12;

  FlowMatrix() = default;
  // Throws CompressibleFlow when |trace| exceeds `trace_tolerance`.
  explicit FlowMatrix(const Mat3& a, double trace_tolerance = kTraceTolerance);

  static FlowMatrix zero() { return FlowMatrix{}; }
  static FlowMatrix shear(double rate);
  static FlowMatrix uniaxial(double rate);
  static FlowMatrix planar_elongation(double rate);

  const Mat3& matrix() const { return a_; }
  bool is_zero() const { return a_.max_abs() == 0.0; }

 private:
  Mat3 a_{};
};

// Simulation box: columns are the edge vectors v1, v2, v3. Always
// right-handed with finite nonzero edges.
class LatticeBasis {
 public:
  LatticeBasis() : cols_(Mat3::identity()), inv_(Mat3::identity()) {}
  // Throws InvalidArgument if det <= 0 or an edge is degenerate.
  explicit LatticeBasis(const Mat3& cols);

  static LatticeBasis cube(double side) { return LatticeBasis(Mat3::diagonal(side, side, side)); }

  const Mat3& matrix() const { return cols_; }
  const Mat3& inverse() const { return inv_; }
  Vec3 edge(int i) const { return cols_.col(i); }
  double volume() const { return cols_.det(); }

  Vec3 to_cartesian(const Vec3& fractional) const { return cols_ * fractional; }
  Vec3 to_fractional(const Vec3& q) const { return inv_ * q; }
  Vec3 translation(const IVec3& n) const { return cols_ * to_real(n); }

 private:
  Mat3 cols_;
  Mat3 inv_;
};

// Positions are Cartesian and wrapped into the current unit cell; momenta are
// peculiar (relative to the streaming velocity A q).
struct ParticleSet {
  std::vector<Vec3> q;
  std::vector<Vec3> p;
  double mass = 1.0;

  std::size_t size() const { return q.size(); }
};

// e^{At} L0.
LatticeBasis evolve_basis(const LatticeBasis& l0, const FlowMatrix& a, double t);

// Matrix exponential of an arbitrary real 3x3 matrix: closed forms for
// diagonal and nilpotent inputs, scaling-and-squaring Taylor otherwise.
Mat3 matrix_exponential(const Mat3& m);

// Distance between the pair of faces not containing v_i: det(L)/|v_j x v_k|.
Vec3 box_heights(const LatticeBasis& l);

Vec3 to_fractional(const Vec3& q, const LatticeBasis& l);

// Fractional coordinates wrapped with floor into [0,1)^3.
Vec3 wrap_fractional(Vec3 lambda);

Vec3 wrap_into_cell(const Vec3& q, const LatticeBasis& l);

void wrap_all(std::span<Vec3> q, const LatticeBasis& l);

// Oracle: qj + L n - qi minimizing the Euclidean norm over n in {-2..2}^3.
// Ties resolve to the first n in lexicographic order.
Vec3 minimum_image_displacement(const Vec3& qi, const Vec3& qj, const LatticeBasis& l);

}  // namespace flowcell
