#pragma once

// Unimodular remapping of the deforming box. Applying an SL(3,Z) change of
// basis leaves the lattice point set, and so the periodic system, untouched
// while replacing a badly sheared or stretched unit cell with a compact one.

#include <optional>
#include <variant>

#include "flowcell/lattice.hpp"

namespace flowcell {

// Integer matrix with determinant exactly +1.
class Automorphism {
 public:
  Automorphism() : m_(IMat3::identity()) {}
  // Throws InvalidArgument unless det(m) == 1.
  explicit Automorphism(const IMat3& m);

  static Automorphism identity() { return Automorphism{}; }
  // [[1,-k,0],[0,1,0],[0,0,1]]: subtracts k copies of v1 from v2.
  static Automorphism shear_reset(std::int64_t k = 1);

  const IMat3& matrix() const { return m_; }
  bool is_identity() const { return m_ == IMat3::identity(); }
  Automorphism inverse() const { return Automorphism(m_.unimodular_inverse()); }

  friend Automorphism operator*(const Automorphism& a, const Automorphism& b) {
    return Automorphism(a.m_ * b.m_);
  }
  friend bool operator==(const Automorphism&, const Automorphism&) = default;

 private:
  IMat3 m_;
};

LatticeBasis apply_automorphism(const LatticeBasis& l, const Automorphism& m);

// --- policies -------------------------------------------------------------

// Planar shear in the x-y plane: the offset of v2 along x is folded back into
// [-a/2, a/2) whenever it reaches a/2.
struct LeesEdwardsPolicy {
  double rate = 0.0;
  double side = 1.0;
};

// Kraynik-Reinelt style reset for flows with e^{A t*} L0 = L0 M: once t*
// has elapsed since the last reset, the box is mapped back to L0.
struct KrPolicy {
  Automorphism m;
  double t_star = 0.0;
  LatticeBasis l0;
  double elapsed = 0.0;
};

// Greedy lattice reduction triggered when max_aspect exceeds `threshold`.
struct ReductionPolicy {
  double threshold = 2.0;
};

struct NoRemapPolicy {};

using RemapPolicy = std::variant<NoRemapPolicy, LeesEdwardsPolicy, KrPolicy, ReductionPolicy>;

// Validates policy parameters (reduction threshold must exceed 1, ...).
void validate_policy(const RemapPolicy& policy);

// Returns the automorphism folding the shear offset back into [-a/2, a/2),
// or nothing while the offset is below a/2. Throws LayoutMismatch when L is
// not of the form [[a, s, 0], [0, a, 0], [0, 0, a]].
std::optional<Automorphism> lees_edwards_step(const LatticeBasis& l, const LeesEdwardsPolicy& policy);

// True iff |e^{At} L0 - L0 M|_max < 1e-8 |L0|_max.
bool kr_reset_check(const LatticeBasis& l0, const FlowMatrix& a, const Automorphism& m, double t);

struct ReducedBasis {
  LatticeBasis basis;
  Automorphism transform;  // basis == input * transform
};

// Greedy reduction: repeatedly shortens a column by the closest vector of the
// lattice spanned by the other two (this includes every pairwise Lagrange
// step) until no column can be shortened. Column order is never permuted,
// so the transform always has det +1.
ReducedBasis reduce_basis(const LatticeBasis& l);

struct DeformationMetrics {
  double min_height = 0.0;
  double max_aspect = 0.0;  // max_i |v_i| / min_i h_i
  Vec3 tilt_degrees;        // angle between v_i and the normal of the opposite face pair
};

DeformationMetrics deformation_metrics(const LatticeBasis& l);

// Eigenvector basis of a symmetric automorphism: rows of the returned matrix
// are unit eigenvectors of M (ascending eigenvalue), scaled so det = side^3.
// Diagonal flows stretch this basis onto lattices related to it by powers of
// M, which keeps the remapped box bounded.
LatticeBasis eigen_basis(const Automorphism& m, double side);

// KR setup for a diagonal flow: orders the eigenvectors of the symmetric
// automorphism M so that e^{A t*} L0 = L0 M for a single t* > 0, and scales
// L0 to det = side^3. Throws InvalidArgument when no ordering matches.
KrPolicy make_kr_policy(const FlowMatrix& flow, const Automorphism& m, double side);

// Outcome of one policy check.
struct RemapEvent {
  Automorphism transform;
  LatticeBasis basis;
};

// Advances policy bookkeeping by `dt` (already applied to `l`) and returns a
// remap when the policy triggers. `flow` is needed by the KR policy to rebuild
// the box from L0 after a reset.
std::optional<RemapEvent> check_remap(RemapPolicy& policy, const LatticeBasis& l, const FlowMatrix& flow,
                                      double dt);

}  // namespace flowcell
