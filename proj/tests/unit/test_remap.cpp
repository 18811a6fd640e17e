#include <doctest.h>

#include <cmath>
#include <random>

#include "flowcell/error.hpp"
#include "flowcell/remap.hpp"

using namespace flowcell;

namespace {

LatticeBasis sheared_cube(double a, double offset) {
  return LatticeBasis(Mat3{{a, offset, 0, 0, a, 0, 0, 0, a}});
}

double brute_min_distance(const Vec3& a, const Vec3& b, const LatticeBasis& l) {
  double best = 1e300;
  for (int i = -4; i <= 4; ++i)
    for (int j = -4; j <= 4; ++j)
      for (int k = -4; k <= 4; ++k) best = std::min(best, norm(b + l.translation({i, j, k}) - a));
  return best;
}

}  // namespace

TEST_CASE("automorphisms must be unimodular") {
  CHECK_THROWS_AS(Automorphism(IMat3{{2, 0, 0, 0, 1, 0, 0, 0, 1}}), InvalidArgument);
  CHECK_THROWS_AS(Automorphism(IMat3{{0, 1, 0, 1, 0, 0, 0, 0, 1}}), InvalidArgument);
  const Automorphism m(IMat3{{2, 1, 0, 1, 1, 0, 0, 0, 1}});
  CHECK((m * m.inverse()).is_identity());
}

TEST_CASE("shear reset undoes a full lattice spacing of tilt") {
  const double a = 4.0;
  const LatticeBasis l = evolve_basis(LatticeBasis::cube(a), FlowMatrix::shear(0.5), 2.0);
  REQUIRE(l.matrix()(0, 1) == doctest::Approx(a));
  const LatticeBasis back = apply_automorphism(l, Automorphism::shear_reset());
  CHECK((back.matrix() - Mat3::diagonal(a, a, a)).max_abs() < 1e-14);

  const LatticeBasis half = apply_automorphism(sheared_cube(a, a / 2), Automorphism::shear_reset());
  CHECK(max_abs(half.edge(1) - Vec3{-a / 2, a, 0}) < 1e-14);
}

TEST_CASE("Lees-Edwards folds at half a lattice spacing") {
  const LeesEdwardsPolicy p{1.0, 1.0};
  CHECK_FALSE(lees_edwards_step(sheared_cube(1.0, 0.49), p).has_value());
  CHECK_FALSE(lees_edwards_step(sheared_cube(1.0, -0.5), p).has_value());

  const auto m = lees_edwards_step(sheared_cube(1.0, 0.5), p);
  REQUIRE(m.has_value());
  const LatticeBasis folded = apply_automorphism(sheared_cube(1.0, 0.5), *m);
  CHECK(folded.matrix()(0, 1) == doctest::Approx(-0.5));

  CHECK_THROWS_AS(lees_edwards_step(LatticeBasis(Mat3::diagonal(1, 2, 1)), p), LayoutMismatch);
}

TEST_CASE("Lees-Edwards policy keeps the offset bounded through a long run") {
  RemapPolicy policy = LeesEdwardsPolicy{0.3, 5.0};
  const FlowMatrix flow = FlowMatrix::shear(0.3);
  LatticeBasis l = LatticeBasis::cube(5.0);
  const double dt = 0.01;
  int remaps = 0;
  for (int step = 0; step < 5000; ++step) {
    l = evolve_basis(l, flow, dt);
    if (auto ev = check_remap(policy, l, flow, dt)) {
      l = ev->basis;
      ++remaps;
    }
    CHECK(std::fabs(l.matrix()(0, 1)) <= 2.5 + 1e-9);
  }
  // 5000 steps of shear 0.3 displace the top face by 0.3 * 50 * 5 = 75 = 15 spacings.
  CHECK(remaps == 15);
}

TEST_CASE("planar elongation returns to its starting lattice under KR") {
  const Automorphism m(IMat3{{2, 1, 0, 1, 1, 0, 0, 0, 1}});
  const double rate = 0.1;
  const FlowMatrix flow = FlowMatrix::planar_elongation(rate);
  const KrPolicy p = make_kr_policy(flow, m, 3.0);

  // Independent eigenvalues: the characteristic polynomial of the upper block
  // is x^2 - 3x + 1.
  const double mu = (3.0 + std::sqrt(5.0)) / 2.0;
  CHECK(p.t_star == doctest::Approx(std::log(mu) / rate).epsilon(1e-12));
  CHECK(p.l0.volume() == doctest::Approx(27.0).epsilon(1e-12));
  CHECK(kr_reset_check(p.l0, flow, m, p.t_star));
  CHECK_FALSE(kr_reset_check(p.l0, flow, m, 0.9 * p.t_star));

  CHECK_THROWS_AS(make_kr_policy(FlowMatrix::shear(0.1), m, 3.0), InvalidArgument);
}

TEST_CASE("KR policy resets once per period") {
  const Automorphism m(IMat3{{2, 1, 0, 1, 1, 0, 0, 0, 1}});
  const FlowMatrix flow = FlowMatrix::planar_elongation(0.5);
  KrPolicy kr = make_kr_policy(flow, m, 2.0);
  const LatticeBasis l0 = kr.l0;
  const double t_star = kr.t_star;
  RemapPolicy policy = kr;
  const double dt = t_star / 200.0;
  LatticeBasis l = l0;
  int resets = 0;
  for (int step = 0; step < 600; ++step) {
    l = evolve_basis(l, flow, dt);
    if (auto ev = check_remap(policy, l, flow, dt)) {
      CHECK((apply_automorphism(l, ev->transform).matrix() - ev->basis.matrix()).max_abs() < 1e-8);
      l = ev->basis;
      ++resets;
      CHECK((l.matrix() - l0.matrix()).max_abs() < 1e-9);
    }
  }
  CHECK(resets == 3);
}

TEST_CASE("lattice reduction") {
  const double a = 2.0;
  const ReducedBasis r = reduce_basis(sheared_cube(a, a));
  CHECK((r.basis.matrix() - Mat3::diagonal(a, a, a)).max_abs() < 1e-14);
  CHECK(r.transform == Automorphism::shear_reset());

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> pick(-3, 3);
  for (int trial = 0; trial < 100; ++trial) {
    // Random unimodular product of elementary shears.
    IMat3 u = IMat3::identity();
    for (int s = 0; s < 6; ++s) {
      IMat3 e = IMat3::identity();
      const int i = trial % 3 == 0 ? s % 3 : (s + 1) % 3, j = (i + 1 + s % 2) % 3;
      e(i, j) = pick(rng);
      u = u * e;
    }
    const LatticeBasis start(Mat3::diagonal(3, 4, 5) * u.to_real());
    const ReducedBasis red = reduce_basis(start);
    CHECK(red.transform.matrix().det() == 1);
    CHECK((start.matrix() * red.transform.matrix().to_real() - red.basis.matrix()).max_abs() < 1e-9);
    const ReducedBasis again = reduce_basis(red.basis);
    CHECK(again.transform.is_identity());
    CHECK(deformation_metrics(red.basis).max_aspect <= deformation_metrics(start).max_aspect + 1e-12);
  }
}

TEST_CASE("deformation metrics") {
  const DeformationMetrics cube = deformation_metrics(LatticeBasis::cube(3.0));
  CHECK(cube.max_aspect == doctest::Approx(1.0));
  CHECK(cube.min_height == doctest::Approx(3.0));

  const DeformationMetrics half = deformation_metrics(sheared_cube(1.0, 0.5));
  CHECK(half.tilt_degrees[1] == doctest::Approx(std::atan(0.5) * 180.0 / std::acos(-1.0)).epsilon(1e-12));
  CHECK(half.tilt_degrees[1] == doctest::Approx(26.565).epsilon(1e-4));
  // v1 leans against the tilted face pair by the same angle.
  CHECK(half.tilt_degrees[0] == doctest::Approx(half.tilt_degrees[1]));
  CHECK(half.tilt_degrees[2] == doctest::Approx(0.0));
}

TEST_CASE("remapping keeps every pairwise minimum-image distance") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const LatticeBasis l(Mat3{{4, 5.5, 0.3, 0, 4, 1.7, 0, 0, 4}});
  const ReducedBasis r = reduce_basis(l);
  REQUIRE_FALSE(r.transform.is_identity());
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 a = l.to_cartesian({u(rng), u(rng), u(rng)});
    const Vec3 b = l.to_cartesian({u(rng), u(rng), u(rng)});
    CHECK(brute_min_distance(a, b, r.basis) == doctest::Approx(brute_min_distance(a, b, l)).epsilon(1e-12));
  }
}

TEST_CASE("policy validation") {
  CHECK_THROWS_AS(validate_policy(ReductionPolicy{1.0}), InvalidArgument);
  CHECK_NOTHROW(validate_policy(ReductionPolicy{2.0}));
}
