#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "flowcell/cell_dynamic_offset.hpp"
#include "flowcell/error.hpp"
#include "flowcell/forces.hpp"
#include "flowcell/metrics.hpp"

using namespace flowcell;

namespace {

const double kPi = std::acos(-1.0);

EfficiencyTrace constant_trace(std::size_t n) {
  EfficiencyTrace t;
  for (std::size_t i = 0; i < n; ++i) {
    EfficiencyRecord r;
    r.step = i + 1;
    r.t = 0.001 * static_cast<double>(i + 1);
    r.v_ds = 30.0;
    r.v_do_avg = 28.0;
    r.eff_ds = 0.125;
    r.eff_do = 0.14;
    r.wall_ds = 2.0;
    r.wall_do = 1.5;
    r.checks_ds = 100;
    r.within_ds = 10;
    r.checks_do = 80;
    r.within_do = 10;
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("search efficiency of reference volumes") {
  CHECK(search_efficiency(27.0, 1.0) == doctest::Approx(0.15514).epsilon(1e-5 / 0.15514));
  CHECK(search_efficiency(4.0 / 3.0 * kPi, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(search_efficiency(33.75, 1.0) == doctest::Approx(0.1241).epsilon(1e-3));
  CHECK(search_efficiency(27.0 * 8.0, 2.0) == doctest::Approx(search_efficiency(27.0, 1.0)));
  CHECK_THROWS_AS(search_efficiency(0.0, 1.0), InvalidArgument);
}

TEST_CASE("normalized cutoff gives a unit interaction ball") {
  const double d = normalize_cutoff();
  CHECK(d == doctest::Approx(0.6204).epsilon(1e-4));
  CHECK(std::fabs(ball_volume(d) - 1.0) < 1e-12);
  CHECK(d * d * d == doctest::Approx(0.2387).epsilon(1e-3));
}

TEST_CASE("geometry record of the equilibrium cube") {
  const EfficiencyRecord r = geometry_record(LatticeBasis::cube(10.0), 1.0);
  CHECK(r.v_ds == doctest::Approx(27.0));
  CHECK(r.v_do_avg == doctest::Approx(27.0));
  CHECK(r.eff_ds == doctest::Approx(0.15514).epsilon(1e-4));
  CHECK(r.eff_do == doctest::Approx(0.15514).epsilon(1e-4));
  CHECK(r.max_aspect == doctest::Approx(1.0));
}

TEST_CASE("efficiency never beats the equilibrium bound") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> t(-0.5, 0.5);
  for (int trial = 0; trial < 200; ++trial) {
    Mat3 m = Mat3::diagonal(9.0, 8.0, 10.0);
    m(0, 1) = 9.0 * t(rng);
    m(0, 2) = 9.0 * t(rng);
    m(1, 2) = 8.0 * t(rng);
    const EfficiencyRecord r = geometry_record(LatticeBasis(m), 1.0);
    CHECK(r.eff_ds <= 4.0 * kPi / 81.0 + 1e-6);
    CHECK(r.eff_do <= 4.0 * kPi / 81.0 + 1e-6);
    CHECK(r.eff_ds > 0.0);
  }
}

TEST_CASE("dynamic-offset efficiency on a large grid") {
  const double ideal = 4.0 * kPi / 81.0;
  CHECK(geometry_record(LatticeBasis::cube(50.0), 1.0).eff_do == doctest::Approx(ideal).epsilon(0.01));

  // A generic tilt widens the seams, and the mean count follows the closed form.
  const LatticeBasis tilted(Mat3{{50, 13.3, 7.7, 0, 50, 21.1, 0, 0, 50}});
  const RotatedBasis rb = qr_orient(tilted);
  const auto l = do_cell_counts(rb, 1.0);
  const EfficiencyRecord r = geometry_record(tilted, 1.0);
  CHECK(r.v_do_avg == doctest::Approx(do_cell_volume(rb, l) * avg_neighborhood_count(l[0], l[1], l[2])));
  CHECK(r.eff_do < ideal);
  CHECK(r.eff_do > 0.97 * ideal);
}

TEST_CASE("measured efficiency tracks the geometric one") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const WCAPotential pot;
  const double rc = pot.cutoff();
  const LatticeBasis l(Mat3{{9.3 * rc, 2.1 * rc, 1.4 * rc, 0, 8.6 * rc, 3.0 * rc, 0, 0, 9.9 * rc}});
  ParticleSet ps;
  for (int i = 0; i < 8192; ++i) ps.q.push_back(l.to_cartesian({u(rng), u(rng), u(rng)}));
  ps.p.assign(ps.q.size(), Vec3{});
  const EfficiencyRecord geo = geometry_record(l, rc);
  const auto fds = cell_list_forces(ps, l, pot, Strategy::dynamic_size);
  const auto fdo = cell_list_forces(ps, l, pot, Strategy::dynamic_offset);
  const double eds = double(fds.pairs_within_cutoff) / double(fds.pair_checks);
  const double edo = double(fdo.pairs_within_cutoff) / double(fdo.pair_checks);
  CHECK(eds == doctest::Approx(geo.eff_ds).epsilon(0.1));
  CHECK(edo == doctest::Approx(geo.eff_do).epsilon(0.1));
}

TEST_CASE("long-run averages") {
  const EfficiencySummary s = long_run_average(constant_trace(20), 5);
  CHECK(s.samples == 15);
  CHECK(s.mean_eff_ds == doctest::Approx(0.125));
  CHECK(s.mean_eff_do == doctest::Approx(0.14));
  CHECK(s.mean_v_ds == doctest::Approx(30.0));
  CHECK(s.wall_ratio == doctest::Approx(0.75));
  CHECK(s.predicted_ratio == doctest::Approx(28.0 / 30.0));
  CHECK(s.empirical_eff_ds == doctest::Approx(0.1));
  CHECK(s.empirical_eff_do == doctest::Approx(0.125));

  CHECK_THROWS_AS(long_run_average(constant_trace(5), 5), EmptyWindow);
  CHECK_THROWS_AS(long_run_average(EfficiencyTrace{}, 0), EmptyWindow);
}

TEST_CASE("CSV layout") {
  EfficiencyTrace t = constant_trace(3);
  t.d_cut = 1.0;
  std::ostringstream os;
  write_csv(t, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "step,t,min_height,max_aspect,V_DS,V_DO_avg,eff_DS,eff_DO,checks_DS,checks_DO");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    CHECK(std::count(line.begin(), line.end(), ',') == 9);
    // Volumes are in units of the interaction ball.
    std::istringstream fields(line);
    std::string cell;
    for (int i = 0; i < 5; ++i) std::getline(fields, cell, ',');
    CHECK(std::stod(cell) == doctest::Approx(30.0 / (4.0 * kPi / 3.0)).epsilon(1e-6));
  }
  CHECK(rows == 3);
}
