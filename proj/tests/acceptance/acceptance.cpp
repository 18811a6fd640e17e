// End-to-end acceptance checks. Each criterion prints one PASS or FAIL line
// followed by the numbers behind it; the exit status is nonzero if any fail.

#include <CLI11.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "flowcell/cell_dynamic_offset.hpp"
#include "flowcell/commands.hpp"
#include "flowcell/config.hpp"
#include "flowcell/flowcell.h"
#include "flowcell/forces.hpp"
#include "flowcell/integrator.hpp"
#include "flowcell/metrics.hpp"
#include "flowcell/remap.hpp"

namespace fs = std::filesystem;
using namespace flowcell;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

template <class... T>
std::string fmtn(const char* f, T... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

double max_rel_error(const std::vector<Vec3>& got, const std::vector<Vec3>& want) {
  double scale = 0.0, err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    scale = std::fmax(scale, max_abs(want[i]));
    err = std::fmax(err, max_abs(got[i] - want[i]));
  }
  return scale > 0.0 ? err / scale : err;
}

// --- boxes drawn from the remap policies ---------------------------------

enum class PolicyKind { lees_edwards, reduction, kr };

const char* policy_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::lees_edwards: return "lees_edwards";
    case PolicyKind::reduction: return "reduction";
    default: return "kr";
  }
}

struct PolicyRun {
  FlowMatrix flow;
  RemapPolicy policy;
  LatticeBasis l;
  double dt = 0.01;
};

PolicyRun start_policy(PolicyKind kind, double side) {
  PolicyRun r;
  const Automorphism eigen_m(IMat3{{1, 1, 1, 1, 2, 2, 1, 2, 3}});
  switch (kind) {
    case PolicyKind::lees_edwards:
      r.flow = FlowMatrix::shear(1.0);
      r.policy = LeesEdwardsPolicy{1.0, side};
      r.l = LatticeBasis::cube(side);
      break;
    case PolicyKind::reduction:
      r.flow = FlowMatrix::uniaxial(0.05);
      r.policy = ReductionPolicy{2.0};
      r.l = eigen_basis(eigen_m, side);
      r.dt = 0.05;
      break;
    case PolicyKind::kr: {
      r.flow = FlowMatrix::planar_elongation(0.05);
      KrPolicy kr = make_kr_policy(r.flow, Automorphism(IMat3{{2, 1, 0, 1, 1, 0, 0, 0, 1}}), side);
      r.l = kr.l0;
      r.policy = kr;
      r.dt = 0.05;
      break;
    }
  }
  return r;
}

// One step of box evolution; returns the remap event if the policy fired.
std::optional<RemapEvent> advance(PolicyRun& r) {
  r.l = evolve_basis(r.l, r.flow, r.dt);
  auto ev = check_remap(r.policy, r.l, r.flow, r.dt);
  if (ev) r.l = ev->basis;
  return ev;
}

struct SampledBox {
  LatticeBasis before;               // as the policy leaves it, or just before a remap
  std::optional<RemapEvent> remap;   // set when the sample straddles a remap
};

SampledBox sample_box(PolicyKind kind, double side, bool straddle, std::mt19937_64& rng) {
  PolicyRun r = start_policy(kind, side);
  std::uniform_int_distribution<int> steps(0, 3000);
  for (int n = steps(rng); n > 0; --n) advance(r);
  if (!straddle) return {r.l, std::nullopt};
  for (int guard = 0; guard < 1000000; ++guard) {
    PolicyRun probe = r;
    probe.l = evolve_basis(r.l, r.flow, r.dt);
    if (auto ev = check_remap(probe.policy, probe.l, probe.flow, probe.dt)) return {probe.l, ev};
    r = probe;
  }
  throw std::runtime_error("policy never remapped");
}

// Uniform positions with no two closer than min_dist.
ParticleSet random_fluid(const LatticeBasis& l, std::size_t n, double min_dist, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ParticleSet ps;
  while (ps.q.size() < n) {
    const Vec3 q = l.to_cartesian({u(rng), u(rng), u(rng)});
    bool ok = true;
    for (const Vec3& o : ps.q)
      if (norm2(minimum_image_displacement(o, q, l)) < min_dist * min_dist) {
        ok = false;
        break;
      }
    if (ok) ps.q.push_back(q);
  }
  ps.p.assign(n, Vec3{});
  return ps;
}

// --- criteria --------------------------------------------------------------

Outcome ac1() {
  double worst = 0.0;
  int boxes = 0;
  for (double d : {std::pow(2.0, 1.0 / 6.0), normalize_cutoff(), 1.0})
    for (int k = 4; k <= 24; ++k) {
      const EfficiencyRecord r = geometry_record(LatticeBasis::cube(k * d), d);
      worst = std::fmax(worst, std::fabs(r.eff_ds - 0.15514));
      worst = std::fmax(worst, std::fabs(r.eff_do - 0.15514));
      ++boxes;
    }

  // The same quantity as reported by the bench command through the C API.
  fc_config* cfg = nullptr;
  fc_summary s{};
  fc_config_parse_string("box_side_in_cutoffs = 10\nn_steps = 200\n", &cfg);
  const fc_status st = fc_run_bench(cfg, &s, nullptr, 0);
  fc_config_free(cfg);
  const bool bench_ok = st == FC_OK && std::fabs(s.mean_eff_ds - 0.15514) <= 1e-4 &&
                        std::fabs(s.mean_eff_do - 0.15514) <= 1e-4;
  return {worst <= 1e-4 && bench_ok,
          fmtn("%d cubes, max |eff - 0.15514| = %.2e; bench eff_DS=%.6f eff_DO=%.6f (tol 1e-4)", boxes, worst,
               s.mean_eff_ds, s.mean_eff_do)};
}

Outcome ac2() {
  double worst = 0.0;
  int grids = 0;
  for (int l1 = 4; l1 <= 8; ++l1)
    for (int l2 = 4; l2 <= 8; ++l2)
      for (int l3 = 4; l3 <= 8; ++l3) {
        const std::array<int, 3> l{l1, l2, l3};
        // Offsets that are not whole numbers of cells across any face.
        RotatedBasis rb;
        rb.qrot = Mat3::identity();
        rb.r = Mat3{{1.07 * l1, 0.413 * l1, 0.291 * l1, 0, 1.11 * l2, 0.377 * l2, 0, 0, 1.03 * l3}};
        long long total = 0;
        for (int k = 0; k < l3; ++k)
          for (int j = 0; j < l2; ++j)
            for (int i = 0; i < l1; ++i) {
              const int c = do_neighborhood({i, j, k}, rb, l).count;
              if (c != 27 && c != 30 && c != 34 && c != 36) return {false, fmtn("cell count %d outside {27,30,34,36}", c)};
              total += c;
            }
        const double mean = static_cast<double>(total) / (l1 * l2 * l3);
        worst = std::fmax(worst, std::fabs(mean - avg_neighborhood_count(l1, l2, l3)));
        ++grids;
      }
  return {worst <= 1e-12, fmtn("%d grids, max |enumerated - closed form| = %.2e (tol 1e-12)", grids, worst)};
}

Outcome ac3() {
  std::mt19937_64 rng(2024);
  const WCAPotential pot;
  const std::size_t n = 500;
  const double density = 0.45;
  const double side = std::cbrt(n / density);
  double worst = 0.0;
  int trials = 0, straddles = 0, failures = 0;
  std::string first_failure;
  for (int t = 0; t < 200; ++t) {
    const PolicyKind kind = static_cast<PolicyKind>(t % 3);
    const bool straddle = t % 4 == 3;
    const SampledBox box = sample_box(kind, side, straddle, rng);
    ParticleSet ps = random_fluid(box.before, n, 0.85, rng);
    const ForceAccumulator ref = all_pairs_forces(ps, box.before, pot);

    std::vector<std::pair<LatticeBasis, ParticleSet>> variants{{box.before, ps}};
    if (box.remap) {
      ParticleSet moved = ps;
      wrap_all(moved.q, box.remap->basis);
      variants.emplace_back(box.remap->basis, moved);
      ++straddles;
    }
    for (const auto& [l, set] : variants)
      for (Strategy s : {Strategy::dynamic_size, Strategy::dynamic_offset}) {
        const ForceAccumulator f = cell_list_forces(set, l, pot, s);
        const double e = max_rel_error(f.forces, ref.forces);
        worst = std::fmax(worst, e);
        if (!(e <= 1e-10) || f.pairs_within_cutoff != ref.pairs_within_cutoff) {
          if (failures++ == 0)
            first_failure = fmtn(" first failure: trial %d (%s, %s) err %.2e", t, policy_name(kind), strategy_name(s), e);
        }
      }
    ++trials;
  }
  return {failures == 0, fmtn("%d trials (%d straddling a remap), max relative force error %.2e (tol 1e-10)%s",
                              trials, straddles, worst, first_failure.c_str())};
}

Outcome ac4() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0), dir(-1.0, 1.0);
  const WCAPotential pot;
  const double rc = pot.cutoff();
  const double side = 10.0;
  ForceEngine ds(Strategy::dynamic_size, pot), dof(Strategy::dynamic_offset, pot);
  ForceAccumulator acc;
  int missed = 0, leaked = 0, pairs = 0;
  LatticeBasis l;
  for (int t = 0; t < 10000; ++t) {
    if (t % 100 == 0) l = sample_box(static_cast<PolicyKind>((t / 100) % 3), side, false, rng).before;
    Vec3 n{dir(rng), dir(rng), dir(rng)};
    while (norm(n) < 1e-3) n = {dir(rng), dir(rng), dir(rng)};
    n = n * (1.0 / norm(n));
    const Vec3 a = l.to_cartesian({u(rng), u(rng), u(rng)});
    ParticleSet ps;
    ps.p.assign(2, Vec3{});
    ps.q = {a, a + n * (rc * (1.0 - 1e-6))};
    wrap_all(ps.q, l);
    for (ForceEngine* e : {&ds, &dof}) {
      e->compute(ps, l, acc);
      if (acc.pairs_within_cutoff != 1) ++missed;
    }
    ps.q = {a, a + n * (rc * (1.0 + 1e-6))};
    wrap_all(ps.q, l);
    for (ForceEngine* e : {&ds, &dof}) {
      e->compute(ps, l, acc);
      if (max_abs(acc.forces[0]) != 0.0 || max_abs(acc.forces[1]) != 0.0 || acc.potential_energy != 0.0) ++leaked;
    }
    ++pairs;
  }
  return {missed == 0 && leaked == 0,
          fmtn("%d pairs x 2 strategies: %d missed at d(1-1e-6), %d nonzero at d(1+1e-6)", pairs, missed, leaked)};
}

Outcome ac5() {
  RunConfig cfg = parse_config("flow = shear 0.1\nremap = lees_edwards\nn_particles = 500\ndt = 0.001\n");
  SimulationState s = initial_state(cfg, Strategy::dynamic_size);
  Integrator integ(cfg.potential());
  integ.initialize(s);
  double max_tilt = 0.0;
  std::uint64_t remaps = 0;
  integ.run(s, 100000, {[&](const StepInfo& info, const SimulationState& st) {
              if (info.remap) ++remaps;
              const Vec3 tilt = deformation_metrics(st.l).tilt_degrees;
              max_tilt = std::fmax(max_tilt, std::fmax(tilt.x, std::fmax(tilt.y, tilt.z)));
            }});
  const double bound = std::atan(0.5) * 180.0 / std::numbers::pi;
  return {max_tilt <= 26.57 + 1e-3 && remaps > 0,
          fmtn("1e5 steps, %llu remaps, max tilt %.6f deg (bound 26.57 + 1e-3; exact half-spacing angle %.6f)",
               static_cast<unsigned long long>(remaps), max_tilt, bound)};
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " >/dev/null";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(f, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  return rows;
}

Outcome ac6(const std::string& cli, const fs::path& dir) {
  const fs::path cfg = dir / "acceptance_fig9.cfg", csv = dir / "acceptance_fig9.csv";
  std::ofstream(cfg) << "flow = uniaxial 0.05\n"
                        "cutoff = normalized\n"
                        "box_side_in_cutoffs = 10\n"
                        "initial_basis = eigen\n"
                        "remap = reduction 4\n"
                        "dt = 0.01\n"
                        "n_steps = 30000\n";
  const int rc = run_cli(cli, "bench --config \"" + cfg.string() + "\" --out \"" + csv.string() + "\"");
  if (rc != 0) return {false, fmtn("bench exited with %d", rc)};
  const auto rows = read_csv(csv);
  const std::size_t burn = rows.size() / 10;
  double sum_ds = 0.0, sum_do = 0.0, worst_gap = 0.0, worst_aspect = 0.0;
  std::size_t deformed = 0, inverted = 0;
  for (std::size_t i = burn; i < rows.size(); ++i) {
    const double aspect = rows[i][3], eds = rows[i][6], edo = rows[i][7];
    sum_ds += eds;
    sum_do += edo;
    if (aspect > 1.05) {
      ++deformed;
      if (edo < eds) {
        ++inverted;
        if (eds - edo > worst_gap) {
          worst_gap = eds - edo;
          worst_aspect = aspect;
        }
      }
    }
  }
  const double n = static_cast<double>(rows.size() - burn);
  const double mds = sum_ds / n, mdo = sum_do / n;
  const bool ordinal = mdo > mds && inverted == 0;
  const bool quantitative = mds >= 0.05 && mds <= 0.09 && mdo >= 0.10 && mdo <= 0.1552;
  return {ordinal && quantitative,
          fmtn("mean eff_DS=%.4f (ref 0.0688, range [0.05,0.09]) eff_DO=%.4f (ref 0.123, range [0.10,0.1552]); "
               "(a) means ordered: %s, per-step eff_DO<eff_DS on %zu of %zu deformed steps (largest gap %.4f at "
               "aspect %.3f); (b) %s",
               mds, mdo, mdo > mds ? "yes" : "no", inverted, deformed, worst_gap, worst_aspect,
               quantitative ? "in range" : "out of range")};
}

Outcome ac7() {
  fc_config* cfg = nullptr;
  fc_status st = fc_config_parse_string("flow = uniaxial 0.05\n"
                                        "n_particles = 1728\n"
                                        "density = 0.8\n"
                                        "initial_basis = eigen\n"
                                        "remap = reduction 4\n"
                                        "prestrain = 30\n"
                                        "dt = 0.001\n"
                                        "n_steps = 10000\n",
                                        &cfg);
  fc_summary s{};
  if (st == FC_OK) st = fc_run_compare(cfg, &s, nullptr, 0);
  fc_config_free(cfg);
  if (st != FC_OK) return {false, std::string("compare failed: ") + fc_last_error()};
  const double checks_ratio = s.measured_eff_do > 0.0 ? s.measured_eff_ds / s.measured_eff_do : 0.0;
  return {s.wall_ratio < 1.0,
          fmtn("N=1728, 10000 steps: wall DS %.2f s, DO %.2f s, DO/DS = %.3f (ref 0.717); predicted from volumes "
               "%.3f (ref ~0.56), from measured pair checks %.3f; measured eff DS %.4f DO %.4f",
               s.wall_ds, s.wall_do, s.wall_ratio, s.predicted_ratio, checks_ratio, s.measured_eff_ds,
               s.measured_eff_do)};
}

// Minimum-image distance by brute force over a generous image range.
double brute_distance(const Vec3& a, const Vec3& b, const LatticeBasis& l) {
  Vec3 f = l.to_fractional(b - a);
  f = {f.x - std::round(f.x), f.y - std::round(f.y), f.z - std::round(f.z)};
  const Vec3 base = l.to_cartesian(f);
  double best = 1e300;
  for (int i = -5; i <= 5; ++i)
    for (int j = -5; j <= 5; ++j)
      for (int k = -5; k <= 5; ++k) best = std::fmin(best, norm2(base + l.translation({i, j, k})));
  return std::sqrt(best);
}

Outcome ac8() {
  std::mt19937_64 rng(8);
  const WCAPotential pot;
  double worst_dist = 0.0, worst_force = 0.0;
  int events = 0;
  for (PolicyKind kind : {PolicyKind::lees_edwards, PolicyKind::reduction, PolicyKind::kr}) {
    PolicyRun r = start_policy(kind, 10.4);
    int seen = 0;
    for (int step = 0; step < 200000 && seen < 4; ++step) {
      const LatticeBasis before = evolve_basis(r.l, r.flow, r.dt);
      const auto ev = advance(r);
      if (!ev) continue;
      ++seen;
      ++events;
      const LatticeBasis after = apply_automorphism(before, ev->transform);
      ParticleSet ps = random_fluid(before, 120, 0.85, rng);
      for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size(); ++j) {
          const double d0 = brute_distance(ps.q[i], ps.q[j], before);
          const double d1 = brute_distance(ps.q[i], ps.q[j], after);
          worst_dist = std::fmax(worst_dist, std::fabs(d0 - d1));
        }
      ParticleSet dense = random_fluid(before, 500, 0.85, rng);
      for (Strategy s : {Strategy::dynamic_size, Strategy::dynamic_offset}) {
        const ForceAccumulator f0 = cell_list_forces(dense, before, pot, s);
        ParticleSet moved = dense;
        wrap_all(moved.q, after);
        const ForceAccumulator f1 = cell_list_forces(moved, after, pot, s);
        worst_force = std::fmax(worst_force, max_rel_error(f1.forces, f0.forces));
      }
    }
  }
  return {events == 12 && worst_dist <= 1e-10 && worst_force <= 1e-10,
          fmtn("%d policy remaps: max distance change %.2e, max relative force change %.2e (tol 1e-10)", events,
               worst_dist, worst_force)};
}

Outcome ac9(const std::string& cli, const fs::path& dir) {
  const fs::path cfg = dir / "acceptance_determinism.cfg";
  std::ofstream(cfg) << "flow = shear 0.5\nn_particles = 500\nn_steps = 300\nseed = 11\n";
  auto run = [&](const fs::path& out, const char* extra) {
    return run_cli(cli, "simulate --config \"" + cfg.string() + "\" --out \"" + out.string() + "\"" + extra);
  };
  const fs::path a = dir / "acceptance_det_a.csv", b = dir / "acceptance_det_b.csv", c = dir / "acceptance_det_c.csv";
  if (run(a, "") != 0 || run(b, "") != 0 || run(c, " --seed 12") != 0) return {false, "simulate failed"};
  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), {});
  };
  const std::string sa = slurp(a), sb = slurp(b), sc = slurp(c);
  return {!sa.empty() && sa == sb && sa != sc,
          fmtn("two runs: %zu and %zu bytes, identical: %s; another seed differs: %s", sa.size(), sb.size(),
               sa == sb ? "yes" : "no", sa != sc ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string cli;
  std::string workdir = ".";
  std::vector<int> only;
  app.add_option("--cli", cli, "Path to the flowcell executable")->required();
  app.add_option("--workdir", workdir, "Directory for scratch configs and CSV files");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir = fs::path(workdir) / "acceptance_out";
  fs::create_directories(dir);

  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"equilibrium efficiency", ac1},
      {"average neighborhood count", ac2},
      {"oracle force equivalence", ac3},
      {"neighborhood completeness", ac4},
      {"Lees-Edwards tilt bound", ac5},
      {"uniaxial efficiency benchmark", [&] { return ac6(cli, dir); }},
      {"runtime comparison", ac7},
      {"remap invariance", ac8},
      {"determinism", [&] { return ac9(cli, dir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i + 1);
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("AC%d %s  %s: %s [%.1fs]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
