#include "flowcell/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "flowcell/error.hpp"

namespace flowcell {

namespace {

RemapKind resolve_remap(const RunConfig& cfg) {
  if (cfg.remap != RemapKind::automatic) return cfg.remap;
  switch (cfg.flow_kind) {
    case FlowKind::none: return RemapKind::none;
    case FlowKind::shear: return RemapKind::lees_edwards;
    case FlowKind::planar_elongation: return RemapKind::kr;
    default: return RemapKind::reduction;
  }
}

const IMat3 kPlanarKr{{2, 1, 0, 1, 1, 0, 0, 0, 1}};

std::uint64_t step_count(double duration, double dt) {
  return static_cast<std::uint64_t>(std::llround(duration / dt));
}

void write_trace(const RunConfig& cfg, const EfficiencyTrace& trace) {
  if (cfg.output.empty()) return;
  std::ofstream out(cfg.output, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + cfg.output + "'");
  write_csv(trace, out);
  if (!out) throw IoError("write to '" + cfg.output + "' failed");
}

std::size_t burn_in_steps(const RunConfig& cfg, std::size_t n) {
  return static_cast<std::size_t>(std::floor(cfg.burn_in * static_cast<double>(n)));
}

// Geometric columns; zeros when a grid would be too coarse to build.
EfficiencyRecord safe_geometry(const LatticeBasis& l, double d_cut) {
  try {
    return geometry_record(l, d_cut);
  } catch (const DegenerateGrid&) {
    EfficiencyRecord r;
    const DeformationMetrics m = deformation_metrics(l);
    r.min_height = m.min_height;
    r.max_aspect = m.max_aspect;
    return r;
  }
}

std::string finish_text(const RunReport& r, double d_cut, const std::string& title) {
  std::ostringstream os;
  os << title << "\n";
  write_summary(r.summary, d_cut, os);
  os << "remaps             " << r.remaps << "\n";
  return os.str();
}

struct TrajectoryRun {
  EfficiencyTrace trace;
  std::uint64_t remaps = 0;
};

// The configured dynamics with `physics` driving the trajectory. When
// `shadow` is set, that strategy also scans every configuration (timed) so
// both columns of the trace are filled from one trajectory.
class Trajectory {
 public:
  Trajectory(const RunConfig& cfg, Strategy physics, std::optional<Strategy> shadow)
      : physics_(physics), shadow_(shadow), s_(initial_state(cfg, physics)), integ_(cfg.potential()) {
    if (cfg.drop_neighbor) integ_.set_scan_options(ScanOptions{.drop_face_neighbor = true});
    integ_.initialize(s_);
    out_.trace.d_cut = cfg.d_cut();
    out_.trace.records.reserve(cfg.n_steps);
    t0_ = s_.t;
  }

  void advance(std::uint64_t n) {
    auto observer = [this](const StepInfo& info, const SimulationState& st) { record(info, st); };
    integ_.run(s_, n, {observer});
  }

  TrajectoryRun& result() { return out_; }

 private:
  void record(const StepInfo& info, const SimulationState& st) {
    const double d_cut = out_.trace.d_cut;
    EfficiencyRecord r = physics_ == Strategy::all_pairs ? safe_geometry(st.l, d_cut) : geometry_record(st.l, d_cut);
    r.step = info.step;
    r.t = t0_ + static_cast<double>(info.step) * st.dt;
    auto fill = [&](Strategy which, const ForceAccumulator& acc, double wall) {
      if (which == Strategy::dynamic_size) {
        r.checks_ds = acc.pair_checks;
        r.within_ds = acc.pairs_within_cutoff;
        r.wall_ds = wall;
      } else if (which == Strategy::dynamic_offset) {
        r.checks_do = acc.pair_checks;
        r.within_do = acc.pairs_within_cutoff;
        r.wall_do = wall;
      }
    };
    fill(physics_, st.forces, info.force_seconds);
    if (shadow_) {
      const auto a = std::chrono::steady_clock::now();
      integ_.engine(*shadow_).compute(st.ps, st.l, scratch_);
      const auto b = std::chrono::steady_clock::now();
      fill(*shadow_, scratch_, std::chrono::duration<double>(b - a).count());
    }
    if (info.remap) ++out_.remaps;
    out_.trace.records.push_back(r);
  }

  Strategy physics_;
  std::optional<Strategy> shadow_;
  SimulationState s_;
  Integrator integ_;
  ForceAccumulator scratch_;
  TrajectoryRun out_;
  double t0_ = 0.0;
};

TrajectoryRun run_trajectory(const RunConfig& cfg, Strategy physics, std::optional<Strategy> shadow) {
  Trajectory tr(cfg, physics, shadow);
  tr.advance(cfg.n_steps);
  return std::move(tr.result());
}

double relative_deviation(const ForceAccumulator& got, const ForceAccumulator& ref, std::size_t& worst) {
  double fmax = 0.0;
  for (const Vec3& f : ref.forces) fmax = std::fmax(fmax, max_abs(f));
  const double scale = fmax > 0.0 ? fmax : 1.0;
  double dev = 0.0;
  worst = 0;
  for (std::size_t i = 0; i < ref.forces.size(); ++i) {
    const double d = max_abs(got.forces[i] - ref.forces[i]) / scale;
    if (d > dev) {
      dev = d;
      worst = i;
    }
  }
  return dev;
}

}  // namespace

BoxSetup setup_box(const RunConfig& cfg) {
  const FlowMatrix flow = cfg.flow();
  const double side = cfg.side();
  BoxSetup b;
  switch (resolve_remap(cfg)) {
    case RemapKind::none:
    case RemapKind::automatic:
      b.policy = NoRemapPolicy{};
      break;
    case RemapKind::lees_edwards: {
      if (cfg.initial_basis != BasisKind::cube) throw ConfigError(0, "lees_edwards remapping needs initial_basis = cube");
      const Mat3& a = flow.matrix();
      for (int i = 0; i < 9; ++i)
        if (i != 1 && a.a[i] != 0.0) throw ConfigError(0, "lees_edwards remapping needs a simple shear flow");
      b.policy = LeesEdwardsPolicy{a(0, 1), side};
      break;
    }
    case RemapKind::kr: {
      try {
        KrPolicy p = make_kr_policy(flow, Automorphism(cfg.kr_matrix.value_or(kPlanarKr)), side);
        b.l0 = p.l0;
        b.policy = p;
      } catch (const InvalidArgument& e) {
        throw ConfigError(0, std::string("kr remapping: ") + e.what());
      }
      return b;
    }
    case RemapKind::reduction:
      b.policy = ReductionPolicy{cfg.reduction_threshold};
      break;
  }
  b.l0 = cfg.initial_basis == BasisKind::eigen ? eigen_basis(Automorphism(cfg.eigen_matrix), side)
                                               : LatticeBasis::cube(side);
  return b;
}

PrestrainedBox prestrained_box(const RunConfig& cfg) {
  BoxSetup b = setup_box(cfg);
  PrestrainedBox out{b.l0, b.policy, 0.0};
  const FlowMatrix flow = cfg.flow();
  const std::uint64_t n = step_count(cfg.prestrain, cfg.dt);
  if (n == 0 || flow.is_zero()) return out;
  const Mat3 e = matrix_exponential(flow.matrix() * cfg.dt);
  for (std::uint64_t i = 0; i < n; ++i) {
    out.l = LatticeBasis(e * out.l.matrix());
    if (auto ev = check_remap(out.policy, out.l, flow, cfg.dt)) out.l = ev->basis;
  }
  out.t = static_cast<double>(n) * cfg.dt;
  return out;
}

ParticleSet initial_particles(const RunConfig& cfg, const LatticeBasis& l) {
  const std::size_t n = cfg.n_particles;
  // Sites per edge proportional to the box heights so the spacing is even.
  const Vec3 h = box_heights(l);
  const double scale = std::cbrt(static_cast<double>(n) / (h.x * h.y * h.z));
  std::array<std::int64_t, 3> dims{};
  for (int i = 0; i < 3; ++i) dims[i] = std::max<std::int64_t>(1, std::llround(h[i] * scale));
  while (static_cast<std::size_t>(dims[0] * dims[1] * dims[2]) < n) {
    int widest = 0;
    for (int i = 1; i < 3; ++i)
      if (h[i] / static_cast<double>(dims[i]) > h[widest] / static_cast<double>(dims[widest])) widest = i;
    ++dims[widest];
  }

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> jitter(-0.05 * cfg.sigma, 0.05 * cfg.sigma);
  const double spread = std::sqrt(cfg.mass * cfg.temperature);
  std::normal_distribution<double> gauss(0.0, spread > 0.0 ? spread : 1.0);

  ParticleSet ps;
  ps.mass = cfg.mass;
  ps.q.reserve(n);
  ps.p.reserve(n);
  for (std::int64_t k = 0; k < dims[2] && ps.q.size() < n; ++k)
    for (std::int64_t j = 0; j < dims[1] && ps.q.size() < n; ++j)
      for (std::int64_t i = 0; i < dims[0] && ps.q.size() < n; ++i) {
        const Vec3 lam{(i + 0.5) / dims[0], (j + 0.5) / dims[1], (k + 0.5) / dims[2]};
        Vec3 q = l.to_cartesian(lam);
        q.x += jitter(rng);
        q.y += jitter(rng);
        q.z += jitter(rng);
        ps.q.push_back(wrap_into_cell(q, l));
      }
  Vec3 total;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 p{gauss(rng), gauss(rng), gauss(rng)};
    if (!(spread > 0.0)) p = Vec3{};
    ps.p.push_back(p);
    total += p;
  }
  if (n > 1) {
    const Vec3 mean = total * (1.0 / static_cast<double>(n));
    for (Vec3& p : ps.p) p -= mean;
  }
  return ps;
}

SimulationState initial_state(const RunConfig& cfg, Strategy strategy) {
  PrestrainedBox box = prestrained_box(cfg);
  SimulationState s;
  s.t = box.t;
  s.l = box.l;
  s.a = cfg.flow();
  s.policy = box.policy;
  s.strategy = strategy;
  s.dt = cfg.dt;
  s.ps = initial_particles(cfg, box.l);
  return s;
}

RunReport cmd_simulate(const RunConfig& cfg) {
  TrajectoryRun run;
  switch (cfg.strategy) {
    case StrategyChoice::ds: run = run_trajectory(cfg, Strategy::dynamic_size, std::nullopt); break;
    case StrategyChoice::do_: run = run_trajectory(cfg, Strategy::dynamic_offset, std::nullopt); break;
    case StrategyChoice::all_pairs: run = run_trajectory(cfg, Strategy::all_pairs, std::nullopt); break;
    case StrategyChoice::both:
      run = run_trajectory(cfg, Strategy::dynamic_size, Strategy::dynamic_offset);
      break;
  }
  RunReport r;
  r.trace = std::move(run.trace);
  r.remaps = run.remaps;
  write_trace(cfg, r.trace);
  r.summary = long_run_average(r.trace, burn_in_steps(cfg, r.trace.records.size()));
  r.text = finish_text(r, r.trace.d_cut, "simulate");
  return r;
}

RunReport cmd_compare(const RunConfig& cfg) {
  // Both trajectories advance in lockstep, alternating which goes first, so
  // drifting machine load is shared evenly between the two timings.
  Trajectory ds_run(cfg, Strategy::dynamic_size, std::nullopt);
  Trajectory do_run(cfg, Strategy::dynamic_offset, std::nullopt);
  for (std::uint64_t i = 0; i < cfg.n_steps; ++i) {
    Trajectory& first = i % 2 == 0 ? ds_run : do_run;
    Trajectory& second = i % 2 == 0 ? do_run : ds_run;
    first.advance(1);
    second.advance(1);
  }
  TrajectoryRun& ds = ds_run.result();
  TrajectoryRun& dor = do_run.result();
  RunReport r;
  r.trace = std::move(ds.trace);
  r.remaps = ds.remaps;
  for (std::size_t i = 0; i < r.trace.records.size() && i < dor.trace.records.size(); ++i) {
    EfficiencyRecord& rec = r.trace.records[i];
    const EfficiencyRecord& o = dor.trace.records[i];
    rec.checks_do = o.checks_do;
    rec.within_do = o.within_do;
    rec.wall_do = o.wall_do;
  }
  write_trace(cfg, r.trace);
  r.summary = long_run_average(r.trace, burn_in_steps(cfg, r.trace.records.size()));
  r.text = finish_text(r, r.trace.d_cut, "compare");
  return r;
}

RunReport cmd_verify(const RunConfig& cfg) {
  if (cfg.n_particles > 2000) throw ConfigError(0, "verify supports at most 2000 particles");
  std::vector<Strategy> checked;
  switch (cfg.strategy) {
    case StrategyChoice::ds: checked = {Strategy::dynamic_size}; break;
    case StrategyChoice::do_: checked = {Strategy::dynamic_offset}; break;
    case StrategyChoice::both: checked = {Strategy::dynamic_size, Strategy::dynamic_offset}; break;
    case StrategyChoice::all_pairs: checked = {}; break;
  }
  const Strategy physics = checked.empty() ? Strategy::all_pairs : checked.front();
  const WCAPotential pot = cfg.potential();
  SimulationState s = initial_state(cfg, physics);
  Integrator integ(pot, ForceMode::verification);
  if (cfg.drop_neighbor) integ.set_scan_options(ScanOptions{.drop_face_neighbor = true});
  integ.initialize(s);

  RunReport report;
  report.trace.d_cut = cfg.d_cut();
  ForceAccumulator acc;
  auto check = [&](std::uint64_t step) {
    const ForceAccumulator ref = all_pairs_forces(s.ps, s.l, pot);
    for (Strategy st : checked) {
      const ForceAccumulator* got = &s.forces;
      if (st != physics) {
        integ.engine(st).compute(s.ps, s.l, acc);
        got = &acc;
      }
      std::size_t worst = 0;
      const double dev = relative_deviation(*got, ref, worst);
      report.max_deviation = std::fmax(report.max_deviation, dev);
      const double escale = std::fmax(std::fabs(ref.potential_energy), 1.0);
      const double edev = std::fabs(got->potential_energy - ref.potential_energy) / escale;
      if (!(dev < 1e-10) || !(edev < 1e-10)) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "step %llu, particle %zu: %s force deviation %.3e relative (energy %.3e, pairs %llu vs %llu)",
                      static_cast<unsigned long long>(step), worst, strategy_name(st), dev, edev,
                      static_cast<unsigned long long>(got->pairs_within_cutoff),
                      static_cast<unsigned long long>(ref.pairs_within_cutoff));
        throw VerificationFailure(buf);
      }
    }
  };
  check(0);
  auto observer = [&](const StepInfo& info, const SimulationState&) {
    if (info.remap) ++report.remaps;
    check(info.step);
  };
  integ.run(s, cfg.n_steps, {observer});

  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "verify\nsteps              %llu\nparticles          %zu\nmax deviation      %.3e\nremaps             %llu\nresult             PASS\n",
                static_cast<unsigned long long>(cfg.n_steps), s.ps.size(), report.max_deviation,
                static_cast<unsigned long long>(report.remaps));
  os << buf;
  report.text = os.str();
  return report;
}

RunReport cmd_bench(const RunConfig& cfg) {
  const double d_cut = cfg.d_cut();
  PrestrainedBox box = prestrained_box(cfg);
  const FlowMatrix flow = cfg.flow();
  const Mat3 e = matrix_exponential(flow.matrix() * cfg.dt);
  RunReport r;
  r.trace.d_cut = d_cut;
  r.trace.records.reserve(cfg.n_steps);
  for (std::uint64_t i = 1; i <= cfg.n_steps; ++i) {
    box.l = LatticeBasis(e * box.l.matrix());
    if (auto ev = check_remap(box.policy, box.l, flow, cfg.dt)) {
      box.l = ev->basis;
      ++r.remaps;
    }
    EfficiencyRecord rec;
    try {
      rec = geometry_record(box.l, d_cut);
    } catch (const DegenerateGrid& ex) {
      throw DegenerateGrid("step " + std::to_string(i) + ": " + ex.what());
    }
    rec.step = i;
    rec.t = box.t + static_cast<double>(i) * cfg.dt;
    r.trace.records.push_back(rec);
  }
  write_trace(cfg, r.trace);
  r.summary = long_run_average(r.trace, burn_in_steps(cfg, r.trace.records.size()));
  r.text = finish_text(r, d_cut, "bench");
  return r;
}

}  // namespace flowcell
