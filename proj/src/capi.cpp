#include "flowcell/flowcell.h"

#include <cstring>
#include <memory>
#include <string>

#include "flowcell/commands.hpp"
#include "flowcell/error.hpp"

struct fc_config {
  flowcell::RunConfig cfg;
};

struct fc_simulation {
  flowcell::SimulationState state;
  std::unique_ptr<flowcell::Integrator> integrator;
};

namespace {

thread_local std::string g_last_error;

fc_status fail(fc_status code, const std::string& what) {
  g_last_error = what;
  return code;
}

template <class F>
fc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return FC_OK;
  } catch (const flowcell::ConfigError& e) {
    return fail(FC_ERR_CONFIG, e.what());
  } catch (const flowcell::CompressibleFlow& e) {
    return fail(FC_ERR_CONFIG, e.what());
  } catch (const flowcell::LayoutMismatch& e) {
    return fail(FC_ERR_CONFIG, e.what());
  } catch (const flowcell::IoError& e) {
    return fail(FC_ERR_IO, e.what());
  } catch (const flowcell::DegenerateGrid& e) {
    return fail(FC_ERR_DEGENERATE, e.what());
  } catch (const flowcell::VerificationFailure& e) {
    return fail(FC_ERR_NUMERIC, e.what());
  } catch (const flowcell::EmptyWindow& e) {
    return fail(FC_ERR_NUMERIC, e.what());
  } catch (const flowcell::InvalidArgument& e) {
    return fail(FC_ERR_ARGUMENT, e.what());
  } catch (const flowcell::Error& e) {
    return fail(FC_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(FC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(FC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FC_ERR_INTERNAL, "unknown error");
  }
}

flowcell::Mat3 mat_in(const double m[9]) {
  flowcell::Mat3 out;
  for (int i = 0; i < 9; ++i) out.a[i] = m[i];
  return out;
}

void mat_out(const flowcell::Mat3& m, double out[9]) {
  for (int i = 0; i < 9; ++i) out[i] = m.a[i];
}

void require(bool ok, const char* what) {
  if (!ok) throw flowcell::InvalidArgument(what);
}

flowcell::Strategy physics_strategy(fc_strategy s) {
  switch (s) {
    case FC_STRATEGY_DS: return flowcell::Strategy::dynamic_size;
    case FC_STRATEGY_DO: return flowcell::Strategy::dynamic_offset;
    case FC_STRATEGY_ALL_PAIRS: return flowcell::Strategy::all_pairs;
    default: throw flowcell::InvalidArgument("strategy must be ds, do or all_pairs here");
  }
}

void export_report(const flowcell::RunReport& r, fc_summary* summary, char* report, std::size_t len) {
  if (summary) {
    *summary = fc_summary{};
    summary->samples = r.summary.samples;
    summary->remaps = r.remaps;
    summary->d_cut = r.trace.d_cut;
    summary->mean_eff_ds = r.summary.mean_eff_ds;
    summary->mean_eff_do = r.summary.mean_eff_do;
    summary->mean_v_ds = r.summary.mean_v_ds;
    summary->mean_v_do = r.summary.mean_v_do;
    summary->wall_ds = r.summary.wall_ds;
    summary->wall_do = r.summary.wall_do;
    summary->wall_ratio = r.summary.wall_ratio;
    summary->predicted_ratio = r.summary.predicted_ratio;
    summary->measured_eff_ds = r.summary.empirical_eff_ds;
    summary->measured_eff_do = r.summary.empirical_eff_do;
    summary->max_aspect = r.summary.max_aspect;
    summary->max_deviation = r.max_deviation;
  }
  if (report && len > 0) {
    const std::size_t n = std::min(len - 1, r.text.size());
    std::memcpy(report, r.text.data(), n);
    report[n] = '\0';
  }
}

template <class Cmd>
fc_status run_command(const fc_config* cfg, fc_summary* summary, char* report, std::size_t len, Cmd cmd) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    export_report(cmd(cfg->cfg), summary, report, len);
  });
}

}  // namespace

extern "C" {

const char* fc_last_error(void) { return g_last_error.c_str(); }

const char* fc_version(void) { return "1.0.0"; }

fc_status fc_config_new(fc_config** out) {
  return guarded([&] {
    require(out != nullptr, "output pointer is null");
    *out = new fc_config{};
  });
}

fc_status fc_config_parse_string(const char* text, fc_config** out) {
  return guarded([&] {
    require(text != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto c = std::make_unique<fc_config>();
    c->cfg = flowcell::parse_config(text);
    *out = c.release();
  });
}

fc_status fc_config_parse_file(const char* path, fc_config** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto c = std::make_unique<fc_config>();
    c->cfg = flowcell::parse_config_file(path);
    *out = c.release();
  });
}

fc_status fc_config_set(fc_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg && key && value, "null argument");
    flowcell::apply_setting(cfg->cfg, key, value);
  });
}

fc_status fc_config_set_steps(fc_config* cfg, uint64_t n_steps) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    cfg->cfg.n_steps = n_steps;
  });
}

fc_status fc_config_set_strategy(fc_config* cfg, fc_strategy strategy) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    switch (strategy) {
      case FC_STRATEGY_DS: cfg->cfg.strategy = flowcell::StrategyChoice::ds; break;
      case FC_STRATEGY_DO: cfg->cfg.strategy = flowcell::StrategyChoice::do_; break;
      case FC_STRATEGY_BOTH: cfg->cfg.strategy = flowcell::StrategyChoice::both; break;
      case FC_STRATEGY_ALL_PAIRS: cfg->cfg.strategy = flowcell::StrategyChoice::all_pairs; break;
      default: throw flowcell::InvalidArgument("unknown strategy");
    }
  });
}

fc_status fc_config_set_seed(fc_config* cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    cfg->cfg.seed = seed;
  });
}

fc_status fc_config_set_output(fc_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg != nullptr, "config is null");
    cfg->cfg.output = path ? path : "";
  });
}

void fc_config_free(fc_config* cfg) { delete cfg; }

fc_status fc_run_simulate(const fc_config* cfg, fc_summary* s, char* report, size_t len) {
  return run_command(cfg, s, report, len, flowcell::cmd_simulate);
}

fc_status fc_run_compare(const fc_config* cfg, fc_summary* s, char* report, size_t len) {
  return run_command(cfg, s, report, len, flowcell::cmd_compare);
}

fc_status fc_run_verify(const fc_config* cfg, fc_summary* s, char* report, size_t len) {
  return run_command(cfg, s, report, len, flowcell::cmd_verify);
}

fc_status fc_run_bench(const fc_config* cfg, fc_summary* s, char* report, size_t len) {
  return run_command(cfg, s, report, len, flowcell::cmd_bench);
}

fc_status fc_simulation_create(const fc_config* cfg, fc_strategy strategy, fc_simulation** out) {
  return guarded([&] {
    require(cfg != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    auto sim = std::make_unique<fc_simulation>();
    sim->state = flowcell::initial_state(cfg->cfg, physics_strategy(strategy));
    sim->integrator = std::make_unique<flowcell::Integrator>(cfg->cfg.potential());
    sim->integrator->initialize(sim->state);
    *out = sim.release();
  });
}

fc_status fc_simulation_step(fc_simulation* sim, uint64_t n_steps) {
  return guarded([&] {
    require(sim != nullptr, "simulation is null");
    sim->integrator->run(sim->state, n_steps);
  });
}

size_t fc_simulation_size(const fc_simulation* sim) { return sim ? sim->state.ps.size() : 0; }

double fc_simulation_time(const fc_simulation* sim) { return sim ? sim->state.t : 0.0; }

fc_status fc_simulation_positions(const fc_simulation* sim, double* xyz) {
  return guarded([&] {
    require(sim && xyz, "null argument");
    for (std::size_t i = 0; i < sim->state.ps.size(); ++i)
      for (int c = 0; c < 3; ++c) xyz[3 * i + c] = sim->state.ps.q[i][c];
  });
}

fc_status fc_simulation_forces(const fc_simulation* sim, double* xyz) {
  return guarded([&] {
    require(sim && xyz, "null argument");
    for (std::size_t i = 0; i < sim->state.forces.forces.size(); ++i)
      for (int c = 0; c < 3; ++c) xyz[3 * i + c] = sim->state.forces.forces[i][c];
  });
}

fc_status fc_simulation_basis(const fc_simulation* sim, double basis[9]) {
  return guarded([&] {
    require(sim && basis, "null argument");
    mat_out(sim->state.l.matrix(), basis);
  });
}

fc_status fc_simulation_energy(const fc_simulation* sim, double* potential, double* kinetic) {
  return guarded([&] {
    require(sim != nullptr, "simulation is null");
    if (potential) *potential = sim->state.forces.potential_energy;
    if (kinetic) *kinetic = flowcell::kinetic_energy(sim->state.ps);
  });
}

void fc_simulation_free(fc_simulation* sim) { delete sim; }

fc_status fc_evolve_basis(const double l0[9], const double flow[9], double t, double out[9]) {
  return guarded([&] {
    require(l0 && flow && out, "null argument");
    const flowcell::LatticeBasis l = flowcell::evolve_basis(flowcell::LatticeBasis(mat_in(l0)),
                                                            flowcell::FlowMatrix(mat_in(flow), 1e-9), t);
    mat_out(l.matrix(), out);
  });
}

fc_status fc_box_heights(const double basis[9], double heights[3]) {
  return guarded([&] {
    require(basis && heights, "null argument");
    const flowcell::Vec3 h = flowcell::box_heights(flowcell::LatticeBasis(mat_in(basis)));
    for (int i = 0; i < 3; ++i) heights[i] = h[i];
  });
}

fc_status fc_reduce_basis(const double basis[9], double out[9], int64_t transform[9]) {
  return guarded([&] {
    require(basis && out, "null argument");
    const flowcell::ReducedBasis r = flowcell::reduce_basis(flowcell::LatticeBasis(mat_in(basis)));
    mat_out(r.basis.matrix(), out);
    if (transform)
      for (int i = 0; i < 9; ++i) transform[i] = r.transform.matrix().a[i];
  });
}

fc_status fc_neighborhood_volumes(const double basis[9], double d_cut, double* v_ds, double* v_do_avg) {
  return guarded([&] {
    require(basis != nullptr, "null argument");
    const flowcell::EfficiencyRecord r = flowcell::geometry_record(flowcell::LatticeBasis(mat_in(basis)), d_cut);
    if (v_ds) *v_ds = r.v_ds;
    if (v_do_avg) *v_do_avg = r.v_do_avg;
  });
}

double fc_avg_neighborhood_count(int l1, int l2, int l3) {
  try {
    return flowcell::avg_neighborhood_count(l1, l2, l3);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0.0;
  }
}

double fc_search_efficiency(double v, double d_cut) {
  try {
    return flowcell::search_efficiency(v, d_cut);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return 0.0;
  }
}

double fc_normalize_cutoff(void) { return flowcell::normalize_cutoff(); }

fc_status fc_compute_forces(const double basis[9], size_t n, const double* xyz, fc_strategy strategy,
                            double epsilon, double sigma, double* forces, double* energy, uint64_t* pair_checks) {
  return guarded([&] {
    require(basis && (n == 0 || (xyz && forces)), "null argument");
    const flowcell::LatticeBasis l(mat_in(basis));
    flowcell::ParticleSet ps;
    ps.q.resize(n);
    ps.p.assign(n, flowcell::Vec3{});
    for (std::size_t i = 0; i < n; ++i) ps.q[i] = flowcell::Vec3{xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    const flowcell::WCAPotential pot(epsilon, sigma);
    flowcell::ForceEngine engine(physics_strategy(strategy), pot);
    flowcell::ForceAccumulator acc;
    engine.compute(ps, l, acc);
    for (std::size_t i = 0; i < n; ++i)
      for (int c = 0; c < 3; ++c) forces[3 * i + c] = acc.forces[i][c];
    if (energy) *energy = acc.potential_energy;
    if (pair_checks) *pair_checks = acc.pair_checks;
  });
}

}  // extern "C"
