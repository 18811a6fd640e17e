#include "flowcell/integrator.hpp"

#include <chrono>
#include <string>

#include "flowcell/error.hpp"

namespace flowcell {

Integrator::Integrator(const WCAPotential& pot, ForceMode mode) : pot_(pot), mode_(mode) {
  engines_.emplace_back(Strategy::dynamic_size, pot, mode);
  engines_.emplace_back(Strategy::dynamic_offset, pot, mode);
  engines_.emplace_back(Strategy::all_pairs, pot, mode);
}

ForceEngine& Integrator::engine(Strategy s) { return engines_[static_cast<std::size_t>(s)]; }

void Integrator::set_scan_options(ScanOptions o) {
  scan_ = o;
  for (auto& e : engines_) e.set_scan_options(o);
}

double Integrator::timed_forces(SimulationState& s, GridStats& stats) {
  const auto t0 = std::chrono::steady_clock::now();
  stats = engine(s.strategy).compute(s.ps, s.l, s.forces);
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void Integrator::initialize(SimulationState& s) {
  if (!(s.dt > 0.0)) throw InvalidArgument("time step must be positive");
  validate_policy(s.policy);
  wrap_all(s.ps.q, s.l);
  GridStats stats;
  timed_forces(s, stats);
}

StepInfo Integrator::step(SimulationState& s) {
  const double dt = s.dt;
  const double half = 0.5 * dt;
  const double inv_m = 1.0 / s.ps.mass;
  const Mat3& a = s.a.matrix();
  const bool flowing = !s.a.is_zero();

  for (std::size_t n = 0; n < s.ps.size(); ++n) {
    Vec3& p = s.ps.p[n];
    p += (s.forces.forces[n] - (flowing ? a * p : Vec3{})) * half;
  }

  if (flowing) {
    if (cached_dt_ != dt || !(cached_a_ == a)) {
      step_exp_ = matrix_exponential(a * dt);
      cached_a_ = a;
      cached_dt_ = dt;
    }
    for (std::size_t n = 0; n < s.ps.size(); ++n) s.ps.q[n] = step_exp_ * s.ps.q[n] + s.ps.p[n] * (dt * inv_m);
    s.l = LatticeBasis(step_exp_ * s.l.matrix());
  } else {
    for (std::size_t n = 0; n < s.ps.size(); ++n) s.ps.q[n] += s.ps.p[n] * (dt * inv_m);
  }
  wrap_all(s.ps.q, s.l);

  StepInfo info;
  if (auto ev = check_remap(s.policy, s.l, s.a, dt)) {
    s.l = ev->basis;
    wrap_all(s.ps.q, s.l);
    info.remap = ev->transform;
  }

  info.force_seconds = timed_forces(s, info.grid);

  for (std::size_t n = 0; n < s.ps.size(); ++n) {
    Vec3& p = s.ps.p[n];
    p += (s.forces.forces[n] - (flowing ? a * p : Vec3{})) * half;
  }
  s.t += dt;
  info.step = ++steps_done_;
  return info;
}

void Integrator::run(SimulationState& s, std::uint64_t n_steps, const std::vector<Observer>& observers) {
  for (std::uint64_t i = 0; i < n_steps; ++i) {
    StepInfo info;
    try {
      info = step(s);
    } catch (const DegenerateGrid& e) {
      throw DegenerateGrid("step " + std::to_string(steps_done_ + 1) + ": " + e.what());
    }
    for (const auto& obs : observers) obs(info, s);
  }
}

double kinetic_energy(const ParticleSet& ps) {
  double k = 0.0;
  for (const Vec3& p : ps.p) k += norm2(p);
  return 0.5 * k / ps.mass;
}

}  // namespace flowcell
