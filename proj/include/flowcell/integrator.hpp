#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "flowcell/forces.hpp"
#include "flowcell/remap.hpp"

namespace flowcell {

struct SimulationState {
  double t = 0.0;
  LatticeBasis l;
  ParticleSet ps;
  FlowMatrix a;
  RemapPolicy policy = NoRemapPolicy{};
  Strategy strategy = Strategy::dynamic_size;
  double dt = 0.001;
  ForceAccumulator forces;  // forces at the current positions
};

struct StepInfo {
  std::uint64_t step = 0;  // 1-based index of the completed step
  std::optional<Automorphism> remap;
  GridStats grid;
  double force_seconds = 0.0;  // grid build + pair scan
};

using Observer = std::function<void(const StepInfo&, const SimulationState&)>;

class Integrator {
 public:
  Integrator(const WCAPotential& pot, ForceMode mode = ForceMode::fast);

  // Wraps positions and evaluates forces so the first half-kick has them.
  void initialize(SimulationState& s);

  // Half-kick, exact streaming of positions and box by e^{A dt}, rewrap,
  // remap check, force rebuild, half-kick.
  StepInfo step(SimulationState& s);

  // Runs n steps, calling every observer after each. A DegenerateGrid from the
  // force rebuild is rethrown with the failing step index.
  void run(SimulationState& s, std::uint64_t n_steps, const std::vector<Observer>& observers = {});

  ForceEngine& engine(Strategy s);
  void set_scan_options(ScanOptions o);

 private:
  double timed_forces(SimulationState& s, GridStats& stats);

  WCAPotential pot_;
  ForceMode mode_;
  ScanOptions scan_;
  std::vector<ForceEngine> engines_;
  Mat3 step_exp_ = Mat3::identity();
  Mat3 cached_a_{};
  double cached_dt_ = -1.0;
  std::uint64_t steps_done_ = 0;
};

// Kinetic energy of peculiar momenta.
double kinetic_energy(const ParticleSet& ps);

}  // namespace flowcell
