#pragma once

#include <cstdint>
#include <string>

#include "flowcell/config.hpp"
#include "flowcell/integrator.hpp"
#include "flowcell/metrics.hpp"

namespace flowcell {

struct RunReport {
  EfficiencyTrace trace;
  EfficiencySummary summary;
  std::uint64_t remaps = 0;
  double max_deviation = 0.0;  // verify only
  std::string text;            // human-readable summary table
};

// Remap policy and starting basis implied by the config (before prestrain).
struct BoxSetup {
  LatticeBasis l0;
  RemapPolicy policy;
};
BoxSetup setup_box(const RunConfig& cfg);

// Box advanced through `prestrain` time units with remapping applied at
// every step of size dt.
struct PrestrainedBox {
  LatticeBasis l;
  RemapPolicy policy;
  double t = 0.0;
};
PrestrainedBox prestrained_box(const RunConfig& cfg);

// Particles on a perturbed sublattice of `l` with Gaussian peculiar momenta
// and zero total momentum.
ParticleSet initial_particles(const RunConfig& cfg, const LatticeBasis& l);

SimulationState initial_state(const RunConfig& cfg, Strategy strategy);

// Each writes the CSV trace to cfg.output when set.
RunReport cmd_simulate(const RunConfig& cfg);
RunReport cmd_compare(const RunConfig& cfg);
// Throws VerificationFailure naming the first offending step and particle.
RunReport cmd_verify(const RunConfig& cfg);
// Box geometry only: no particles, no forces.
RunReport cmd_bench(const RunConfig& cfg);

}  // namespace flowcell
