#pragma once

#include <cstdint>
#include <vector>

#include "flowcell/cell_dynamic_offset.hpp"
#include "flowcell/cell_dynamic_size.hpp"
#include "flowcell/lattice.hpp"

namespace flowcell {

// Purely repulsive Lennard-Jones, truncated at its minimum and shifted up by
// epsilon so the energy vanishes at the cutoff.
struct WCAPotential {
  double epsilon = 1.0;
  double sigma = 1.0;

  WCAPotential() = default;
  WCAPotential(double eps, double sig);

  double cutoff() const { return 1.122462048309373 * sigma; }  // 2^{1/6} sigma
  double energy(double r2) const;
  // -dU/dr divided by r, so the force on b is force_over_r(r2) * (q_b - q_a).
  double force_over_r(double r2) const;
};

struct ForceAccumulator {
  std::vector<Vec3> forces;
  double potential_energy = 0.0;
  std::uint64_t pair_checks = 0;
  std::uint64_t pairs_within_cutoff = 0;

  void reset(std::size_t n);
};

enum class Strategy { dynamic_size, dynamic_offset, all_pairs };

enum class ForceMode {
  fast,          // accumulate in scan order
  verification,  // collect pairs, sort by (i, j), then accumulate
};

const char* strategy_name(Strategy s);

// Threads used by the all-pairs loop; FLOWCELL_THREADS overrides, 0 = hardware.
unsigned oracle_threads();

// Exhaustive minimum-image loop over unordered pairs.
ForceAccumulator all_pairs_forces(const ParticleSet& ps, const LatticeBasis& l, const WCAPotential& pot);

struct GridStats {
  Strategy strategy = Strategy::dynamic_size;
  std::array<int, 3> counts{};
};

// Holds grid buffers between steps so rebuilding does not reallocate.
class ForceEngine {
 public:
  ForceEngine(Strategy strategy, WCAPotential pot, ForceMode mode = ForceMode::fast);

  // Throws DegenerateGrid when the grid for the chosen strategy is too coarse.
  GridStats compute(const ParticleSet& ps, const LatticeBasis& l, ForceAccumulator& out);

  Strategy strategy() const { return strategy_; }
  const WCAPotential& potential() const { return pot_; }
  void set_mode(ForceMode m) { mode_ = m; }
  void set_scan_options(ScanOptions o) { scan_ = o; }

 private:
  struct Pair {
    std::uint32_t i, j;
    Vec3 d;  // from i to j
    double r2;
  };

  Strategy strategy_;
  WCAPotential pot_;
  ForceMode mode_;
  ScanOptions scan_;
  DSCellGrid ds_;
  DOCellGrid do_;
  std::vector<Pair> pairs_;
};

// One-shot wrapper around ForceEngine for the two cell-list strategies.
ForceAccumulator cell_list_forces(const ParticleSet& ps, const LatticeBasis& l, const WCAPotential& pot,
                                  Strategy strategy, ForceMode mode = ForceMode::fast);

}  // namespace flowcell
