#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "flowcell/lattice.hpp"

namespace flowcell {

// Interaction-ball volume over neighborhood volume.
double search_efficiency(double v_neighborhood, double d_cut);

// Cutoff whose interaction ball has unit volume, (3 / (4 pi))^{1/3}.
double normalize_cutoff();

double ball_volume(double d_cut);

struct EfficiencyRecord {
  std::uint64_t step = 0;
  double t = 0.0;
  double min_height = 0.0;
  double max_aspect = 0.0;
  double v_ds = 0.0;      // raw volumes
  double v_do_avg = 0.0;
  double eff_ds = 0.0;
  double eff_do = 0.0;
  std::uint64_t checks_ds = 0;
  std::uint64_t checks_do = 0;
  std::uint64_t within_ds = 0;
  std::uint64_t within_do = 0;
  double wall_ds = 0.0;
  double wall_do = 0.0;
};

struct EfficiencyTrace {
  double d_cut = 1.0;
  std::vector<EfficiencyRecord> records;
};

// Geometric columns of a record for box `l`. Throws DegenerateGrid when
// either grid would be too coarse.
EfficiencyRecord geometry_record(const LatticeBasis& l, double d_cut);

struct EfficiencySummary {
  std::size_t samples = 0;
  double mean_eff_ds = 0.0;
  double mean_eff_do = 0.0;
  double mean_v_ds = 0.0;
  double mean_v_do = 0.0;
  double wall_ds = 0.0;
  double wall_do = 0.0;
  double wall_ratio = 0.0;       // DO total / DS total; 0 when no timings
  double predicted_ratio = 0.0;  // mean V_DO / mean V_DS
  double empirical_eff_ds = 0.0; // pairs within cutoff / pair checks
  double empirical_eff_do = 0.0;
  double max_aspect = 0.0;
};

// Means over records with index >= burn_in. Throws EmptyWindow when none remain.
EfficiencySummary long_run_average(const EfficiencyTrace& trace, std::size_t burn_in);

// step,t,min_height,max_aspect,V_DS,V_DO_avg,eff_DS,eff_DO,checks_DS,checks_DO
// with volumes in units of the interaction-ball volume.
void write_csv(const EfficiencyTrace& trace, std::ostream& os);

void write_summary(const EfficiencySummary& s, double d_cut, std::ostream& os);

}  // namespace flowcell
