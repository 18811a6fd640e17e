#include "flowcell/metrics.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

#include "flowcell/cell_dynamic_offset.hpp"
#include "flowcell/error.hpp"
#include "flowcell/remap.hpp"

namespace flowcell {

double ball_volume(double d_cut) { return 4.0 * std::numbers::pi / 3.0 * d_cut * d_cut * d_cut; }

double search_efficiency(double v_neighborhood, double d_cut) {
  if (!(v_neighborhood > 0.0)) throw InvalidArgument("neighborhood volume must be positive");
  return ball_volume(d_cut) / v_neighborhood;
}

double normalize_cutoff() { return std::cbrt(3.0 / (4.0 * std::numbers::pi)); }

EfficiencyRecord geometry_record(const LatticeBasis& l, double d_cut) {
  EfficiencyRecord r;
  const DeformationMetrics m = deformation_metrics(l);
  r.min_height = m.min_height;
  r.max_aspect = m.max_aspect;
  r.v_ds = ds_neighborhood_volume(l, ds_cell_counts(l, d_cut));
  const RotatedBasis rot = qr_orient(l);
  const std::array<int, 3> lc = do_cell_counts(rot, d_cut);
  r.v_do_avg = do_cell_volume(rot, lc) * mean_neighborhood_count(rot, lc);
  r.eff_ds = search_efficiency(r.v_ds, d_cut);
  r.eff_do = search_efficiency(r.v_do_avg, d_cut);
  return r;
}

EfficiencySummary long_run_average(const EfficiencyTrace& trace, std::size_t burn_in) {
  if (trace.records.size() <= burn_in) throw EmptyWindow("no records after burn-in");
  EfficiencySummary s;
  std::uint64_t checks_ds = 0, checks_do = 0, within_ds = 0, within_do = 0;
  for (std::size_t i = burn_in; i < trace.records.size(); ++i) {
    const EfficiencyRecord& r = trace.records[i];
    s.mean_eff_ds += r.eff_ds;
    s.mean_eff_do += r.eff_do;
    s.mean_v_ds += r.v_ds;
    s.mean_v_do += r.v_do_avg;
    s.wall_ds += r.wall_ds;
    s.wall_do += r.wall_do;
    checks_ds += r.checks_ds;
    checks_do += r.checks_do;
    within_ds += r.within_ds;
    within_do += r.within_do;
    s.max_aspect = std::fmax(s.max_aspect, r.max_aspect);
  }
  s.samples = trace.records.size() - burn_in;
  const double n = static_cast<double>(s.samples);
  s.mean_eff_ds /= n;
  s.mean_eff_do /= n;
  s.mean_v_ds /= n;
  s.mean_v_do /= n;
  s.wall_ratio = s.wall_ds > 0.0 ? s.wall_do / s.wall_ds : 0.0;
  s.predicted_ratio = s.mean_v_do / s.mean_v_ds;
  if (checks_ds) s.empirical_eff_ds = static_cast<double>(within_ds) / static_cast<double>(checks_ds);
  if (checks_do) s.empirical_eff_do = static_cast<double>(within_do) / static_cast<double>(checks_do);
  return s;
}

void write_csv(const EfficiencyTrace& trace, std::ostream& os) {
  os << "step,t,min_height,max_aspect,V_DS,V_DO_avg,eff_DS,eff_DO,checks_DS,checks_DO\n";
  const double ball = ball_volume(trace.d_cut);
  char line[512];
  for (const EfficiencyRecord& r : trace.records) {
    std::snprintf(line, sizeof line, "%" PRIu64 ",%.6f,%.10g,%.10g,%.10g,%.10g,%.10g,%.10g,%" PRIu64 ",%" PRIu64 "\n",
                  r.step, r.t, r.min_height, r.max_aspect, r.v_ds / ball, r.v_do_avg / ball, r.eff_ds, r.eff_do,
                  r.checks_ds, r.checks_do);
    os << line;
  }
}

void write_summary(const EfficiencySummary& s, double d_cut, std::ostream& os) {
  char buf[2048];
  std::snprintf(buf, sizeof buf,
                "samples            %zu\n"
                "d_cut              %.6g\n"
                "max_aspect         %.4f\n"
                "mean eff_DS        %.6f\n"
                "mean eff_DO        %.6f\n"
                "mean V_DS          %.6g  (%.4f ball volumes)\n"
                "mean V_DO_avg      %.6g  (%.4f ball volumes)\n"
                "predicted DO/DS    %.4f\n",
                s.samples, d_cut, s.max_aspect, s.mean_eff_ds, s.mean_eff_do, s.mean_v_ds,
                s.mean_v_ds / ball_volume(d_cut), s.mean_v_do, s.mean_v_do / ball_volume(d_cut), s.predicted_ratio);
  os << buf;
  if (s.empirical_eff_ds > 0.0 || s.empirical_eff_do > 0.0) {
    std::snprintf(buf, sizeof buf, "measured eff_DS    %.6f\nmeasured eff_DO    %.6f\n", s.empirical_eff_ds,
                  s.empirical_eff_do);
    os << buf;
  }
  if (s.wall_ds > 0.0 && s.wall_do > 0.0) {
    std::snprintf(buf, sizeof buf, "wall DS [s]        %.4f\nwall DO [s]        %.4f\nwall DO/DS         %.4f\n",
                  s.wall_ds, s.wall_do, s.wall_ratio);
    os << buf;
  }
}

}  // namespace flowcell
