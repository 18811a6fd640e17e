#include "flowcell/forces.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>
#include <thread>

#include "flowcell/error.hpp"

namespace flowcell {

WCAPotential::WCAPotential(double eps, double sig) : epsilon(eps), sigma(sig) {
  if (!(eps > 0.0) || !(sig > 0.0)) throw InvalidArgument("WCA epsilon and sigma must be positive");
}

double WCAPotential::energy(double r2) const {
  const double rc = cutoff();
  if (r2 >= rc * rc) return 0.0;
  const double s2 = sigma * sigma / r2;
  const double s6 = s2 * s2 * s2;
  return 4.0 * epsilon * (s6 * s6 - s6) + epsilon;
}

double WCAPotential::force_over_r(double r2) const {
  const double rc = cutoff();
  if (r2 >= rc * rc) return 0.0;
  const double s2 = sigma * sigma / r2;
  const double s6 = s2 * s2 * s2;
  return 24.0 * epsilon / r2 * (2.0 * s6 * s6 - s6);
}

void ForceAccumulator::reset(std::size_t n) {
  forces.assign(n, Vec3{});
  potential_energy = 0.0;
  pair_checks = 0;
  pairs_within_cutoff = 0;
}

const char* strategy_name(Strategy s) {
  switch (s) {
    case Strategy::dynamic_size: return "ds";
    case Strategy::dynamic_offset: return "do";
    case Strategy::all_pairs: return "all_pairs";
  }
  return "?";
}

unsigned oracle_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLOWCELL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<unsigned>(std::min<long>(v, 256));
    if (end != env && v == 0) return hw;
  }
  return hw;
}

namespace {

struct Partial {
  std::vector<Vec3> f;
  double energy = 0.0;
  std::uint64_t within = 0;
};

void all_pairs_rows(const ParticleSet& ps, const LatticeBasis& l, const WCAPotential& pot, std::size_t first,
                    std::size_t stride, Partial& out) {
  const double rc2 = pot.cutoff() * pot.cutoff();
  const std::size_t n = ps.size();
  out.f.assign(n, Vec3{});
  for (std::size_t i = first; i < n; i += stride)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Vec3 d = minimum_image_displacement(ps.q[i], ps.q[j], l);
      const double r2 = norm2(d);
      if (r2 >= rc2) continue;
      const Vec3 f = d * pot.force_over_r(r2);
      out.f[i] -= f;
      out.f[j] += f;
      out.energy += pot.energy(r2);
      ++out.within;
    }
}

}  // namespace

ForceAccumulator all_pairs_forces(const ParticleSet& ps, const LatticeBasis& l, const WCAPotential& pot) {
  const std::size_t n = ps.size();
  ForceAccumulator acc;
  acc.reset(n);
  acc.pair_checks = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(oracle_threads(), std::max<std::size_t>(1, n / 64)));
  std::vector<Partial> parts(threads);
  if (threads == 1) {
    all_pairs_rows(ps, l, pot, 0, 1, parts[0]);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
      pool.emplace_back([&, t] { all_pairs_rows(ps, l, pot, t, threads, parts[t]); });
    for (auto& th : pool) th.join();
  }
  for (const Partial& p : parts) {
    for (std::size_t i = 0; i < n; ++i) acc.forces[i] += p.f[i];
    acc.potential_energy += p.energy;
    acc.pairs_within_cutoff += p.within;
  }
  return acc;
}

ForceEngine::ForceEngine(Strategy strategy, WCAPotential pot, ForceMode mode)
    : strategy_(strategy), pot_(pot), mode_(mode) {}

GridStats ForceEngine::compute(const ParticleSet& ps, const LatticeBasis& l, ForceAccumulator& out) {
  GridStats stats;
  stats.strategy = strategy_;
  if (strategy_ == Strategy::all_pairs) {
    out = all_pairs_forces(ps, l, pot_);
    return stats;
  }
  const double rc = pot_.cutoff();
  const double rc2 = rc * rc;
  out.reset(ps.size());
  std::vector<Vec3>& f = out.forces;

  auto fast = [&](std::uint32_t a, std::uint32_t b, const Vec3& d, double r2) {
    const Vec3 fb = d * pot_.force_over_r(r2);
    f[a] -= fb;
    f[b] += fb;
    out.potential_energy += pot_.energy(r2);
    ++out.pairs_within_cutoff;
  };
  auto collect = [&](std::uint32_t a, std::uint32_t b, const Vec3& d, double r2) {
    if (a < b) pairs_.push_back({a, b, d, r2});
    else pairs_.push_back({b, a, d * -1.0, r2});
  };

  const bool verify = mode_ == ForceMode::verification;
  pairs_.clear();
  if (strategy_ == Strategy::dynamic_size) {
    rebuild_ds_grid(ds_, l, rc, ps.q);
    stats.counts = ds_.counts();
    out.pair_checks = verify ? ds_scan_pairs(ds_, rc2, collect, scan_) : ds_scan_pairs(ds_, rc2, fast, scan_);
  } else {
    rebuild_do_grid(do_, l, rc, ps.q);
    stats.counts = do_.counts();
    out.pair_checks = verify ? do_scan_pairs(do_, rc2, collect, scan_) : do_scan_pairs(do_, rc2, fast, scan_);
  }

  if (verify) {
    std::sort(pairs_.begin(), pairs_.end(),
              [](const Pair& x, const Pair& y) { return x.i != y.i ? x.i < y.i : x.j < y.j; });
    for (const Pair& p : pairs_) {
      const Vec3 fb = p.d * pot_.force_over_r(p.r2);
      f[p.i] -= fb;
      f[p.j] += fb;
      out.potential_energy += pot_.energy(p.r2);
    }
    out.pairs_within_cutoff = pairs_.size();
  }
  return stats;
}

ForceAccumulator cell_list_forces(const ParticleSet& ps, const LatticeBasis& l, const WCAPotential& pot,
                                  Strategy strategy, ForceMode mode) {
  ForceEngine engine(strategy, pot, mode);
  ForceAccumulator acc;
  engine.compute(ps, l, acc);
  return acc;
}

}  // namespace flowcell
