#include "flowcell/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "flowcell/error.hpp"
#include "flowcell/forces.hpp"
#include "flowcell/metrics.hpp"

namespace flowcell {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t' && s[j] != ',') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line, std::string_view key) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || !std::isfinite(v))
    throw ConfigError(line, "'" + std::string(key) + "' expects a number, got '" + std::string(s) + "'");
  return v;
}

std::int64_t to_int(std::string_view s, std::size_t line, std::string_view key) {
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw ConfigError(line, "'" + std::string(key) + "' expects an integer, got '" + std::string(s) + "'");
  return v;
}

double positive(double v, std::size_t line, std::string_view key) {
  if (!(v > 0.0)) throw ConfigError(line, "'" + std::string(key) + "' must be positive");
  return v;
}

IMat3 int_matrix(const std::vector<std::string_view>& w, std::size_t from, std::size_t line, std::string_view key) {
  if (w.size() - from != 9) throw ConfigError(line, "'" + std::string(key) + "' expects 9 integers");
  IMat3 m;
  for (int i = 0; i < 9; ++i) m.a[i] = to_int(w[from + i], line, key);
  if (m.det() != 1) throw ConfigError(line, "'" + std::string(key) + "' matrix must have determinant 1");
  return m;
}

}  // namespace

StrategyChoice parse_strategy(std::string_view s) {
  if (s == "ds") return StrategyChoice::ds;
  if (s == "do") return StrategyChoice::do_;
  if (s == "both") return StrategyChoice::both;
  if (s == "all_pairs") return StrategyChoice::all_pairs;
  throw ConfigError(0, "unknown strategy '" + std::string(s) + "' (ds, do, both, all_pairs)");
}

void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, std::size_t line) {
  const auto w = words(value);
  const std::string k(key);
  auto one = [&]() -> std::string_view {
    if (w.size() != 1) throw ConfigError(line, "'" + k + "' expects a single value");
    return w[0];
  };
  if (key == "flow") {
    if (w.empty()) throw ConfigError(line, "'flow' needs a value");
    if (w.size() == 1 && w[0] == "none") {
      cfg.flow_kind = FlowKind::none;
    } else if (w.size() == 2 && (w[0] == "shear" || w[0] == "uniaxial" || w[0] == "planar_elongation")) {
      cfg.flow_rate = to_double(w[1], line, key);
      cfg.flow_kind = w[0] == "shear" ? FlowKind::shear
                      : w[0] == "uniaxial" ? FlowKind::uniaxial
                                           : FlowKind::planar_elongation;
    } else if (w.size() == 9) {
      Mat3 m;
      for (int i = 0; i < 9; ++i) m.a[i] = to_double(w[i], line, key);
      try {
        FlowMatrix check(m, 1e-9);
        (void)check;
      } catch (const CompressibleFlow& e) {
        throw CompressibleFlow("line " + std::to_string(line) + ": " + e.what());
      } catch (const InvalidArgument& e) {
        throw ConfigError(line, e.what());
      }
      cfg.flow_matrix = m;
      cfg.flow_kind = FlowKind::matrix;
    } else {
      throw ConfigError(line, "'flow' expects none, shear|uniaxial|planar_elongation <rate>, or 9 numbers");
    }
  } else if (key == "n_particles") {
    const auto n = to_int(one(), line, key);
    if (n <= 0) throw ConfigError(line, "'n_particles' must be positive");
    cfg.n_particles = static_cast<std::size_t>(n);
  } else if (key == "density") {
    cfg.density = positive(to_double(one(), line, key), line, key);
  } else if (key == "box_side") {
    cfg.box_side = positive(to_double(one(), line, key), line, key);
  } else if (key == "box_side_in_cutoffs") {
    cfg.box_side_in_cutoffs = positive(to_double(one(), line, key), line, key);
  } else if (key == "cutoff") {
    const auto v = one();
    if (v == "wca") cfg.cutoff = CutoffKind::wca;
    else if (v == "normalized") cfg.cutoff = CutoffKind::normalized;
    else throw ConfigError(line, "'cutoff' must be wca or normalized");
  } else if (key == "epsilon") {
    cfg.epsilon = positive(to_double(one(), line, key), line, key);
  } else if (key == "sigma") {
    cfg.sigma = positive(to_double(one(), line, key), line, key);
  } else if (key == "mass") {
    cfg.mass = positive(to_double(one(), line, key), line, key);
  } else if (key == "temperature") {
    cfg.temperature = to_double(one(), line, key);
    if (cfg.temperature < 0.0) throw ConfigError(line, "'temperature' must be non-negative");
  } else if (key == "dt") {
    cfg.dt = positive(to_double(one(), line, key), line, key);
  } else if (key == "n_steps") {
    const auto n = to_int(one(), line, key);
    if (n < 0) throw ConfigError(line, "'n_steps' must be non-negative");
    cfg.n_steps = static_cast<std::uint64_t>(n);
  } else if (key == "strategy") {
    try {
      cfg.strategy = parse_strategy(one());
    } catch (const ConfigError& e) {
      throw ConfigError(line, e.what());
    }
  } else if (key == "remap") {
    if (w.empty()) throw ConfigError(line, "'remap' needs a value");
    if (w[0] == "auto" && w.size() == 1) cfg.remap = RemapKind::automatic;
    else if (w[0] == "none" && w.size() == 1) cfg.remap = RemapKind::none;
    else if (w[0] == "lees_edwards" && w.size() == 1) cfg.remap = RemapKind::lees_edwards;
    else if (w[0] == "kr" && w.size() == 1) cfg.remap = RemapKind::kr;
    else if (w[0] == "kr" && w.size() == 10) {
      cfg.remap = RemapKind::kr;
      cfg.kr_matrix = int_matrix(w, 1, line, key);
    } else if (w[0] == "reduction" && w.size() <= 2) {
      cfg.remap = RemapKind::reduction;
      if (w.size() == 2) {
        const double thr = to_double(w[1], line, key);
        if (!(thr > 1.0)) throw ConfigError(line, "reduction threshold must exceed 1");
        cfg.reduction_threshold = thr;
      }
    } else {
      throw ConfigError(line, "'remap' must be auto, none, lees_edwards, kr [9 ints], or reduction [threshold]");
    }
  } else if (key == "initial_basis") {
    if (w.size() == 1 && w[0] == "cube") cfg.initial_basis = BasisKind::cube;
    else if (w.size() == 1 && w[0] == "eigen") cfg.initial_basis = BasisKind::eigen;
    else if (w.size() == 10 && w[0] == "eigen") {
      cfg.initial_basis = BasisKind::eigen;
      cfg.eigen_matrix = int_matrix(w, 1, line, key);
    } else {
      throw ConfigError(line, "'initial_basis' must be cube or eigen [9 ints]");
    }
  } else if (key == "prestrain") {
    cfg.prestrain = to_double(one(), line, key);
    if (cfg.prestrain < 0.0) throw ConfigError(line, "'prestrain' must be non-negative");
  } else if (key == "seed") {
    const auto s = to_int(one(), line, key);
    if (s < 0) throw ConfigError(line, "'seed' must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  } else if (key == "output") {
    cfg.output = std::string(trim(value));
  } else if (key == "burn_in") {
    cfg.burn_in = to_double(one(), line, key);
    if (cfg.burn_in < 0.0 || cfg.burn_in >= 1.0) throw ConfigError(line, "'burn_in' must lie in [0, 1)");
  } else if (key == "fault_injection") {
    const auto v = one();
    if (v == "none") cfg.drop_neighbor = false;
    else if (v == "drop_neighbor") cfg.drop_neighbor = true;
    else throw ConfigError(line, "'fault_injection' must be none or drop_neighbor");
  } else {
    throw ConfigError(line, "unknown key '" + k + "'");
  }
}

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(line_no, "expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(line_no, "missing key before '='");
    apply_setting(cfg, key, value, line_no);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

FlowMatrix RunConfig::flow() const {
  switch (flow_kind) {
    case FlowKind::none: return FlowMatrix::zero();
    case FlowKind::shear: return FlowMatrix::shear(flow_rate);
    case FlowKind::uniaxial: return FlowMatrix::uniaxial(flow_rate);
    case FlowKind::planar_elongation: return FlowMatrix::planar_elongation(flow_rate);
    case FlowKind::matrix: {
      // Remove the sub-tolerance trace residue so det(L) stays constant.
      Mat3 m = flow_matrix;
      const double tr = m.trace() / 3.0;
      for (int i = 0; i < 3; ++i) m(i, i) -= tr;
      return FlowMatrix(m);
    }
  }
  return FlowMatrix::zero();
}

WCAPotential RunConfig::potential() const {
  if (cutoff == CutoffKind::normalized) return WCAPotential(epsilon, normalize_cutoff() / std::pow(2.0, 1.0 / 6.0));
  return WCAPotential(epsilon, sigma);
}

double RunConfig::d_cut() const { return potential().cutoff(); }

double RunConfig::side() const {
  if (box_side) return *box_side;
  if (box_side_in_cutoffs) return *box_side_in_cutoffs * d_cut();
  return std::cbrt(static_cast<double>(n_particles) / density);
}

}  // namespace flowcell
