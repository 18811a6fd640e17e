#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "flowcell/forces.hpp"
#include "flowcell/lattice.hpp"
#include "flowcell/linalg.hpp"

namespace flowcell {

enum class FlowKind { none, shear, uniaxial, planar_elongation, matrix };
enum class RemapKind { automatic, none, lees_edwards, kr, reduction };
enum class StrategyChoice { ds, do_, both, all_pairs };
enum class CutoffKind { wca, normalized };
enum class BasisKind { cube, eigen };

struct RunConfig {
  FlowKind flow_kind = FlowKind::none;
  double flow_rate = 0.0;
  Mat3 flow_matrix{};

  std::size_t n_particles = 1728;
  double density = 0.8;
  std::optional<double> box_side;
  std::optional<double> box_side_in_cutoffs;
  CutoffKind cutoff = CutoffKind::wca;

  double epsilon = 1.0;
  double sigma = 1.0;
  double mass = 1.0;
  double temperature = 1.0;

  double dt = 0.001;
  std::uint64_t n_steps = 10000;
  StrategyChoice strategy = StrategyChoice::both;

  RemapKind remap = RemapKind::automatic;
  double reduction_threshold = 2.0;
  std::optional<IMat3> kr_matrix;

  BasisKind initial_basis = BasisKind::cube;
  IMat3 eigen_matrix{{1, 1, 1, 1, 2, 2, 1, 2, 3}};
  double prestrain = 0.0;

  std::uint64_t seed = 1;
  std::string output;
  double burn_in = 0.1;
  bool drop_neighbor = false;

  FlowMatrix flow() const;
  // With `cutoff = normalized`, sigma is rescaled so the cutoff is the
  // unit-ball radius.
  WCAPotential potential() const;
  // Geometric cutoff: 2^{1/6} sigma, or the unit-ball cutoff.
  double d_cut() const;
  double side() const;
};

// key = value lines, '#' starts a comment. Throws ConfigError with the line
// number, or CompressibleFlow for a flow matrix with nonzero trace.
RunConfig parse_config(std::string_view text);
RunConfig parse_config_file(const std::string& path);

// Applies one key/value pair as if it were a config line.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value, std::size_t line = 0);

StrategyChoice parse_strategy(std::string_view s);

}  // namespace flowcell
