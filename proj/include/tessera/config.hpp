#pragma once

#include "tessera/density.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tessera {

enum class Experiment
{
  PoissonSim,
  LogisticSim,
  DensitySim,
  Sensitivity,
  RealData,
};

std::string to_string(Experiment experiment);
Experiment experiment_from_string(const std::string& name);

/// Flat key = value experiment description. Lists are comma separated; an item
/// of the form lo:step:hi expands to an inclusive arithmetic range.
///
///   experiment   poisson | logistic | density | sensitivity | realdata
///   n            sample sizes
///   lambda       reliability ratios in (0, 1]
///   replicates   Monte Carlo replicates per setting
///   seed         master seed
///   estimators   true, naive, cc, tc, cs, mc, cd (regression) or
///                errorfree, naive, tc, dk (density)
///   beta0, beta1 true regression coefficients
///   mc_draws     draws per observation for the mc score
///   delta        misspecification levels (sensitivity)
///   mixture      weight:mean:sd,... (density truth)
///   grid_lo, grid_hi, grid_points   density evaluation grid
///   bandwidths   oracle bandwidth candidates
///   input        CSV with columns wins, expected_goals (realdata)
///   noise_shape, noise_scale        injected gamma noise (realdata)
struct SimConfig
{
  Experiment experiment = Experiment::PoissonSim;
  std::vector<int> n;
  std::vector<double> lambda;
  int replicates = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> estimators;
  double beta0 = 0.0;
  double beta1 = 0.0;
  int mc_draws = 500;
  std::vector<double> delta;
  NormalMixture mixture;
  double grid_lo = -2.0;
  double grid_hi = 8.0;
  int grid_points = 100;
  std::vector<double> bandwidths;
  std::string input;
  double noise_shape = 1.0;
  double noise_scale = 20.0;

  /// Desk-scale defaults for an experiment; keys in a file override them.
  static SimConfig defaults(Experiment experiment);
  static SimConfig parse(const std::string& text);
  static SimConfig load(const std::string& path);

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  /// Canonical key = value text; parse(to_text()) reproduces the config.
  std::string to_text() const;
};

/// Parses "a, b, lo:step:hi" into numbers. Throws ConfigError.
std::vector<double> parse_number_list(const std::string& text);

} // namespace tessera
