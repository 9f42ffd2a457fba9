#pragma once

#include "tessera/coeff_solver.hpp"
#include "tessera/config.hpp"
#include "tessera/estimators.hpp"

#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tessera {

struct Metrics
{
  double bias = 0.0;
  double mse = 0.0;
  double iqr = 0.0;
};

/// Bias and mean squared deviation from truth, and the interquartile range of
/// the estimates with quartiles interpolated linearly between order statistics
/// (the "type 7" rule). Throws InsufficientData for an empty input.
Metrics compute_metrics(std::span<const double> estimates, double truth);

/// Linearly interpolated quantile of unsorted values, p in [0, 1].
double quantile(std::vector<double> values, double p);

struct MetricRow
{
  int n = 0;
  double setting = 0.0; ///< lambda, or delta for the sensitivity experiment
  std::string estimator;
  std::string parameter; ///< beta0, beta1 or density
  double bias = std::numeric_limits<double>::quiet_NaN();
  double mse = std::numeric_limits<double>::quiet_NaN();
  double iqr = std::numeric_limits<double>::quiet_NaN();
  double mise = std::numeric_limits<double>::quiet_NaN();
  double mise_se = std::numeric_limits<double>::quiet_NaN();
  /// Standard error of the mean estimate, for comparisons between runs.
  double mean_se = std::numeric_limits<double>::quiet_NaN();
  int converged = 0;
  int failures = 0;
};

struct ReplicateRecord
{
  int n = 0;
  double setting = 0.0;
  int replicate = 0;
  std::string estimator;
  std::vector<double> theta; ///< beta0, beta1; empty on failure
  bool converged = false;
  double bandwidth = std::numeric_limits<double>::quiet_NaN();
  double mise = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> curve; ///< density values on the grid
  double seconds = 0.0;      ///< wall-clock for this estimator, not written by default
};

struct SettingInfo
{
  int n = 0;
  double setting = 0.0;
  MomentSet moments;
  std::optional<TessCoefficients> coeffs;
  // density only: p_X and the density of the centered W on the grid
  std::vector<double> truth_x;
  std::vector<double> truth_w;
};

struct RealDataFit
{
  std::string estimator;
  std::vector<double> theta;
  std::vector<double> se;
  bool converged = false;
};

struct SimResult
{
  SimConfig config;
  std::vector<MetricRow> metrics;
  std::vector<ReplicateRecord> replicates;
  std::vector<SettingInfo> settings;
  std::vector<double> grid;
  // real data only
  std::vector<RealDataFit> fits;
  double error_skewness = 0.0;
  double error_kurtosis = 0.0;
  std::vector<std::pair<double, double>> qq;
  int rows = 0;

  /// The row for (n, setting, estimator, parameter); throws DomainError if absent.
  const MetricRow& metric(int n, double setting, const std::string& estimator,
                          const std::string& parameter) const;
};

SimResult run_poisson_sim(const SimConfig& cfg);
SimResult run_logistic_sim(const SimConfig& cfg);
SimResult run_density_sim(const SimConfig& cfg);
SimResult run_sensitivity(const SimConfig& cfg);
SimResult run_real_data(const SimConfig& cfg);
SimResult run_experiment(const SimConfig& cfg);

/// Writes metrics.csv, report.json and the plot-ready CSVs. With timing set,
/// per-replicate wall-clock goes to timing.json; every other file depends only
/// on the config.
void write_outputs(const SimResult& result, const std::filesystem::path& dir, bool timing = false);

} // namespace tessera
