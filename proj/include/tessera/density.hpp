#pragma once

#include "tessera/coeff_solver.hpp"
#include "tessera/error_model.hpp"
#include "tessera/rng.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tessera {

enum class DensityMethod
{
  ErrorFree,
  Naive,
  Tessarine,
  Deconvoluting,
};

std::string to_string(DensityMethod method);
DensityMethod density_method_from_string(const std::string& name);

struct DensityEstimate
{
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  DensityMethod method = DensityMethod::ErrorFree;
};

/// K(t) = 1 / (2 + e^t + e^-t).
double logistic_kernel(double t);

/// Fourier transform of K: pi t / sinh(pi t), equal to 1 at t = 0.
double logistic_kernel_fourier(double t);

/// Real, even characteristic function of the error.
using CharFn = std::function<double(double)>;

struct QuadratureOptions
{
  double abs_tolerance = 1e-8;
  /// The integrand is truncated where |phi_K(t) / phi_U(t/h)| stays below this.
  double tail_bound = 1e-12;
  /// DivergentIntegrand above this ratio.
  double divergence_bound = 1e12;
  unsigned max_depth = 15;
};

/// Smallest T on a 0.25-spaced scan such that |phi_K(t) / phi_U(t/h)| is below
/// the tail bound from T onwards. Throws DivergentIntegrand.
double truncation_point(double h, const CharFn& phi_u, const QuadratureOptions& options = {});

/// L(u) = (1/pi) int_0^T cos(tu) phi_K(t) / phi_U(t/h) dt. Throws
/// IntegrationFailure or DivergentIntegrand.
double deconv_kernel_value(double u, double h, const CharFn& phi_u,
                           const QuadratureOptions& options = {});

struct DensityConfig
{
  DensityMethod method = DensityMethod::ErrorFree;
  /// Tessarine: E(U) and the imaginary triple (b, c, d).
  double error_mean = 0.0;
  TessCoefficients coeffs;
  /// Deconvoluting: characteristic function of the error.
  CharFn phi_u;
  QuadratureOptions quadrature;
};

/// Kernel density estimate on the grid; grid points are evaluated in parallel.
DensityEstimate kde(std::span<const double> data, double h, std::span<const double> grid,
                    const DensityConfig& config);
/// Single-threaded reference for kde; results agree bitwise.
DensityEstimate kde_serial(std::span<const double> data, double h, std::span<const double> grid,
                           const DensityConfig& config);

/// Grid mean of the squared error.
double mise(const DensityEstimate& estimate, const std::function<double(double)>& truth);
double mise(const DensityEstimate& estimate, std::span<const double> truth_values);

struct OracleFit
{
  double bandwidth = 0.0;
  double mise = 0.0;
  DensityEstimate estimate;
};

/// The bandwidth in h_grid with the smallest mise against truth_values (the
/// truth evaluated on the grid). Ties go to the smaller bandwidth.
OracleFit oracle_fit(const DensityConfig& config, std::span<const double> data,
                     std::span<const double> grid, std::span<const double> truth_values,
                     std::span<const double> h_grid);
double oracle_bandwidth(const DensityConfig& config, std::span<const double> data,
                        std::span<const double> grid, const std::function<double(double)>& truth,
                        std::span<const double> h_grid);

std::vector<double> linspace(double lo, double hi, std::size_t count);

struct MixtureComponent
{
  double weight;
  double mean;
  double sd;
};

/// Finite mixture of normal laws.
struct NormalMixture
{
  std::vector<MixtureComponent> components;

  double pdf(double x) const;
  double sample(Engine& engine) const;
  double variance() const;

  /// Parses "w:mean:sd,w:mean:sd,...". Throws ConfigError.
  static NormalMixture parse(const std::string& text);
  std::string to_string() const;
};

/// Density of X + U on the grid by numerical convolution of p_X with the
/// (possibly centered) error law.
std::vector<double> convolved_density(const std::function<double(double)>& px, const ErrorLaw& law,
                                      std::span<const double> grid);

} // namespace tessera
