#pragma once

#include "tessera/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tessera {

/// First four moments of the measurement error U.
struct MomentSet
{
  double mean = 0.0;     ///< E(U)
  double variance = 0.0; ///< sigma_u^2
  double mu3 = 0.0;      ///< third central moment
  double mu4 = 0.0;      ///< fourth central moment

  double sd() const;
  double skewness() const;
  double kurtosis() const;

  /// Checks variance > 0 and kurtosis >= 1 + skewness^2; throws DomainError.
  void validate() const;
};

/// Sample mean and central moments of orders 2-4, all with divisor n.
/// Throws InsufficientData below 5 values, DegenerateSample when the
/// variance is below 1e-12.
MomentSet moments_from_sample(std::span<const double> values);

enum class ErrorFamily
{
  Gamma,     ///< shape, scale
  Lognormal, ///< log-location mu, log-scale sigma
  Laplace,   ///< scale (location 0)
  Gaussian,  ///< standard deviation (mean 0)
  Zero,      ///< point mass at 0, i.e. no measurement error
};

std::string to_string(ErrorFamily family);
ErrorFamily error_family_from_string(const std::string& name);

struct ErrorLaw
{
  ErrorFamily family = ErrorFamily::Zero;
  double param1 = 0.0;
  double param2 = 0.0;
  /// Subtract the law's mean from every draw.
  bool centered = false;

  /// Moments of the (possibly centered) law.
  MomentSet moments() const;
  /// Mean of the uncentered law.
  double raw_mean() const;
  /// Density of the (possibly centered) law. Not defined for Zero.
  double pdf(double u) const;
  /// Lower end of the support of the (possibly centered) law.
  double support_lower() const;

  ErrorLaw as_centered(bool on = true) const;

  /// One draw from the uncentered law.
  double sample_raw(Engine& engine) const;
  double sample(Engine& engine) const { return sample_raw(engine) - (centered ? raw_mean() : 0.0); }
};

ErrorLaw gamma_law(double shape, double scale);
ErrorLaw lognormal_law(double log_location, double log_scale);
ErrorLaw laplace_law(double scale);
ErrorLaw gaussian_law(double sd);
ErrorLaw zero_law();

/// gamma(4(1-lambda)/lambda, 0.5): sigma_u^2 = mu_3 = (1-lambda)/lambda when
/// var(X) = 1. lambda = 1 gives the zero law. Throws DomainError outside (0, 1].
ErrorLaw gamma_design(double lambda);

/// Lognormal law with sigma_u^2 = (1-lambda)/lambda * var_x and mu_3 = sigma_u^2.
/// Returned centered. Throws DomainError outside (0, 1).
ErrorLaw lognormal_design(double lambda, double var_x = 1.0);

/// Lognormal law with the given variance and third central moment equal to it.
/// Throws NoSolution when the variance is not a positive finite number.
ErrorLaw lognormal_with_variance(double variance);

double laplace_charfn(double t, double scale);

/// n draws from the law with a private generator seeded by seed.
std::vector<double> draw(const ErrorLaw& law, std::size_t n, std::uint64_t seed);

} // namespace tessera
