#include "tessera/error_model.hpp"

#include "tessera/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace tessera {

double MomentSet::sd() const { return std::sqrt(variance); }

double MomentSet::skewness() const { return mu3 / std::pow(variance, 1.5); }

double MomentSet::kurtosis() const { return mu4 / (variance * variance); }

void MomentSet::validate() const
{
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw DomainError("moment set: variance must be positive");
  if (!std::isfinite(mean) || !std::isfinite(mu3) || !std::isfinite(mu4))
    throw DomainError("moment set: moments must be finite");
  const double skew = skewness();
  // relative slack for moments computed in floating point
  if (kurtosis() < (1.0 + skew * skew) * (1.0 - 1e-12))
    throw DomainError("moment set: kurtosis must be at least 1 + skewness^2");
}

MomentSet moments_from_sample(std::span<const double> values)
{
  if (values.size() < 5)
    throw InsufficientData("at least 5 values are required to estimate four moments");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values)
    mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : values) {
    const double d = v - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  MomentSet m{ mean, m2 / n, m3 / n, m4 / n };
  if (m.variance < 1e-12)
    throw DegenerateSample("sample variance is below 1e-12");
  return m;
}

std::string to_string(ErrorFamily family)
{
  switch (family) {
    case ErrorFamily::Gamma:
      return "gamma";
    case ErrorFamily::Lognormal:
      return "lognormal";
    case ErrorFamily::Laplace:
      return "laplace";
    case ErrorFamily::Gaussian:
      return "gaussian";
    case ErrorFamily::Zero:
      return "zero";
  }
  return "zero";
}

ErrorFamily error_family_from_string(const std::string& name)
{
  if (name == "gamma")
    return ErrorFamily::Gamma;
  if (name == "lognormal")
    return ErrorFamily::Lognormal;
  if (name == "laplace")
    return ErrorFamily::Laplace;
  if (name == "gaussian" || name == "normal")
    return ErrorFamily::Gaussian;
  if (name == "zero" || name == "none")
    return ErrorFamily::Zero;
  throw ConfigError("unknown error family '" + name + "'");
}

double ErrorLaw::raw_mean() const
{
  switch (family) {
    case ErrorFamily::Gamma:
      return param1 * param2;
    case ErrorFamily::Lognormal:
      return std::exp(param1 + 0.5 * param2 * param2);
    default:
      return 0.0;
  }
}

MomentSet ErrorLaw::moments() const
{
  MomentSet m;
  switch (family) {
    case ErrorFamily::Gamma: {
      const double k = param1, th = param2;
      m = { k * th, k * th * th, 2.0 * k * th * th * th, 3.0 * k * (k + 2.0) * std::pow(th, 4) };
      break;
    }
    case ErrorFamily::Lognormal: {
      const double s2 = param2 * param2;
      const double w = std::exp(s2);
      const double var = (w - 1.0) * std::exp(2.0 * param1 + s2);
      const double skew = (w + 2.0) * std::sqrt(w - 1.0);
      const double kurt = w * w * w * w + 2.0 * w * w * w + 3.0 * w * w - 3.0;
      m = { raw_mean(), var, skew * std::pow(var, 1.5), kurt * var * var };
      break;
    }
    case ErrorFamily::Laplace: {
      const double s2 = param1 * param1;
      m = { 0.0, 2.0 * s2, 0.0, 24.0 * s2 * s2 };
      break;
    }
    case ErrorFamily::Gaussian: {
      const double s2 = param1 * param1;
      m = { 0.0, s2, 0.0, 3.0 * s2 * s2 };
      break;
    }
    case ErrorFamily::Zero:
      break;
  }
  if (centered)
    m.mean = 0.0;
  return m;
}

double ErrorLaw::support_lower() const
{
  const double shift = centered ? raw_mean() : 0.0;
  switch (family) {
    case ErrorFamily::Gamma:
    case ErrorFamily::Lognormal:
      return -shift;
    default:
      return -std::numeric_limits<double>::infinity();
  }
}

double ErrorLaw::pdf(double u) const
{
  const double x = u + (centered ? raw_mean() : 0.0);
  switch (family) {
    case ErrorFamily::Gamma: {
      if (x <= 0.0)
        return 0.0;
      const double k = param1, th = param2;
      return std::exp((k - 1.0) * std::log(x) - x / th - std::lgamma(k) - k * std::log(th));
    }
    case ErrorFamily::Lognormal: {
      if (x <= 0.0)
        return 0.0;
      const double z = (std::log(x) - param1) / param2;
      return std::exp(-0.5 * z * z) / (x * param2 * std::sqrt(2.0 * std::numbers::pi));
    }
    case ErrorFamily::Laplace:
      return std::exp(-std::abs(x) / param1) / (2.0 * param1);
    case ErrorFamily::Gaussian: {
      const double z = x / param1;
      return std::exp(-0.5 * z * z) / (param1 * std::sqrt(2.0 * std::numbers::pi));
    }
    case ErrorFamily::Zero:
      break;
  }
  throw DomainError("the zero error law has no density");
}

ErrorLaw ErrorLaw::as_centered(bool on) const
{
  ErrorLaw copy = *this;
  copy.centered = on;
  return copy;
}

double ErrorLaw::sample_raw(Engine& engine) const
{
  switch (family) {
    case ErrorFamily::Gamma:
      return std::gamma_distribution<double>(param1, param2)(engine);
    case ErrorFamily::Lognormal:
      return std::lognormal_distribution<double>(param1, param2)(engine);
    case ErrorFamily::Laplace: {
      // inverse CDF on a symmetric uniform
      const double v = std::uniform_real_distribution<double>(-0.5, 0.5)(engine);
      const double sign = v < 0.0 ? -1.0 : 1.0;
      return -param1 * sign * std::log1p(-2.0 * std::abs(v));
    }
    case ErrorFamily::Gaussian:
      return std::normal_distribution<double>(0.0, param1)(engine);
    case ErrorFamily::Zero:
      return 0.0;
  }
  return 0.0;
}

ErrorLaw gamma_law(double shape, double scale)
{
  if (!(shape > 0.0) || !(scale > 0.0))
    throw DomainError("gamma law needs positive shape and scale");
  return { ErrorFamily::Gamma, shape, scale, false };
}

ErrorLaw lognormal_law(double log_location, double log_scale)
{
  if (!(log_scale > 0.0))
    throw DomainError("lognormal law needs a positive log-scale");
  return { ErrorFamily::Lognormal, log_location, log_scale, false };
}

ErrorLaw laplace_law(double scale)
{
  if (!(scale > 0.0))
    throw DomainError("laplace law needs a positive scale");
  return { ErrorFamily::Laplace, scale, 0.0, false };
}

ErrorLaw gaussian_law(double sd)
{
  if (!(sd > 0.0))
    throw DomainError("gaussian law needs a positive standard deviation");
  return { ErrorFamily::Gaussian, sd, 0.0, false };
}

ErrorLaw zero_law() { return { ErrorFamily::Zero, 0.0, 0.0, false }; }

ErrorLaw gamma_design(double lambda)
{
  if (!(lambda > 0.0) || lambda > 1.0)
    throw DomainError("reliability ratio must lie in (0, 1]");
  if (lambda == 1.0)
    return zero_law();
  return gamma_law(4.0 * (1.0 - lambda) / lambda, 0.5);
}

ErrorLaw lognormal_with_variance(double variance)
{
  if (!(variance > 0.0) || !std::isfinite(variance))
    throw NoSolution("a lognormal law needs a positive finite variance");
  // mu_3 = variance  <=>  skewness = variance^{-1/2}. The lognormal skewness
  // (w + 2) sqrt(w - 1), w = exp(s^2), increases from 0 to infinity in s, so
  // bisection on s always brackets the root.
  const double target = 1.0 / std::sqrt(variance);
  const auto skew = [](double s) {
    const double w = std::exp(s * s);
    return (w + 2.0) * std::sqrt(std::expm1(s * s));
  };
  double lo = 0.0, hi = 1.0;
  while (skew(hi) < target) {
    hi *= 2.0;
    if (hi > 64.0)
      throw NoSolution("lognormal skewness target out of range");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (skew(mid) < target ? lo : hi) = mid;
  }
  const double s = 0.5 * (lo + hi);
  const double mu = 0.5 * (std::log(variance / std::expm1(s * s)) - s * s);
  return lognormal_law(mu, s);
}

ErrorLaw lognormal_design(double lambda, double var_x)
{
  if (!(lambda > 0.0) || !(lambda < 1.0))
    throw DomainError("lognormal design needs a reliability ratio in (0, 1)");
  if (!(var_x > 0.0))
    throw DomainError("lognormal design needs var(X) > 0");
  return lognormal_with_variance((1.0 - lambda) / lambda * var_x).as_centered();
}

double laplace_charfn(double t, double scale)
{
  if (!(scale > 0.0))
    throw DomainError("laplace scale must be positive");
  return 1.0 / (1.0 + scale * scale * t * t);
}

std::vector<double> draw(const ErrorLaw& law, std::size_t n, std::uint64_t seed)
{
  Engine engine(seed);
  std::vector<double> out(n);
  for (auto& v : out)
    v = law.sample(engine);
  return out;
}

} // namespace tessera
