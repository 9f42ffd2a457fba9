#include "tessera/density.hpp"

#include "tessera/errors.hpp"
#include "tessera/hypercomplex.hpp"
#include "tessera/parallel.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

namespace tessera {

namespace {

constexpr double kScanStep = 0.25;

double kde_term(const DensityConfig& config, double datum, double x, double h, double cutoff)
{
  switch (config.method) {
    case DensityMethod::ErrorFree:
    case DensityMethod::Naive:
      return logistic_kernel((datum - x) / h);
    case DensityMethod::Tessarine: {
      const auto& co = config.coeffs;
      return logistic_kernel_real(
        { (datum - x - config.error_mean) / h, co.b / h, co.c / h, co.d / h });
    }
    case DensityMethod::Deconvoluting:
      break;
  }
  // deconvoluting kernel with the truncation point computed once per call
  const double u = (datum - x) / h;
  const auto integrand = [&](double t) {
    return std::cos(t * u) * logistic_kernel_fourier(t) / config.phi_u(t / h);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  const auto& q = config.quadrature;
  double err = 0.0, l1 = 0.0;
  double value = GK::integrate(integrand, 0.0, cutoff, q.max_depth, 1e-10, &err, &l1);
  if (!(err <= q.abs_tolerance)) {
    const double rel = 0.5 * q.abs_tolerance / std::max(l1, 1.0);
    value = GK::integrate(integrand, 0.0, cutoff, q.max_depth + 5, rel, &err);
    if (!(err <= q.abs_tolerance))
      throw IntegrationFailure("deconvoluting kernel quadrature did not reach tolerance");
  }
  return value / std::numbers::pi;
}

DensityEstimate run_kde(std::span<const double> data, double h, std::span<const double> grid,
                        const DensityConfig& config, bool parallel)
{
  if (!(h > 0.0))
    throw DomainError("bandwidth must be positive");
  if (data.empty())
    throw InsufficientData("kernel density estimation needs at least one observation");
  if (config.method == DensityMethod::Deconvoluting && !config.phi_u)
    throw DomainError("the deconvoluting estimator needs the error characteristic function");
  const double cutoff = config.method == DensityMethod::Deconvoluting
                          ? truncation_point(h, config.phi_u, config.quadrature)
                          : 0.0;
  DensityEstimate out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.assign(grid.size(), 0.0);
  out.bandwidth = h;
  out.method = config.method;
  const double scale = 1.0 / (static_cast<double>(data.size()) * h);
  const auto point = [&](std::size_t g) {
    double total = 0.0;
    for (double v : data)
      total += kde_term(config, v, grid[g], h, cutoff);
    out.values[g] = total * scale;
  };
  if (parallel) {
    std::exception_ptr failure;
    parallel_for(grid.size(), [&](std::size_t g) {
      try {
        point(g);
      } catch (...) {
#pragma omp critical(tessera_kde)
        if (!failure)
          failure = std::current_exception();
      }
    });
    if (failure)
      std::rethrow_exception(failure);
  } else {
    for (std::size_t g = 0; g < grid.size(); ++g)
      point(g);
  }
  return out;
}

} // namespace

std::string to_string(DensityMethod method)
{
  switch (method) {
    case DensityMethod::ErrorFree:
      return "errorfree";
    case DensityMethod::Naive:
      return "naive";
    case DensityMethod::Tessarine:
      return "tc";
    case DensityMethod::Deconvoluting:
      return "dk";
  }
  return "errorfree";
}

DensityMethod density_method_from_string(const std::string& name)
{
  for (auto m : { DensityMethod::ErrorFree, DensityMethod::Naive, DensityMethod::Tessarine,
                  DensityMethod::Deconvoluting })
    if (to_string(m) == name)
      return m;
  throw ConfigError("unknown density method '" + name + "'");
}

double logistic_kernel(double t)
{
  const double e = std::exp(-std::abs(t));
  return e / ((1.0 + e) * (1.0 + e));
}

double logistic_kernel_fourier(double t)
{
  const double x = std::numbers::pi * std::abs(t);
  if (x < 1e-4)
    return 1.0 - x * x / 6.0;
  if (x > 700.0)
    return 0.0;
  return x / std::sinh(x);
}

double truncation_point(double h, const CharFn& phi_u, const QuadratureOptions& options)
{
  if (!(h > 0.0))
    throw DomainError("bandwidth must be positive");
  double last_large = 0.0;
  int quiet = 0;
  for (double t = 0.0; std::numbers::pi * t <= 700.0; t += kScanStep) {
    const double ratio = std::abs(logistic_kernel_fourier(t) / phi_u(t / h));
    if (!(ratio <= options.divergence_bound))
      throw DivergentIntegrand("phi_K(t) / phi_U(t/h) exceeds the divergence bound");
    if (ratio >= options.tail_bound) {
      last_large = t;
      quiet = 0;
    } else if (++quiet >= 40) {
      break;
    }
  }
  return last_large + kScanStep;
}

double deconv_kernel_value(double u, double h, const CharFn& phi_u,
                           const QuadratureOptions& options)
{
  DensityConfig config;
  config.method = DensityMethod::Deconvoluting;
  config.phi_u = phi_u;
  config.quadrature = options;
  // kde_term evaluates L((datum - x) / h); datum = u h, x = 0 gives L(u)
  return kde_term(config, u * h, 0.0, h, truncation_point(h, phi_u, options));
}

DensityEstimate kde(std::span<const double> data, double h, std::span<const double> grid,
                    const DensityConfig& config)
{
  return run_kde(data, h, grid, config, true);
}

DensityEstimate kde_serial(std::span<const double> data, double h, std::span<const double> grid,
                           const DensityConfig& config)
{
  return run_kde(data, h, grid, config, false);
}

double mise(const DensityEstimate& estimate, std::span<const double> truth_values)
{
  if (estimate.values.empty() || truth_values.size() != estimate.values.size())
    throw DomainError("estimate and truth must share a nonempty grid");
  double total = 0.0;
  for (std::size_t g = 0; g < truth_values.size(); ++g) {
    const double diff = estimate.values[g] - truth_values[g];
    total += diff * diff;
  }
  return total / static_cast<double>(truth_values.size());
}

double mise(const DensityEstimate& estimate, const std::function<double(double)>& truth)
{
  std::vector<double> values(estimate.grid.size());
  for (std::size_t g = 0; g < values.size(); ++g)
    values[g] = truth(estimate.grid[g]);
  return mise(estimate, values);
}

OracleFit oracle_fit(const DensityConfig& config, std::span<const double> data,
                     std::span<const double> grid, std::span<const double> truth_values,
                     std::span<const double> h_grid)
{
  if (h_grid.empty())
    throw DomainError("bandwidth grid is empty");
  OracleFit best;
  bool have = false;
  for (double h : h_grid) {
    auto estimate = kde(data, h, grid, config);
    const double err = mise(estimate, truth_values);
    if (!have || err < best.mise || (err == best.mise && h < best.bandwidth)) {
      best = { h, err, std::move(estimate) };
      have = true;
    }
  }
  return best;
}

double oracle_bandwidth(const DensityConfig& config, std::span<const double> data,
                        std::span<const double> grid, const std::function<double(double)>& truth,
                        std::span<const double> h_grid)
{
  std::vector<double> values(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g)
    values[g] = truth(grid[g]);
  return oracle_fit(config, data, grid, values, h_grid).bandwidth;
}

std::vector<double> linspace(double lo, double hi, std::size_t count)
{
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

double NormalMixture::pdf(double x) const
{
  double total = 0.0;
  for (const auto& c : components) {
    const double z = (x - c.mean) / c.sd;
    total += c.weight * std::exp(-0.5 * z * z) / (c.sd * std::sqrt(2.0 * std::numbers::pi));
  }
  return total;
}

double NormalMixture::sample(Engine& engine) const
{
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
  const MixtureComponent* pick = &components.back();
  for (const auto& c : components) {
    if (u < c.weight) {
      pick = &c;
      break;
    }
    u -= c.weight;
  }
  return std::normal_distribution<double>(pick->mean, pick->sd)(engine);
}

double NormalMixture::variance() const
{
  double mean = 0.0, second = 0.0;
  for (const auto& c : components) {
    mean += c.weight * c.mean;
    second += c.weight * (c.sd * c.sd + c.mean * c.mean);
  }
  return second - mean * mean;
}

NormalMixture NormalMixture::parse(const std::string& text)
{
  NormalMixture mix;
  std::stringstream items(text);
  std::string item;
  double total = 0.0;
  while (std::getline(items, item, ',')) {
    MixtureComponent c{};
    char colon1 = 0, colon2 = 0;
    std::istringstream is(item);
    if (!(is >> c.weight >> colon1 >> c.mean >> colon2 >> c.sd) || colon1 != ':' ||
        colon2 != ':' || !(c.weight > 0.0) || !(c.sd > 0.0))
      throw ConfigError("bad mixture component '" + item + "', expected weight:mean:sd");
    total += c.weight;
    mix.components.push_back(c);
  }
  if (mix.components.empty() || std::abs(total - 1.0) > 1e-9)
    throw ConfigError("mixture weights must be positive and sum to 1");
  return mix;
}

std::string NormalMixture::to_string() const
{
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < components.size(); ++i) {
    if (i > 0)
      os << ',';
    os << components[i].weight << ':' << components[i].mean << ':' << components[i].sd;
  }
  return os.str();
}

std::vector<double> convolved_density(const std::function<double(double)>& px, const ErrorLaw& law,
                                      std::span<const double> grid)
{
  std::vector<double> out(grid.size());
  if (law.family == ErrorFamily::Zero) {
    for (std::size_t g = 0; g < grid.size(); ++g)
      out[g] = px(grid[g]);
    return out;
  }
  const double inf = std::numeric_limits<double>::infinity();
  const double lower = law.support_lower();
  const double span = 4.0 * std::sqrt(law.moments().variance);
  boost::math::quadrature::tanh_sinh<double> finite;
  boost::math::quadrature::exp_sinh<double> tail;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double x = grid[g];
    const auto f = [&](double u) { return px(x - u) * law.pdf(u); };
    double value = 0.0;
    if (std::isfinite(lower)) {
      value = finite.integrate(f, lower, lower + span) + tail.integrate(f, lower + span, inf);
    } else {
      value = tail.integrate(f, 0.0, inf) + tail.integrate(f, -inf, 0.0);
    }
    out[g] = value;
  }
  return out;
}

} // namespace tessera
