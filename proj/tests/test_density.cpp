#include "tessera/density.hpp"
#include "tessera/errors.hpp"
#include "tessera/hypercomplex.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace tessera;

namespace {

const CharFn no_error = [](double) { return 1.0; };

DensityConfig config_of(DensityMethod method)
{
  DensityConfig c;
  c.method = method;
  return c;
}

std::vector<double> normal_sample(std::size_t n, std::uint64_t seed, double mean = 0.0,
                                  double sd = 1.0)
{
  auto engine = make_engine(seed);
  std::normal_distribution<double> normal(mean, sd);
  std::vector<double> x(n);
  for (auto& v : x)
    v = normal(engine);
  return x;
}

double trapezoid(const std::function<double(double)>& f, double lo, double hi, int nodes)
{
  const double h = (hi - lo) / (nodes - 1);
  double total = 0.5 * (f(lo) + f(hi));
  for (int k = 1; k < nodes - 1; ++k)
    total += f(lo + k * h);
  return total * h;
}

} // namespace

TEST(LogisticKernel, Values)
{
  EXPECT_EQ(logistic_kernel(0.0), 0.25);
  EXPECT_DOUBLE_EQ(logistic_kernel(1.0), 1.0 / (2.0 + std::exp(1.0) + std::exp(-1.0)));
  EXPECT_EQ(logistic_kernel(800.0), 0.0);
  EXPECT_EQ(logistic_kernel_fourier(0.0), 1.0);
}

TEST(LogisticKernel, FourierTransformMatchesNumericalTransform)
{
  // direct cosine transform of K on a fine grid
  for (double t = 0.0; t <= 3.0; t += 0.25) {
    const double numeric = 2.0 * trapezoid([t](double x) { return std::cos(t * x) * logistic_kernel(x); },
                                           0.0, 60.0, 200001);
    EXPECT_NEAR(logistic_kernel_fourier(t), numeric, 1e-4) << t;
  }
}

TEST(DeconvKernel, NoErrorReproducesKernel)
{
  EXPECT_NEAR(deconv_kernel_value(0.0, 1.0, no_error), 0.25, 1e-6);
  for (double u = -10.0; u <= 10.0; u += 0.5)
    EXPECT_NEAR(deconv_kernel_value(u, 0.7, no_error), logistic_kernel(u), 1e-6) << u;
}

TEST(DeconvKernel, LaplaceAgainstDenseTrapezoid)
{
  const double s = 1.0, h = 1.0;
  const CharFn phi = [s](double t) { return laplace_charfn(t, s); };
  const auto integrand = [&](double t) {
    if (t == 0.0)
      return 1.0;
    return std::numbers::pi * t * (1 + s * s * t * t / (h * h)) / std::sinh(std::numbers::pi * t);
  };
  const double oracle = trapezoid(integrand, 0.0, 20.0, 100000) / std::numbers::pi;
  EXPECT_NEAR(deconv_kernel_value(0.0, h, phi), oracle, 1e-7);
}

TEST(DeconvKernel, Even)
{
  const CharFn phi = [](double t) { return laplace_charfn(t, 0.4); };
  auto engine = make_engine(5);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int k = 0; k < 20; ++k) {
    const double v = u(engine);
    EXPECT_NEAR(deconv_kernel_value(v, 0.5, phi), deconv_kernel_value(-v, 0.5, phi), 1e-10);
  }
}

TEST(DeconvKernel, Divergence)
{
  const CharFn tiny = [](double t) { return std::exp(-1e6 * t * t); };
  EXPECT_THROW(deconv_kernel_value(0.0, 0.1, tiny), DivergentIntegrand);
}

TEST(Kde, OnePoint)
{
  const std::vector<double> data{ 0.0 }, grid{ 0.0 };
  EXPECT_EQ(kde(data, 1.0, grid, config_of(DensityMethod::Naive)).values[0], 0.25);
}

TEST(Kde, ZeroCoefficientsEqualNaive)
{
  const auto data = normal_sample(50, 1);
  const auto grid = linspace(-3, 3, 41);
  auto tc = config_of(DensityMethod::Tessarine);
  const auto a = kde(data, 0.4, grid, tc);
  const auto b = kde(data, 0.4, grid, config_of(DensityMethod::Naive));
  EXPECT_EQ(a.values, b.values);
}

TEST(Kde, DeconvolutingWithoutErrorEqualsNaive)
{
  const auto data = normal_sample(20, 2);
  const auto grid = linspace(-3, 3, 13);
  auto dk = config_of(DensityMethod::Deconvoluting);
  dk.phi_u = no_error;
  const auto a = kde(data, 0.5, grid, dk);
  const auto b = kde(data, 0.5, grid, config_of(DensityMethod::Naive));
  for (std::size_t g = 0; g < grid.size(); ++g)
    EXPECT_NEAR(a.values[g], b.values[g], 1e-6);
}

TEST(Kde, ErrorFreeIntegratesToOne)
{
  const auto data = normal_sample(100, 3);
  const double h = 0.3;
  const double lo = *std::min_element(data.begin(), data.end()) - 10 * h;
  const double hi = *std::max_element(data.begin(), data.end()) + 10 * h;
  const auto grid = linspace(lo, hi, 4001);
  const auto est = kde(data, h, grid, config_of(DensityMethod::ErrorFree));
  double total = 0.0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    total += 0.5 * (est.values[g] + est.values[g - 1]) * (grid[g] - grid[g - 1]);
  EXPECT_NEAR(total, 1.0, 1e-3);
}

TEST(Kde, TranslationEquivariant)
{
  const auto data = normal_sample(30, 4);
  const auto grid = linspace(-2, 2, 9);
  std::vector<double> data2 = data, grid2 = grid;
  for (auto& v : data2)
    v += 2.0;
  for (auto& v : grid2)
    v += 2.0;
  const auto law = gamma_design(0.9);
  auto tc = config_of(DensityMethod::Tessarine);
  tc.error_mean = law.raw_mean();
  tc.coeffs = find_coefficients(law.moments());
  auto dk = config_of(DensityMethod::Deconvoluting);
  dk.phi_u = [](double t) { return laplace_charfn(t, 0.2); };
  for (const auto& c : { config_of(DensityMethod::ErrorFree), config_of(DensityMethod::Naive), tc, dk }) {
    const auto a = kde(data, 0.5, grid, c);
    const auto b = kde(data2, 0.5, grid2, c);
    for (std::size_t g = 0; g < grid.size(); ++g)
      EXPECT_NEAR(a.values[g], b.values[g], 1e-12) << to_string(c.method);
  }
}

TEST(Kde, TessarineDividesWholeArgumentByBandwidth)
{
  const auto law = gamma_design(0.8);
  auto tc = config_of(DensityMethod::Tessarine);
  tc.error_mean = law.raw_mean();
  tc.coeffs = solve_exact(law.moments());
  const std::vector<double> data{ 0.3, 1.1 }, grid{ 0.0, 0.5 };
  const double h = 0.7;
  const auto est = kde(data, h, grid, tc);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double v = 0.0;
    for (double w : data) {
      const Tessarine arg{ (w - grid[g] - tc.error_mean) / h, tc.coeffs.b / h, tc.coeffs.c / h,
                           tc.coeffs.d / h };
      v += logistic_kernel_real(arg) / h;
    }
    EXPECT_NEAR(est.values[g], v / 2.0, 1e-15);
  }
}

TEST(Kde, ParallelAgreesWithSerialBitwise)
{
  const auto data = normal_sample(60, 6);
  const auto grid = linspace(-3, 3, 25);
  auto dk = config_of(DensityMethod::Deconvoluting);
  dk.phi_u = [](double t) { return laplace_charfn(t, 0.3); };
  EXPECT_EQ(kde(data, 0.4, grid, dk).values, kde_serial(data, 0.4, grid, dk).values);
  const auto n = config_of(DensityMethod::Naive);
  EXPECT_EQ(kde(data, 0.4, grid, n).values, kde_serial(data, 0.4, grid, n).values);
}

TEST(Mise, Examples)
{
  DensityEstimate est;
  est.grid = linspace(0, 1, 100);
  const auto truth = [](double x) { return x * x; };
  for (double x : est.grid)
    est.values.push_back(truth(x));
  EXPECT_EQ(mise(est, truth), 0.0);
  for (auto& v : est.values)
    v += 0.1;
  EXPECT_NEAR(mise(est, truth), 0.01, 1e-15);
}

TEST(OracleBandwidth, SingleCandidate)
{
  const auto data = normal_sample(30, 7);
  const auto grid = linspace(-3, 3, 20);
  const std::vector<double> h{ 0.42 };
  EXPECT_EQ(oracle_bandwidth(config_of(DensityMethod::ErrorFree), data, grid,
                             [](double) { return 0.0; }, h),
            0.42);
}

TEST(OracleBandwidth, NearSilvermanForNormalData)
{
  const auto data = normal_sample(200, 8);
  const auto grid = linspace(-4, 4, 161);
  std::vector<double> h;
  for (int k = 1; k <= 20; ++k)
    h.push_back(0.05 * k);
  const auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2 * std::numbers::pi); };
  const double chosen = oracle_bandwidth(config_of(DensityMethod::ErrorFree), data, grid, phi, h);
  // the logistic kernel has variance pi^2 / 3; rescale Silverman's rule to it
  const double silverman = 1.06 * std::pow(200.0, -0.2) / (std::numbers::pi / std::sqrt(3.0));
  EXPECT_LE(std::abs(chosen - silverman), 0.1 + 1e-12) << chosen;
}

TEST(OracleBandwidth, MiseDecreasesWithSampleSize)
{
  NormalMixture mix = NormalMixture::parse("0.5:0:1,0.5:5:1");
  const auto grid = linspace(-2, 8, 100);
  std::vector<double> truth, h;
  for (double x : grid)
    truth.push_back(mix.pdf(x));
  for (int k = 2; k <= 20; ++k)
    h.push_back(0.05 * k);
  double small = 0.0, large = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    auto engine = make_engine(9, { static_cast<std::uint64_t>(rep) });
    std::vector<double> x50(50), x500(500);
    for (auto& v : x50)
      v = mix.sample(engine);
    for (auto& v : x500)
      v = mix.sample(engine);
    small += oracle_fit(config_of(DensityMethod::ErrorFree), x50, grid, truth, h).mise;
    large += oracle_fit(config_of(DensityMethod::ErrorFree), x500, grid, truth, h).mise;
  }
  EXPECT_GT(small, 0.0);
  EXPECT_TRUE(std::isfinite(small));
  EXPECT_LT(large, small);
}

TEST(ConvolvedDensity, MatchesMonteCarloHistogram)
{
  NormalMixture mix = NormalMixture::parse("0.5:0:1,0.5:5:1");
  const auto law = gamma_design(0.8).as_centered();
  const auto grid = linspace(-2, 8, 41);
  const auto conv = convolved_density([&](double x) { return mix.pdf(x); }, law, grid);
  auto engine = make_engine(10);
  const int draws = 1000000;
  const double width = 0.1;
  std::vector<double> counts(grid.size());
  for (int k = 0; k < draws; ++k) {
    const double v = mix.sample(engine) + law.sample(engine);
    for (std::size_t g = 0; g < grid.size(); ++g)
      if (std::abs(v - grid[g]) < 0.5 * width)
        counts[g] += 1.0;
  }
  double sup = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g)
    sup = std::max(sup, std::abs(counts[g] / (draws * width) - conv[g]));
  EXPECT_LT(sup, 0.01);
}

TEST(NormalMixture, ParseAndMoments)
{
  const auto mix = NormalMixture::parse("0.5:0:1,0.5:5:1");
  EXPECT_NEAR(mix.variance(), 7.25, 1e-15);
  EXPECT_EQ(NormalMixture::parse(mix.to_string()).components.size(), 2u);
  EXPECT_THROW(NormalMixture::parse("0.5:0"), ConfigError);
}

TEST(Linspace, Endpoints)
{
  const auto g = linspace(-2, 8, 100);
  EXPECT_EQ(g.front(), -2.0);
  EXPECT_EQ(g.back(), 8.0);
  EXPECT_EQ(g.size(), 100u);
}
