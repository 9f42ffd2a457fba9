#include "tessera/error_model.hpp"
#include "tessera/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace tessera;

namespace {

// Sample moments with their Monte Carlo standard errors, computed from raw
// power sums rather than through moments_from_sample.
struct Check
{
  double mean, var, mu3, mu4;
  double se_mean, se_var, se_mu3, se_mu4;
};

Check sample_check(const std::vector<double>& x)
{
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x)
    m += v;
  m /= n;
  std::array<double, 9> c{};
  for (double v : x) {
    double p = 1.0;
    for (int k = 1; k <= 8; ++k) {
      p *= v - m;
      c[k] += p;
    }
  }
  for (auto& v : c)
    v /= n;
  return { m,
           c[2],
           c[3],
           c[4],
           std::sqrt(c[2] / n),
           std::sqrt((c[4] - c[2] * c[2]) / n),
           std::sqrt((c[6] - c[3] * c[3]) / n),
           std::sqrt((c[8] - c[4] * c[4]) / n) };
}

void expect_moments_match(const ErrorLaw& law, std::uint64_t seed)
{
  const auto x = draw(law, 1000000, seed);
  const auto s = sample_check(x);
  const auto m = law.moments();
  const double mean = law.centered ? 0.0 : law.raw_mean();
  EXPECT_NEAR(s.mean, mean, 5 * s.se_mean);
  EXPECT_NEAR(s.var, m.variance, 5 * s.se_var);
  EXPECT_NEAR(s.mu3, m.mu3, 5 * s.se_mu3);
  EXPECT_NEAR(s.mu4, m.mu4, 5 * s.se_mu4);
}

} // namespace

TEST(MomentsFromSample, Errors)
{
  EXPECT_THROW(moments_from_sample(std::vector<double>{ 1, 1, 1, 1, 1 }), DegenerateSample);
  EXPECT_THROW(moments_from_sample(std::vector<double>{ 1, 2, 3, 4 }), InsufficientData);
}

TEST(MomentsFromSample, HandComputed)
{
  const auto m = moments_from_sample(std::vector<double>{ -1, 0, 1, -1, 0, 1 });
  EXPECT_NEAR(m.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.variance, 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(m.mu3, 0.0, 1e-15);
  EXPECT_NEAR(m.mu4, 2.0 / 3.0, 1e-15);
}

TEST(MomentsFromSample, GammaUnitShape)
{
  const auto x = draw(gamma_law(1.0, 1.0), 1000000, 5);
  const auto m = moments_from_sample(x);
  const auto s = sample_check(x);
  EXPECT_NEAR(m.mean, 1.0, 5 * s.se_mean);
  EXPECT_NEAR(m.variance, 1.0, 5 * s.se_var);
  EXPECT_NEAR(m.mu3, 2.0, 5 * s.se_mu3);
  EXPECT_NEAR(m.mu4, 9.0, 5 * s.se_mu4);
}

TEST(MomentSet, Validate)
{
  EXPECT_NO_THROW((MomentSet{ 0, 1, 0, 3 }).validate());
  EXPECT_THROW((MomentSet{ 0, 0, 0, 0 }).validate(), DomainError);
  EXPECT_THROW((MomentSet{ 0, 1, 2, 3 }).validate(), DomainError); // kurtosis 3 < 1 + 4
}

TEST(GammaDesign, Lambda08)
{
  const auto law = gamma_design(0.8);
  EXPECT_EQ(law.family, ErrorFamily::Gamma);
  EXPECT_NEAR(law.param1, 1.0, 1e-15);
  EXPECT_NEAR(law.param2, 0.5, 1e-15);
  const auto m = law.moments();
  EXPECT_NEAR(m.variance, 0.25, 1e-15);
  EXPECT_NEAR(m.mu3, 0.25, 1e-15);
  EXPECT_NEAR(m.kurtosis(), 9.0, 1e-12);
}

TEST(GammaDesign, Lambda09KurtosisFollowsTheGammaLaw)
{
  const auto m = gamma_design(0.9).moments();
  EXPECT_NEAR(m.variance, 1.0 / 9.0, 1e-15);
  EXPECT_NEAR(m.mu3, 1.0 / 9.0, 1e-15);
  // 3 + 6 / shape with shape 4/9; the alternative closed form would give 12
  EXPECT_NEAR(m.kurtosis(), 16.5, 1e-12);
  const auto x = draw(gamma_design(0.9), 1000000, 6);
  const auto s = sample_check(x);
  EXPECT_NEAR(s.mu4, m.mu4, 5 * s.se_mu4);
  EXPECT_GT(std::abs(s.mu4 - 12.0 * m.variance * m.variance), 5 * s.se_mu4);
}

TEST(GammaDesign, ReliabilityRoundTripAndLimits)
{
  for (double lambda : { 0.75, 0.8, 0.85, 0.9, 0.95 }) {
    const auto m = gamma_design(lambda).moments();
    EXPECT_NEAR(1.0 / (1.0 + m.variance), lambda, 1e-15);
    EXPECT_NO_THROW(m.validate());
  }
  EXPECT_EQ(gamma_design(1.0).family, ErrorFamily::Zero);
  EXPECT_EQ(gamma_design(1.0).moments().variance, 0.0);
  EXPECT_THROW(gamma_design(0.0), DomainError);
  EXPECT_THROW(gamma_design(1.2), DomainError);
}

TEST(LognormalDesign, SolvesTheMomentSystem)
{
  const auto law = lognormal_with_variance(0.25);
  EXPECT_NEAR(law.param2, 0.5513835899408456, 1e-10);
  EXPECT_NEAR(law.param1, -0.327764691006506, 1e-10);
  const auto m = law.moments();
  EXPECT_NEAR(m.variance, 0.25, 1e-12);
  EXPECT_NEAR(m.mu3, 0.25, 1e-12);
  EXPECT_NO_THROW(m.validate());

  const auto d = lognormal_design(0.9);
  EXPECT_TRUE(d.centered);
  EXPECT_NEAR(d.moments().mean, 0.0, 0.0);
  EXPECT_NEAR(d.moments().variance, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(d.moments().mu3, 1.0 / 9.0, 1e-12);
  EXPECT_NEAR(lognormal_design(0.9, 7.25).moments().variance, 7.25 / 9.0, 1e-12);
}

TEST(LognormalDesign, Rejects)
{
  EXPECT_THROW(lognormal_with_variance(0.0), NoSolution);
  EXPECT_THROW(lognormal_design(1.0), DomainError);
  EXPECT_THROW(lognormal_design(0.0), DomainError);
}

TEST(LaplaceCharfn, Values)
{
  EXPECT_EQ(laplace_charfn(0.0, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(laplace_charfn(1.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(laplace_charfn(2.0, 0.5), 0.5);
}

TEST(Draw, DeterministicAndCentered)
{
  EXPECT_EQ(draw(gamma_design(0.8), 100, 9), draw(gamma_design(0.8), 100, 9));
  EXPECT_NE(draw(gamma_design(0.8), 100, 9), draw(gamma_design(0.8), 100, 10));
  for (double v : draw(zero_law(), 50, 1))
    EXPECT_EQ(v, 0.0);
  const auto raw = draw(gamma_law(2, 1), 10, 3);
  const auto centred = draw(gamma_law(2, 1).as_centered(), 10, 3);
  for (std::size_t i = 0; i < raw.size(); ++i)
    EXPECT_DOUBLE_EQ(centred[i], raw[i] - 2.0);
}

TEST(Draw, MonteCarloMomentsMatchEveryFamily)
{
  expect_moments_match(gamma_design(0.8), 101);
  expect_moments_match(lognormal_design(0.8), 102);
  expect_moments_match(lognormal_law(0.2, 0.3), 103);
  expect_moments_match(laplace_law(0.7), 104);
  expect_moments_match(gaussian_law(0.4), 105);
}

TEST(ErrorLaw, PdfIntegratesToOneAndSupport)
{
  for (const auto& law : { gamma_law(2.0, 0.5), lognormal_design(0.8), laplace_law(1.0),
                           gaussian_law(0.5), gamma_law(2.0, 0.5).as_centered() }) {
    const double lo = std::max(law.support_lower(), -40.0), hi = 40.0;
    const int steps = 400000;
    const double h = (hi - lo) / steps;
    double total = 0.0;
    for (int k = 0; k < steps; ++k)
      total += law.pdf(lo + (k + 0.5) * h) * h;
    EXPECT_NEAR(total, 1.0, 2e-3) << to_string(law.family);
  }
  EXPECT_NEAR(gamma_law(2.0, 0.5).as_centered().support_lower(), -1.0, 1e-15);
}
