#include "tessera/coeff_solver.hpp"
#include "tessera/errors.hpp"
#include "tessera/hypercomplex.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace tessera;

namespace {

const MomentSet gamma08{ 0.5, 0.25, 0.25, 0.5625 };
const MomentSet gamma09{ 2.0 / 9.0, 1.0 / 9.0, 1.0 / 9.0, 16.5 / 81.0 };
const MomentSet gaussian{ 0.0, 1.0, 0.0, 3.0 };

double q_oracle(const MomentSet& m, double b, double c, double d)
{
  const double s2 = m.variance;
  const double f1 = s2 - b * b + c * c - d * d;
  const double f2 = m.mu3 - 6 * b * c * d;
  const double f3 = m.mu4 - 5 * s2 * s2 - 4 * (b * b * (c * c - d * d) + c * c * d * d);
  const double d2 = std::abs(m.mu3) < 1e-10 * std::pow(s2, 1.5) ? 3 * std::pow(s2, 1.5) : 3 * m.mu3;
  return std::pow(f1 / s2, 2) + std::pow(f2 / d2, 2) + std::pow(f3 / (12 * m.mu4), 2);
}

double grid_min_q(const MomentSet& m, double step)
{
  const double s = 3.0 * m.sd();
  double best = INFINITY;
  for (double b = -s; b <= s + 1e-12; b += step)
    for (double c = -s; c <= s + 1e-12; c += step)
      for (double d = -s; d <= s + 1e-12; d += step)
        best = std::min(best, q_oracle(m, b, c, d));
  return best;
}

// Monte Carlo Re{E(C^l)} for C = U + a + b i + c j + d k, built with tess_mul
double mc_tessarine_moment(const ErrorLaw& law, double a, double b, double c, double d, int l,
                           int n, double* se)
{
  auto engine = make_engine(77, { static_cast<std::uint64_t>(l) });
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const Tessarine t{ law.sample(engine) + a, b, c, d };
    Tessarine p = Tessarine::one();
    for (int k = 0; k < l; ++k)
      p = tess_mul(p, t);
    sum += p.a;
    sq += p.a * p.a;
  }
  const double mean = sum / n;
  *se = std::sqrt((sq / n - mean * mean) / n);
  return mean;
}

double mc_quaternion_moment(const ErrorLaw& law, double a, double b, double c, double d, int l,
                            int n, double* se)
{
  auto engine = make_engine(78, { static_cast<std::uint64_t>(l) });
  double sum = 0.0, sq = 0.0;
  for (int r = 0; r < n; ++r) {
    const Quaternion q{ law.sample(engine) + a, b, c, d };
    Quaternion p{ 1, 0, 0, 0 };
    for (int k = 0; k < l; ++k)
      p = quat_mul(p, q);
    sum += p.a;
    sq += p.a * p.a;
  }
  const double mean = sum / n;
  *se = std::sqrt((sq / n - mean * mean) / n);
  return mean;
}

} // namespace

TEST(Residuals, Definitions)
{
  const auto f = residual_functions(gamma08, 0.3, 0.2, 0.1);
  EXPECT_NEAR(f[0], 0.25 - 0.09 + 0.04 - 0.01, 1e-15);
  EXPECT_NEAR(f[1], 0.25 - 6 * 0.3 * 0.2 * 0.1, 1e-15);
  EXPECT_NEAR(f[2], 0.5625 - 5 * 0.0625 - 4 * (0.09 * (0.04 - 0.01) + 0.04 * 0.01), 1e-15);
  EXPECT_NEAR(objective_q(gamma08, 0.3, 0.2, 0.1), q_oracle(gamma08, 0.3, 0.2, 0.1), 1e-15);
  EXPECT_NEAR(objective_q(gaussian, 0.3, 0.2, 0.1), q_oracle(gaussian, 0.3, 0.2, 0.1), 1e-15);
}

TEST(Residuals, GradientMatchesFiniteDifferences)
{
  auto engine = make_engine(3);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const auto& m : { gamma08, gaussian }) {
    for (int k = 0; k < 50; ++k) {
      const double b = u(engine), c = u(engine), d = u(engine), h = 1e-6;
      const auto g = objective_q_gradient(m, b, c, d);
      const double gb = (objective_q(m, b + h, c, d) - objective_q(m, b - h, c, d)) / (2 * h);
      const double gc = (objective_q(m, b, c + h, d) - objective_q(m, b, c - h, d)) / (2 * h);
      const double gd = (objective_q(m, b, c, d + h) - objective_q(m, b, c, d - h)) / (2 * h);
      EXPECT_NEAR(g[0], gb, 1e-6 * (1 + std::abs(gb)));
      EXPECT_NEAR(g[1], gc, 1e-6 * (1 + std::abs(gc)));
      EXPECT_NEAR(g[2], gd, 1e-6 * (1 + std::abs(gd)));
    }
  }
}

TEST(RealMoments, ClosedFormsAgainstMonteCarlo)
{
  const auto law = gamma_law(1.0, 0.5);
  const auto m = law.moments();
  const double a = -0.3, b = 0.4, c = 0.25, d = -0.15;
  for (int l = 1; l <= 4; ++l) {
    double se = 0.0;
    const double t = mc_tessarine_moment(law, a, b, c, d, l, 1000000, &se);
    EXPECT_NEAR(tessarine_real_moments(a, b, c, d, m, l), t, 5 * se) << "tessarine l=" << l;
    const double q = mc_quaternion_moment(law, a, b, c, d, l, 1000000, &se);
    EXPECT_NEAR(quaternion_real_moments(a, b, c, d, m, l), q, 5 * se) << "quaternion l=" << l;
  }
}

TEST(RealMoments, ComplexConstantConfiguration)
{
  EXPECT_NEAR(tessarine_real_moments(-gamma08.mean, gamma08.sd(), 0, 0, gamma08, 2), 0.0, 1e-15);
}

TEST(RealMoments, QuaternionNegativeResult)
{
  const double b = 0.3, c = 0.2;
  const double d = std::sqrt(gamma08.variance - b * b - c * c);
  EXPECT_NEAR(quaternion_real_moments(-gamma08.mean, b, c, d, gamma08, 2), 0.0, 1e-15);
  EXPECT_NEAR(quaternion_real_moments(-gamma08.mean, b, c, d, gamma08, 3), gamma08.mu3, 1e-15);
}

TEST(CubicRoots, KnownPolynomials)
{
  auto r = cubic_real_roots(1, -6, 11, -6);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_NEAR(r[0], 1, 1e-13);
  EXPECT_NEAR(r[1], 2, 1e-13);
  EXPECT_NEAR(r[2], 3, 1e-13);
  r = cubic_real_roots(2, 0, 0, -16);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_NEAR(r[0], 2, 1e-13);
  r = cubic_real_roots(1, -3, 3, -1);
  ASSERT_GE(r.size(), 1u);
  for (double x : r)
    EXPECT_NEAR(x, 1, 1e-5);
}

TEST(SolveExact, GammaDesignsMatchIndependentRootFinder)
{
  // frozen from a separate Newton solve of the three moment equations
  auto s = solve_exact(gamma08);
  EXPECT_EQ(s.method, CoeffMethod::ExactResultant);
  EXPECT_NEAR(s.b, 0.6297334411706561, 1e-10);
  EXPECT_NEAR(s.c, 0.41474668699459516, 1e-10);
  EXPECT_NEAR(s.d, 0.1595324651735707, 1e-10);
  for (double f : s.residuals)
    EXPECT_LT(std::abs(f), 1e-8);

  s = solve_exact(gamma09);
  EXPECT_NEAR(s.b, 0.49842564, 1e-8);
  EXPECT_NEAR(s.c, 0.38304728, 1e-8);
  EXPECT_NEAR(s.d, 0.09699592, 1e-8);
}

TEST(SolveExact, OrderingAndSignRepresentatives)
{
  const auto all = exact_solutions(gamma08);
  ASSERT_GE(all.size(), 2u);
  for (std::size_t i = 1; i < all.size(); ++i)
    EXPECT_LE(std::abs(all[i - 1].d), std::abs(all[i].d) + 1e-15);
  for (const auto& s : all) {
    EXPECT_GE(s.b, 0.0);
    EXPECT_GE(s.c, 0.0);
    EXPECT_GE(s.d, 0.0);
  }
}

TEST(SolveExact, SignGroupPreservesResiduals)
{
  const auto s = solve_exact(gamma08);
  for (auto [sb, sc, sd] : { std::array{ -1, -1, 1 }, std::array{ -1, 1, -1 }, std::array{ 1, -1, -1 } }) {
    const auto f = residual_functions(gamma08, sb * s.b, sc * s.c, sd * s.d);
    for (double v : f)
      EXPECT_LT(std::abs(v), 1e-12);
  }
}

TEST(SolveExact, NoRealSolution)
{
  EXPECT_THROW(solve_exact(gaussian), NoRealSolution);
  EXPECT_NO_THROW(solve_exact(lognormal_design(0.9, 7.25).moments()));
  EXPECT_THROW(solve_exact(lognormal_design(0.8, 7.25).moments()), NoRealSolution);
  const auto zero = solve_exact(MomentSet{ 0, 0, 0, 0 });
  EXPECT_EQ(zero.b, 0.0);
  EXPECT_EQ(zero.c, 0.0);
  EXPECT_EQ(zero.d, 0.0);
}

TEST(SymmetricClosedForm, Values)
{
  const MomentSet heavy{ 0, 1, 0, 8 };
  const auto s = solve_symmetric_closed_form(heavy);
  EXPECT_EQ(s.method, CoeffMethod::ClosedFormSymmetric);
  EXPECT_NEAR(s.b, 1.224744871391589, 1e-14);
  EXPECT_NEAR(s.c, 0.7071067811865474, 1e-14);
  EXPECT_EQ(s.d, 0.0);
  for (int l = 2; l <= 4; ++l)
    EXPECT_NEAR(tessarine_real_moments(0, s.b, s.c, s.d, heavy, l), 0.0, 1e-12);

  const auto edge = solve_symmetric_closed_form(MomentSet{ 0, 1, 0, 5.0000001 });
  EXPECT_NEAR(edge.b, 1.0, 1e-4);
  EXPECT_NEAR(edge.c, 0.0, 1e-3);
  EXPECT_THROW(solve_symmetric_closed_form(gamma08), NotApplicable);
  EXPECT_THROW(solve_symmetric_closed_form(gaussian), NotApplicable);
}

TEST(FindCoefficients, PathSelection)
{
  EXPECT_EQ(find_coefficients(gamma09).method, CoeffMethod::ExactResultant);
  const MomentSet heavy{ 0, 1, 0, 8 };
  const auto h = find_coefficients(heavy);
  EXPECT_TRUE(h.method == CoeffMethod::ExactResultant ||
              h.method == CoeffMethod::ClosedFormSymmetric);
  EXPECT_LT(objective_q(heavy, h.b, h.c, h.d), 1e-16);
  EXPECT_EQ(find_coefficients(lognormal_design(0.8, 7.25).moments()).method, CoeffMethod::MinimizedQ);
}

TEST(MinimizeQ, ConsistentWithExactSolution)
{
  const auto q = minimize_q(gamma08, 16, 5);
  EXPECT_LT(q.objective, 1e-12);
  const auto cc = complex_constant(gamma08);
  EXPECT_LE(q.objective, objective_q(gamma08, cc.b, cc.c, cc.d));
}

TEST(MinimizeQ, GaussianObstruction)
{
  const auto q = minimize_q(gaussian, 16, 5);
  EXPECT_GT(q.objective, 0.0);
  EXPECT_LE(q.objective, objective_q(gaussian, 1.0, 0.0, 0.0));
  EXPECT_LE(q.objective, grid_min_q(gaussian, 0.05) * 1.01);
}

TEST(MinimizeQ, DeterministicForSeed)
{
  const auto m = lognormal_design(0.8, 7.25).moments();
  const auto x = minimize_q(m, 8, 42), y = minimize_q(m, 8, 42);
  EXPECT_EQ(x.b, y.b);
  EXPECT_EQ(x.c, y.c);
  EXPECT_EQ(x.d, y.d);
  EXPECT_LE(x.objective, grid_min_q(m, 0.05) * 1.01);
}

TEST(ComplexConstant, Shape)
{
  const auto cc = complex_constant(gamma08);
  EXPECT_EQ(cc.method, CoeffMethod::ComplexConstant);
  EXPECT_DOUBLE_EQ(cc.b, 0.5);
  EXPECT_EQ(cc.c, 0.0);
  EXPECT_EQ(cc.d, 0.0);
}

TEST(ZeroMomentCertificate, MonteCarlo)
{
  const auto law = gamma_design(0.8);
  const auto s = find_coefficients(law.moments());
  for (int l = 1; l <= 4; ++l) {
    EXPECT_NEAR(tessarine_real_moments(-law.raw_mean(), s.b, s.c, s.d, law.moments(), l), 0.0,
                1e-8);
    double se = 0.0;
    const double mc =
      mc_tessarine_moment(law, -law.raw_mean(), s.b, s.c, s.d, l, 1000000, &se);
    EXPECT_LT(std::abs(mc), 5 * se) << "l=" << l;
  }
}
