#include "tessera/coeff_solver.hpp"

#include "tessera/errors.hpp"
#include "tessera/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace tessera {

namespace {

constexpr double kExactTol = 1e-8;
constexpr std::uint64_t kFindSeed = 0x7e55a21e5ULL;

bool is_symmetric(const MomentSet& m)
{
  return std::abs(m.mu3) < 1e-10 * std::pow(m.variance, 1.5);
}

// E{(U + a)^k} for k = 1..4 from the moments, with delta = E(U) + a.
std::array<double, 4> shifted_raw_moments(double a, const MomentSet& m)
{
  const double dl = m.mean + a;
  const double s2 = m.variance;
  return {
    dl,
    s2 + dl * dl,
    m.mu3 + 3.0 * s2 * dl + dl * dl * dl,
    m.mu4 + 4.0 * m.mu3 * dl + 6.0 * s2 * dl * dl + dl * dl * dl * dl,
  };
}

bool passes(const MomentSet& m, const std::array<double, 3>& f)
{
  const auto s = residual_scales(m);
  for (int i = 0; i < 3; ++i)
    if (!(std::abs(f[i] / s[i]) < kExactTol))
      return false;
  return true;
}

double scaled_norm(const MomentSet& m, const std::array<double, 3>& f)
{
  const auto s = residual_scales(m);
  return std::hypot(f[0] / s[0], f[1] / s[1], f[2] / s[2]);
}

// A few Newton steps on the full system; kept only while they help.
void polish(const MomentSet& m, double& b, double& c, double& d)
{
  for (int step = 0; step < 4; ++step) {
    const auto f = residual_functions(m, b, c, d);
    const double before = scaled_norm(m, f);
    if (before == 0.0)
      return;
    const double J[3][3] = {
      { -2.0 * b, 2.0 * c, -2.0 * d },
      { -6.0 * c * d, -6.0 * b * d, -6.0 * b * c },
      { -8.0 * b * (c * c - d * d), -8.0 * c * (b * b + d * d), -8.0 * d * (c * c - b * b) },
    };
    const double det = J[0][0] * (J[1][1] * J[2][2] - J[1][2] * J[2][1]) -
                       J[0][1] * (J[1][0] * J[2][2] - J[1][2] * J[2][0]) +
                       J[0][2] * (J[1][0] * J[2][1] - J[1][1] * J[2][0]);
    const double jscale = std::max({ std::abs(b), std::abs(c), std::abs(d), 1e-300 });
    if (std::abs(det) < 1e-10 * std::pow(jscale, 6))
      return;
    // Cramer's rule for J * delta = -f
    double delta[3];
    for (int k = 0; k < 3; ++k) {
      double M[3][3];
      for (int r = 0; r < 3; ++r)
        for (int col = 0; col < 3; ++col)
          M[r][col] = col == k ? -f[r] : J[r][col];
      delta[k] = (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1]) -
                  M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0]) +
                  M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0])) /
                 det;
    }
    const double nb = b + delta[0], nc = c + delta[1], nd = d + delta[2];
    if (scaled_norm(m, residual_functions(m, nb, nc, nd)) >= before)
      return;
    b = nb;
    c = nc;
    d = nd;
  }
}

TessCoefficients make_coefficients(const MomentSet& m, double b, double c, double d,
                                   CoeffMethod method)
{
  TessCoefficients out;
  out.b = b;
  out.c = c;
  out.d = d;
  out.method = method;
  out.residuals = residual_functions(m, b, c, d);
  out.objective = objective_q(m, b, c, d);
  return out;
}

double poly(double a3, double a2, double a1, double a0, double x)
{
  return ((a3 * x + a2) * x + a1) * x + a0;
}

} // namespace

std::string to_string(CoeffMethod method)
{
  switch (method) {
    case CoeffMethod::ExactResultant:
      return "ExactResultant";
    case CoeffMethod::ClosedFormSymmetric:
      return "ClosedFormSymmetric";
    case CoeffMethod::MinimizedQ:
      return "MinimizedQ";
    case CoeffMethod::ComplexConstant:
      return "ComplexConstant";
  }
  return "ExactResultant";
}

std::array<double, 3> residual_functions(const MomentSet& m, double b, double c, double d)
{
  const double s2 = m.variance;
  const double b2 = b * b, c2 = c * c, d2 = d * d;
  return {
    s2 - b2 + c2 - d2,
    m.mu3 - 6.0 * b * c * d,
    m.mu4 - 5.0 * s2 * s2 - 4.0 * (b2 * (c2 - d2) + c2 * d2),
  };
}

std::array<double, 3> residual_scales(const MomentSet& m)
{
  const double s2 = m.variance;
  const double third = is_symmetric(m) ? 3.0 * std::pow(s2, 1.5) : 3.0 * m.mu3;
  return { s2, third, 12.0 * m.mu4 };
}

double objective_q(const MomentSet& m, double b, double c, double d)
{
  const auto f = residual_functions(m, b, c, d);
  const auto s = residual_scales(m);
  const double r0 = f[0] / s[0], r1 = f[1] / s[1], r2 = f[2] / s[2];
  return r0 * r0 + r1 * r1 + r2 * r2;
}

std::array<double, 3> objective_q_gradient(const MomentSet& m, double b, double c, double d)
{
  const auto f = residual_functions(m, b, c, d);
  const auto s = residual_scales(m);
  const double w0 = 2.0 * f[0] / (s[0] * s[0]);
  const double w1 = 2.0 * f[1] / (s[1] * s[1]);
  const double w2 = 2.0 * f[2] / (s[2] * s[2]);
  const double b2 = b * b, c2 = c * c, d2 = d * d;
  return {
    w0 * (-2.0 * b) + w1 * (-6.0 * c * d) + w2 * (-8.0 * b * (c2 - d2)),
    w0 * (2.0 * c) + w1 * (-6.0 * b * d) + w2 * (-8.0 * c * (b2 + d2)),
    w0 * (-2.0 * d) + w1 * (-6.0 * b * c) + w2 * (-8.0 * d * (c2 - b2)),
  };
}

double quaternion_real_moments(double a, double b, double c, double d, const MomentSet& m,
                               int order)
{
  const auto e = shifted_raw_moments(a, m);
  const double r = b * b + c * c + d * d;
  switch (order) {
    case 1:
      return e[0];
    case 2:
      return e[1] - r;
    case 3:
      return e[2] - 3.0 * r * e[0];
    case 4:
      return e[3] - 6.0 * r * e[1] + r * r;
    default:
      throw DomainError("real moments are available for orders 1 to 4");
  }
}

double tessarine_real_moments(double a, double b, double c, double d, const MomentSet& m,
                              int order)
{
  const auto e = shifted_raw_moments(a, m);
  const double b2 = b * b, c2 = c * c, d2 = d * d;
  const double rho = b2 - c2 + d2;
  const double bcd = b * c * d;
  switch (order) {
    case 1:
      return e[0];
    case 2:
      return e[1] - rho;
    case 3:
      return e[2] - 3.0 * rho * e[0] - 6.0 * bcd;
    case 4:
      return e[3] - 6.0 * rho * e[1] - 24.0 * bcd * e[0] + rho * rho -
             4.0 * (b2 * (c2 - d2) + c2 * d2);
    default:
      throw DomainError("real moments are available for orders 1 to 4");
  }
}

std::vector<double> cubic_real_roots(double a3, double a2, double a1, double a0)
{
  if (a3 == 0.0)
    throw DomainError("leading cubic coefficient is zero");
  const double B = a2 / a3, C = a1 / a3, D = a0 / a3;
  // depressed cubic t^3 + p t + q with x = t - B/3
  const double p = C - B * B / 3.0;
  const double q = 2.0 * B * B * B / 27.0 - B * C / 3.0 + D;
  const double shift = -B / 3.0;
  std::vector<double> roots;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (p == 0.0 && q == 0.0) {
    roots.push_back(shift);
  } else if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    roots.push_back(std::cbrt(-0.5 * q + sq) + std::cbrt(-0.5 * q - sq) + shift);
  } else {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double phi = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k)
      roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
  }
  for (auto& x : roots) {
    for (int it = 0; it < 5; ++it) {
      const double fx = poly(a3, a2, a1, a0, x);
      const double dfx = (3.0 * a3 * x + 2.0 * a2) * x + a1;
      if (dfx == 0.0)
        break;
      const double next = x - fx / dfx;
      if (std::abs(poly(a3, a2, a1, a0, next)) > std::abs(fx))
        break;
      x = next;
    }
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::vector<TessCoefficients> exact_solutions(const MomentSet& m)
{
  const double s2 = m.variance;
  if (s2 == 0.0)
    return { make_coefficients(m, 0.0, 0.0, 0.0, CoeffMethod::ExactResultant) };
  if (!(s2 > 0.0))
    throw DomainError("variance must be nonnegative");

  const double m3 = m.mu3, m4 = m.mu4;
  const double tiny = 1e-12 * s2;
  const bool symmetric = is_symmetric(m);

  struct Candidate
  {
    double b, c, d;
  };
  std::vector<Candidate> candidates;
  const auto add = [&](double x, double y) {
    const double b2 = s2 + y - x;
    if (b2 < -tiny)
      return;
    const double b = std::sqrt(std::max(b2, 0.0));
    const double c = std::sqrt(std::max(y, 0.0));
    double d = std::sqrt(std::max(x, 0.0));
    if (m3 < 0.0 && !symmetric)
      d = -d;
    candidates.push_back({ b, c, d });
  };

  // d^2 solves 36x^3 - 36 s2 x^2 + 9(5 s2^2 - mu4) x + mu3^2 = 0
  for (double x : cubic_real_roots(36.0, -36.0 * s2, 9.0 * (5.0 * s2 * s2 - m4), m3 * m3)) {
    if (x < -tiny)
      continue;
    if (x <= tiny) {
      // d = 0: f2 forces mu3 = 0 and f3 gives 4 (s2 + c^2) c^2 = mu4 - 5 s2^2
      if (!symmetric)
        continue;
      const double inner = m4 - 4.0 * s2 * s2;
      if (inner < 0.0)
        continue;
      add(0.0, 0.5 * (std::sqrt(inner) - s2));
      continue;
    }
    // c^2 solves 36x y^2 - 36x(x - s2) y - mu3^2 = 0
    const double half = 0.5 * (x - s2);
    const double rad = std::sqrt(half * half + m3 * m3 / (36.0 * x));
    for (double y : { half + rad, half - rad })
      if (y >= -tiny)
        add(x, y);
  }

  std::vector<TessCoefficients> out;
  for (auto cand : candidates) {
    polish(m, cand.b, cand.c, cand.d);
    const auto f = residual_functions(m, cand.b, cand.c, cand.d);
    if (!passes(m, f))
      continue;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const TessCoefficients& o) {
      return std::abs(std::abs(o.b) - std::abs(cand.b)) < 1e-9 &&
             std::abs(std::abs(o.c) - std::abs(cand.c)) < 1e-9 &&
             std::abs(std::abs(o.d) - std::abs(cand.d)) < 1e-9;
    });
    if (!duplicate)
      out.push_back(make_coefficients(m, cand.b, cand.c, cand.d, CoeffMethod::ExactResultant));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    if (std::abs(x.d) != std::abs(y.d))
      return std::abs(x.d) < std::abs(y.d);
    return std::abs(x.c) < std::abs(y.c);
  });
  return out;
}

TessCoefficients solve_exact(const MomentSet& m)
{
  auto all = exact_solutions(m);
  if (all.empty())
    throw NoRealSolution("the moment system has no real solution");
  return all.front();
}

TessCoefficients solve_symmetric_closed_form(const MomentSet& m)
{
  const double s2 = m.variance;
  if (!(s2 > 0.0) || !is_symmetric(m) || !(m.mu4 > 5.0 * s2 * s2))
    throw NotApplicable("closed form needs a symmetric error with kurtosis above 5");
  const double b = std::sqrt(s2 + std::sqrt(m.mu4 - 4.0 * s2 * s2)) / std::numbers::sqrt2;
  const double c = std::sqrt(std::max(b * b - s2, 0.0));
  return make_coefficients(m, b, c, 0.0, CoeffMethod::ClosedFormSymmetric);
}

TessCoefficients descend_q(const MomentSet& m, std::array<double, 3> x,
                           const MinimizeOptions& options)
{
  double q = objective_q(m, x[0], x[1], x[2]);
  auto g = objective_q_gradient(m, x[0], x[1], x[2]);
  double alpha = 1e-2 * m.variance;
  std::array<double, 3> prev_x{}, prev_g{};
  bool have_prev = false;

  for (long it = 0; it < options.max_iterations; ++it) {
    const double gnorm2 = g[0] * g[0] + g[1] * g[1] + g[2] * g[2];
    if (std::sqrt(gnorm2) < options.gradient_tol)
      break;
    // Barzilai-Borwein trial step, then halve until the Armijo condition holds.
    double trial = 2.0 * alpha;
    if (have_prev) {
      double sy = 0.0, ss = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double s = x[k] - prev_x[k];
        sy += s * (g[k] - prev_g[k]);
        ss += s * s;
      }
      if (sy > 0.0)
        trial = ss / sy;
    }
    std::array<double, 3> next{};
    double qn = q;
    bool accepted = false;
    for (int halving = 0; halving < 80; ++halving) {
      for (int k = 0; k < 3; ++k)
        next[k] = x[k] - trial * g[k];
      qn = objective_q(m, next[0], next[1], next[2]);
      if (qn <= q - 1e-4 * trial * gnorm2) {
        accepted = true;
        break;
      }
      trial *= 0.5;
    }
    if (!accepted)
      break;
    prev_x = x;
    prev_g = g;
    have_prev = true;
    x = next;
    q = qn;
    alpha = trial;
    g = objective_q_gradient(m, x[0], x[1], x[2]);
  }
  return make_coefficients(m, x[0], x[1], x[2], CoeffMethod::MinimizedQ);
}

TessCoefficients minimize_q(const MomentSet& m, int starts, std::uint64_t seed,
                            const MinimizeOptions& options)
{
  if (!(m.variance > 0.0))
    throw DomainError("minimize_q needs a positive variance");
  const double sd = m.sd();
  std::vector<std::array<double, 3>> points;
  points.push_back({ sd, 0.0, 0.0 });
  try {
    const auto sym = solve_symmetric_closed_form(m);
    points.push_back({ sym.b, sym.c, sym.d });
  } catch (const NotApplicable&) {
  }
  Engine engine(seed);
  std::uniform_real_distribution<double> box(-3.0 * sd, 3.0 * sd);
  for (int s = 0; s < starts; ++s) {
    const double b = box(engine);
    const double c = box(engine);
    const double d = box(engine);
    points.push_back({ b, c, d });
  }

  std::vector<TessCoefficients> results(points.size());
  parallel_for(points.size(), [&](std::size_t i) { results[i] = descend_q(m, points[i], options); });

  std::size_t best = 0;
  for (std::size_t i = 1; i < results.size(); ++i)
    if (results[i].objective < results[best].objective)
      best = i;
  return results[best];
}

TessCoefficients complex_constant(const MomentSet& m)
{
  return make_coefficients(m, m.sd(), 0.0, 0.0, CoeffMethod::ComplexConstant);
}

TessCoefficients find_coefficients(const MomentSet& m)
{
  try {
    return solve_exact(m);
  } catch (const NoRealSolution&) {
  }
  try {
    return solve_symmetric_closed_form(m);
  } catch (const NotApplicable&) {
  }
  return minimize_q(m, 64, kFindSeed);
}

} // namespace tessera
