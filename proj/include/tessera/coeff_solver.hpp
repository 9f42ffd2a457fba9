#pragma once

#include "tessera/error_model.hpp"
#include "tessera/hypercomplex.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace tessera {

enum class CoeffMethod
{
  ExactResultant,
  ClosedFormSymmetric,
  MinimizedQ,
  ComplexConstant,
};

std::string to_string(CoeffMethod method);

/// Imaginary part b*i + c*j + d*k of the tessarine shift and how it was found.
struct TessCoefficients
{
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
  CoeffMethod method = CoeffMethod::ExactResultant;
  std::array<double, 3> residuals{}; ///< f1, f2, f3 (unscaled)
  double objective = 0.0;            ///< Q(b, c, d)

  Tessarine imaginary() const { return { 0.0, b, c, d }; }
};

/// f1 = s2 - b^2 + c^2 - d^2, f2 = mu3 - 6bcd,
/// f3 = mu4 - 5 s2^2 - 4{b^2(c^2 - d^2) + c^2 d^2}.
std::array<double, 3> residual_functions(const MomentSet& m, double b, double c, double d);

/// Divisors sigma_u^2, 3 mu_3 and 12 mu_4 of the objective. When mu_3 vanishes
/// (|mu_3| < 1e-10 sigma_u^3) the second divisor becomes 3 sigma_u^3.
std::array<double, 3> residual_scales(const MomentSet& m);

double objective_q(const MomentSet& m, double b, double c, double d);
std::array<double, 3> objective_q_gradient(const MomentSet& m, double b, double c, double d);

/// Re{E(C^l)}, l in 1..4, for the quaternion C = U + a + bi + cj + dk.
double quaternion_real_moments(double a, double b, double c, double d, const MomentSet& m,
                               int order);

/// Re{E(C^l)}, l in 1..4, for the tessarine C = U + a + bi + cj + dk.
double tessarine_real_moments(double a, double b, double c, double d, const MomentSet& m,
                              int order);

/// Real roots of a3 x^3 + a2 x^2 + a1 x + a0 (a3 != 0), ascending, each polished
/// with Newton steps on the original polynomial.
std::vector<double> cubic_real_roots(double a3, double a2, double a1, double a0);

/// Every real solution of the moment system found by the resultant cascade, in
/// the deterministic order ascending |d|, then ascending |c|.
std::vector<TessCoefficients> exact_solutions(const MomentSet& m);

/// First solution of exact_solutions; throws NoRealSolution when there is none.
/// sigma_u^2 = 0 returns (0, 0, 0).
TessCoefficients solve_exact(const MomentSet& m);

/// (b*, c*, 0) for symmetric errors with kurtosis above 5; throws NotApplicable.
TessCoefficients solve_symmetric_closed_form(const MomentSet& m);

struct MinimizeOptions
{
  double gradient_tol = 1e-10;
  long max_iterations = 100000;
};

/// Multi-start gradient descent on Q from `starts` random points in
/// [-3 sigma_u, 3 sigma_u]^3 plus (sigma_u, 0, 0) and, when applicable, the
/// symmetric closed form. Starts run in parallel; the lowest Q wins, ties going
/// to the earliest start.
TessCoefficients minimize_q(const MomentSet& m, int starts, std::uint64_t seed,
                            const MinimizeOptions& options = {});

/// Single gradient-descent run from (b, c, d); exposed for tests.
TessCoefficients descend_q(const MomentSet& m, std::array<double, 3> start,
                           const MinimizeOptions& options = {});

/// (sigma_u, 0, 0): the complex-constant shift.
TessCoefficients complex_constant(const MomentSet& m);

/// solve_exact, then solve_symmetric_closed_form, then minimize_q with 64 starts.
TessCoefficients find_coefficients(const MomentSet& m);

} // namespace tessera
