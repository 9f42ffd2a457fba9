#include "tessera/estimators.hpp"

#include "tessera/parallel.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <exception>
#include <limits>
#include <optional>
#include <random>

namespace tessera {

namespace {

double expit(double x)
{
  if (x >= 0.0)
    return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

bool is_debiased(Variant v) { return v == Variant::Tessarine || v == Variant::ComplexConstant; }

TessCoefficients effective_coefficients(const ScoreSpec& spec)
{
  if (spec.variant == Variant::ComplexConstant)
    return complex_constant(*spec.moments);
  return *spec.coeffs;
}

std::vector<double> normal_draws(std::uint64_t seed, std::size_t index, int count)
{
  auto engine = make_engine(seed, { index });
  std::normal_distribution<double> normal;
  std::vector<double> z(static_cast<std::size_t>(count));
  for (auto& v : z)
    v = normal(engine);
  return z;
}

Eigen::VectorXd linear_score(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                             const Eigen::VectorXd& w)
{
  const auto p = w.size();
  Eigen::VectorXd x = w;
  const bool corrected = is_debiased(spec.variant) || spec.variant == Variant::CorrectedScore;
  if (is_debiased(spec.variant)) {
    if (spec.error_mean.size() == p)
      x -= spec.error_mean;
    else if (spec.moments)
      x.array() -= spec.moments->mean;
  }
  const Eigen::VectorXd beta = theta.tail(p);
  const double resid = y - theta(0) - x.dot(beta);
  Eigen::VectorXd out(p + 1);
  out(0) = resid;
  out.tail(p) = resid * x;
  if (corrected) {
    if (spec.omega.rows() == p)
      out.tail(p) += spec.omega * beta;
    else
      out.tail(p) += spec.moments->variance * beta;
  }
  return out;
}

Eigen::VectorXd polynomial_score(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                                 double w)
{
  const int m = spec.order;
  Eigen::VectorXd out(m + 1);
  if (!is_debiased(spec.variant)) {
    std::vector<double> powers(static_cast<std::size_t>(m + 1), 1.0);
    for (int k = 1; k <= m; ++k)
      powers[k] = powers[k - 1] * w;
    double fitted = 0.0;
    for (int k = 0; k <= m; ++k)
      fitted += theta(k) * powers[k];
    for (int s = 0; s <= m; ++s)
      out(s) = (y - fitted) * powers[s];
    return out;
  }
  const auto co = effective_coefficients(spec);
  const Tessarine t{ w - spec.moments->mean, co.b, co.c, co.d };
  std::vector<double> re(static_cast<std::size_t>(2 * m + 1));
  for (int k = 0; k <= 2 * m; ++k)
    re[k] = tess_real_pow(t, static_cast<unsigned>(k));
  for (int s = 0; s <= m; ++s) {
    double v = y * re[s];
    for (int k = 0; k <= m; ++k)
      v -= re[s + k] * theta(k);
    out(s) = v;
  }
  return out;
}

Eigen::VectorXd poisson_score(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                              double w)
{
  const double b0 = theta(0), b1 = theta(1);
  Eigen::VectorXd out(2);
  switch (spec.variant) {
    case Variant::TrueData:
    case Variant::Naive: {
      const double mu = std::exp(b0 + b1 * w);
      out << y - mu, (y - mu) * w;
      return out;
    }
    case Variant::CorrectedScore: {
      const double s2 = spec.moments->variance;
      const double e = std::exp(b0 + b1 * w - 0.5 * b1 * b1 * s2);
      out << y - e, y * w - e * (w - b1 * s2);
      return out;
    }
    default:
      break;
  }
  // Re{exp(b1 T)} and Re{exp(b1 T) T} from the eigenchannels
  // (w' + c) + i(b + d) and (w' - c) + i(b - d) of T.
  const auto co = effective_coefficients(spec);
  const double x = w - spec.moments->mean;
  const double bp = co.b + co.d, bm = co.b - co.d;
  const double ep = std::exp(b0 + b1 * (x + co.c));
  const double em = std::exp(b0 + b1 * (x - co.c));
  const double cp = std::cos(b1 * bp), sp = std::sin(b1 * bp);
  const double cm = std::cos(b1 * bm), sm = std::sin(b1 * bm);
  const double r1 = 0.5 * (ep * cp + em * cm);
  const double r2 = 0.5 * (ep * ((x + co.c) * cp - bp * sp) + em * ((x - co.c) * cm - bm * sm));
  out << y - r1, y * x - r2;
  return out;
}

Eigen::VectorXd logistic_mc_score(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                                  double w, const std::vector<double>& z)
{
  const double b0 = theta(0), b1 = theta(1);
  const double su = std::sqrt(spec.moments->variance);
  const double eta = b0 + b1 * w;
  // numerator and denominator scaled by exp(-|eta|) to stay finite
  const double e = std::exp(-std::abs(eta));
  const double lead = eta >= 0.0 ? 1.0 : e * e;
  double p = 0.0, q = 0.0;
  for (double zm : z) {
    const double arg = b1 * su * zm;
    const double co = std::cos(arg), si = std::sin(arg);
    const double num = lead + co * e;
    const double den = 1.0 + e * e + 2.0 * co * e;
    if (den == 0.0)
      throw SingularExpit("Monte Carlo corrected score is singular");
    p += num / den;
    q += (num * w - su * zm * si * e) / den;
  }
  const double m = static_cast<double>(z.size());
  Eigen::VectorXd out(2);
  out << y - p / m, y * w - q / m;
  return out;
}

Eigen::VectorXd logistic_score(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                               double w, const std::vector<double>* draws)
{
  const double b0 = theta(0), b1 = theta(1);
  Eigen::VectorXd out(2);
  switch (spec.variant) {
    case Variant::TrueData:
    case Variant::Naive: {
      const double g = expit(b0 + b1 * w);
      out << y - g, (y - g) * w;
      return out;
    }
    case Variant::ConditionalScore: {
      const double s2 = spec.moments->variance;
      const double ws = w + y * s2 * b1;
      const double g = expit(b0 + b1 * ws - 0.5 * b1 * b1 * s2);
      out << y - g, (y - g) * ws;
      return out;
    }
    case Variant::MonteCarloCS:
      return logistic_mc_score(spec, theta, y, w, *draws);
    default:
      break;
  }
  const auto co = effective_coefficients(spec);
  const double x = w - spec.moments->mean;
  const Tessarine t{ x, co.b, co.c, co.d };
  const Tessarine arg{ b0 + b1 * x, b1 * co.b, b1 * co.c, b1 * co.d };
  out << y - expit_real(arg), y * x - expit_mul_real(arg, t);
  return out;
}

Eigen::VectorXd dispatch(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                         const Eigen::VectorXd& w, const std::vector<double>* draws)
{
  switch (spec.model) {
    case Model::Linear:
      return linear_score(spec, theta, y, w);
    case Model::Polynomial:
      return polynomial_score(spec, theta, y, w(0));
    case Model::Poisson:
      return poisson_score(spec, theta, y, w(0));
    case Model::Logistic:
      return logistic_score(spec, theta, y, w(0), draws);
  }
  throw ModelMismatch("unknown model");
}

bool finite(const Eigen::VectorXd& v) { return v.allFinite(); }

} // namespace

std::string to_string(Model model)
{
  switch (model) {
    case Model::Linear:
      return "linear";
    case Model::Polynomial:
      return "polynomial";
    case Model::Poisson:
      return "poisson";
    case Model::Logistic:
      return "logistic";
  }
  return "linear";
}

std::string to_string(Variant variant)
{
  switch (variant) {
    case Variant::TrueData:
      return "true";
    case Variant::Naive:
      return "naive";
    case Variant::ComplexConstant:
      return "cc";
    case Variant::Tessarine:
      return "tc";
    case Variant::CorrectedScore:
      return "cs";
    case Variant::MonteCarloCS:
      return "mc";
    case Variant::ConditionalScore:
      return "cd";
  }
  return "naive";
}

Model model_from_string(const std::string& name)
{
  if (name == "linear")
    return Model::Linear;
  if (name == "polynomial")
    return Model::Polynomial;
  if (name == "poisson")
    return Model::Poisson;
  if (name == "logistic")
    return Model::Logistic;
  throw ConfigError("unknown model '" + name + "'");
}

Variant variant_from_string(const std::string& name)
{
  for (auto v : { Variant::TrueData, Variant::Naive, Variant::ComplexConstant, Variant::Tessarine,
                  Variant::CorrectedScore, Variant::MonteCarloCS, Variant::ConditionalScore })
    if (to_string(v) == name)
      return v;
  throw ConfigError("unknown estimator variant '" + name + "'");
}

RegressionData RegressionData::scalar(const std::vector<double>& y, const std::vector<double>& w)
{
  if (y.size() != w.size())
    throw DomainError("responses and covariates differ in length");
  RegressionData data;
  data.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  data.w = Eigen::Map<const Eigen::MatrixXd>(w.data(), static_cast<Eigen::Index>(w.size()), 1);
  return data;
}

int ScoreSpec::dimension() const
{
  switch (model) {
    case Model::Linear:
    case Model::Polynomial:
      return order + 1;
    default:
      return 2;
  }
}

void ScoreSpec::validate() const
{
  if ((model == Model::Linear || model == Model::Polynomial) && order < 1)
    throw DomainError("model order must be at least 1");
  bool supported = variant == Variant::TrueData || variant == Variant::Naive ||
                   variant == Variant::Tessarine || variant == Variant::ComplexConstant;
  switch (model) {
    case Model::Linear:
      supported = supported || variant == Variant::CorrectedScore;
      break;
    case Model::Polynomial:
      break;
    case Model::Poisson:
      supported = supported || variant == Variant::CorrectedScore;
      break;
    case Model::Logistic:
      supported =
        supported || variant == Variant::MonteCarloCS || variant == Variant::ConditionalScore;
      break;
  }
  if (!supported)
    throw ModelMismatch("variant " + to_string(variant) + " is not available for the " +
                        to_string(model) + " model");
  if (variant == Variant::TrueData || variant == Variant::Naive)
    return;
  if (model == Model::Linear && order > 1) {
    if (omega.rows() != order || omega.cols() != order)
      throw DomainError("the multivariate linear model needs an m x m error covariance");
    return;
  }
  if (!moments)
    throw DomainError("variant " + to_string(variant) + " needs the error moments");
  if (variant == Variant::Tessarine && model != Model::Linear && !coeffs)
    throw DomainError("the tessarine variant needs coefficients (b, c, d)");
  if (variant == Variant::MonteCarloCS && mc_draws < 1)
    throw DomainError("the Monte Carlo corrected score needs at least one draw");
}

Eigen::VectorXd score_eval(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                           const Eigen::VectorXd& w, std::size_t index)
{
  spec.validate();
  if (spec.variant == Variant::MonteCarloCS) {
    const auto z = normal_draws(spec.seed, index, spec.mc_draws);
    return dispatch(spec, theta, y, w, &z);
  }
  return dispatch(spec, theta, y, w, nullptr);
}

Eigen::VectorXd score_eval(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                           double w, std::size_t index)
{
  return score_eval(spec, theta, y, Eigen::VectorXd::Constant(1, w), index);
}

ModelScore::ModelScore(ScoreSpec spec, const RegressionData& data)
  : spec_(std::move(spec))
  , data_(data)
{
  spec_.validate();
  if (data_.y.size() != data_.w.rows())
    throw DomainError("responses and covariates differ in length");
  const auto need = spec_.model == Model::Linear ? spec_.order : 1;
  if (data_.w.cols() != need)
    throw DomainError("covariate matrix has the wrong number of columns");
  if (spec_.variant == Variant::MonteCarloCS) {
    draws_.resize(data_.size());
    for (std::size_t r = 0; r < data_.size(); ++r)
      draws_[r] = normal_draws(spec_.seed, r, spec_.mc_draws);
  }
}

Eigen::VectorXd ModelScore::score(std::size_t r, const Eigen::VectorXd& theta) const
{
  const auto i = static_cast<Eigen::Index>(r);
  const Eigen::VectorXd w = data_.w.row(i).transpose();
  return dispatch(spec_, theta, data_.y(i), w, draws_.empty() ? nullptr : &draws_[r]);
}

Eigen::VectorXd mean_score_serial(const EstimatingFunction& fn, const Eigen::VectorXd& theta)
{
  Eigen::VectorXd total = Eigen::VectorXd::Zero(fn.dimension());
  for (std::size_t r = 0; r < fn.size(); ++r)
    total += fn.score(r, theta);
  return total / static_cast<double>(fn.size());
}

Eigen::VectorXd mean_score(const EstimatingFunction& fn, const Eigen::VectorXd& theta)
{
  const std::size_t n = fn.size();
  Eigen::MatrixXd slots(fn.dimension(), static_cast<Eigen::Index>(n));
  std::exception_ptr failure;
  parallel_for(n, [&](std::size_t r) {
    try {
      slots.col(static_cast<Eigen::Index>(r)) = fn.score(r, theta);
    } catch (...) {
#pragma omp critical(tessera_mean_score)
      if (!failure)
        failure = std::current_exception();
    }
  });
  if (failure)
    std::rethrow_exception(failure);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(fn.dimension());
  for (std::size_t r = 0; r < n; ++r)
    total += slots.col(static_cast<Eigen::Index>(r));
  return total / static_cast<double>(n);
}

Eigen::MatrixXd mean_score_jacobian(const EstimatingFunction& fn, const Eigen::VectorXd& theta)
{
  const int p = fn.dimension();
  Eigen::MatrixXd jac(p, p);
  for (int j = 0; j < p; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(theta(j)));
    Eigen::VectorXd up = theta, down = theta;
    up(j) += h;
    down(j) -= h;
    jac.col(j) = (mean_score(fn, up) - mean_score(fn, down)) / (up(j) - down(j));
  }
  return jac;
}

namespace {

Eigen::MatrixXd checked_inverse(const Eigen::MatrixXd& a, double max_condition)
{
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double smax = sv(0), smin = sv(sv.size() - 1);
  if (!(smin > 0.0) || !std::isfinite(smax) || smax / smin > max_condition)
    throw SingularJacobian("score Jacobian is singular or ill-conditioned");
  return svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

// Chord steps with the last Jacobian; each is kept only if it halves the norm.
void polish(const EstimatingFunction& fn, const Eigen::MatrixXd& jac, double max_condition,
            FitResult& result, Eigen::VectorXd& s)
{
  const Eigen::MatrixXd inverse = checked_inverse(jac, max_condition);
  for (int k = 0; k < 3; ++k) {
    const Eigen::VectorXd candidate = result.theta - inverse * s;
    Eigen::VectorXd cs;
    try {
      cs = mean_score(fn, candidate);
    } catch (const SingularExpit&) {
      return;
    }
    if (!finite(cs) || !(cs.norm() <= 0.5 * result.score_norm))
      return;
    result.theta = candidate;
    s = cs;
    result.score_norm = cs.norm();
  }
}

} // namespace

FitResult solve_estimating_equation(const EstimatingFunction& fn, Eigen::VectorXd init,
                                    const SolverOptions& options)
{
  if (init.size() != fn.dimension())
    throw DomainError("initial value has the wrong dimension");
  FitResult result;
  result.theta = std::move(init);
  Eigen::VectorXd s;
  try {
    s = mean_score(fn, result.theta);
  } catch (const SingularExpit&) {
    result.score_norm = std::numeric_limits<double>::infinity();
    throw NonConvergence(result, "score is singular at the initial value");
  }
  result.score_norm = s.norm();
  if (!std::isfinite(result.score_norm))
    throw NonConvergence(result, "score is not finite at the initial value");

  Eigen::MatrixXd jac;
  for (int it = 0; it <= options.max_iterations; ++it) {
    result.iterations = it;
    if (result.score_norm < options.tolerance * (1.0 + result.theta.norm())) {
      result.converged = true;
      if (jac.size() > 0)
        polish(fn, jac, options.max_condition, result, s);
      return result;
    }
    if (it == options.max_iterations)
      break;
    try {
      jac = mean_score_jacobian(fn, result.theta);
    } catch (const SingularExpit&) {
      throw NonConvergence(result, "score is singular next to the current iterate");
    }
    const Eigen::VectorXd step = -checked_inverse(jac, options.max_condition) * s;
    bool accepted = false;
    double alpha = 1.0;
    for (int halving = 0; halving < 40 && !accepted; ++halving, alpha *= 0.5) {
      const Eigen::VectorXd candidate = result.theta + alpha * step;
      Eigen::VectorXd cs;
      try {
        cs = mean_score(fn, candidate);
      } catch (const SingularExpit&) {
        continue;
      }
      if (!finite(cs) || !(cs.norm() < result.score_norm))
        continue;
      result.theta = candidate;
      s = cs;
      result.score_norm = cs.norm();
      accepted = true;
    }
    if (!accepted)
      break;
  }
  throw NonConvergence(result, "estimating equation did not converge");
}

Eigen::MatrixXd sandwich_covariance(const EstimatingFunction& fn, const Eigen::VectorXd& theta,
                                    double max_condition)
{
  const int p = fn.dimension();
  const std::size_t n = fn.size();
  const Eigen::MatrixXd a_inv = checked_inverse(mean_score_jacobian(fn, theta), max_condition);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(p, p);
  for (std::size_t r = 0; r < n; ++r) {
    const Eigen::VectorXd s = fn.score(r, theta);
    b += s * s.transpose();
  }
  b /= static_cast<double>(n);
  return a_inv * b * a_inv.transpose() / static_cast<double>(n);
}

Eigen::VectorXd sandwich_se(const EstimatingFunction& fn, const Eigen::VectorXd& theta)
{
  return sandwich_covariance(fn, theta).diagonal().cwiseSqrt();
}

Eigen::VectorXd sandwich_se(const ScoreSpec& spec, const RegressionData& data,
                            const Eigen::VectorXd& theta)
{
  return sandwich_se(ModelScore(spec, data), theta);
}

FitResult minimize_score_norm(const EstimatingFunction& fn, Eigen::VectorXd init,
                              int max_iterations, double tolerance)
{
  FitResult result;
  result.theta = std::move(init);
  Eigen::VectorXd s = mean_score(fn, result.theta);
  result.score_norm = s.norm();
  if (!std::isfinite(result.score_norm))
    return result;
  const int p = fn.dimension();
  double mu = -1.0;
  for (int it = 0; it < max_iterations; ++it) {
    result.iterations = it;
    if (result.score_norm < tolerance * (1.0 + result.theta.norm())) {
      result.converged = true;
      return result;
    }
    Eigen::MatrixXd jac;
    try {
      jac = mean_score_jacobian(fn, result.theta);
    } catch (const SingularExpit&) {
      return result;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd grad = jac.transpose() * s;
    if (mu < 0.0)
      mu = 1e-3 * jtj.diagonal().maxCoeff();
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      const Eigen::MatrixXd lhs = jtj + mu * Eigen::MatrixXd::Identity(p, p);
      const Eigen::VectorXd step = -lhs.ldlt().solve(grad);
      if (!finite(step) || step.norm() < 1e-14 * (1.0 + result.theta.norm()))
        return result;
      Eigen::VectorXd cs;
      try {
        cs = mean_score(fn, result.theta + step);
      } catch (const SingularExpit&) {
        mu *= 4.0;
        continue;
      }
      if (finite(cs) && cs.norm() < result.score_norm) {
        result.theta += step;
        s = cs;
        result.score_norm = cs.norm();
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted)
      return result;
  }
  return result;
}

double mean_score_standard_error(const EstimatingFunction& fn, const Eigen::VectorXd& theta)
{
  const std::size_t n = fn.size();
  double total = 0.0;
  for (std::size_t r = 0; r < n; ++r)
    total += fn.score(r, theta).squaredNorm();
  return std::sqrt(total / static_cast<double>(n) / static_cast<double>(n));
}

FitResult mestimate(const ScoreSpec& spec, const RegressionData& data,
                    const Eigen::VectorXd& init, const SolverOptions& options)
{
  const ModelScore fn(spec, data);
  FitResult fit;
  std::optional<FitResult> best;
  const auto keep = [&best](const FitResult& r) {
    if (std::isfinite(r.score_norm) && (!best || r.score_norm < best->score_norm))
      best = r;
  };
  const auto attempt = [&](const EstimatingFunction& f, const Eigen::VectorXd& start,
                           bool record) -> std::optional<FitResult> {
    try {
      return solve_estimating_equation(f, start, options);
    } catch (const NonConvergence& e) {
      if (record)
        keep(e.best());
    } catch (const SingularJacobian&) {
    }
    return std::nullopt;
  };

  std::exception_ptr first_error;
  std::optional<FitResult> found;
  try {
    found = solve_estimating_equation(fn, init, options);
  } catch (const NonConvergence& e) {
    keep(e.best());
    first_error = std::current_exception();
  } catch (const SingularJacobian&) {
    first_error = std::current_exception();
  }
  const bool nonlinear = spec.model == Model::Poisson || spec.model == Model::Logistic;
  if (!found && is_debiased(spec.variant) && nonlinear) {
    // second start: the naive fit on the mean-shifted covariate
    RegressionData shifted = data;
    shifted.w.array() -= spec.moments->mean;
    ScoreSpec naive = spec;
    naive.variant = Variant::Naive;
    if (const auto start = attempt(ModelScore(naive, shifted), init, false))
      found = attempt(fn, start->theta, true);
  }
  if (!found && options.approximate_roots && nonlinear && best) {
    auto lm = minimize_score_norm(fn, best->theta, 100, options.tolerance);
    if (lm.converged) {
      found = lm;
    } else if (std::isfinite(lm.score_norm) &&
               lm.score_norm <= mean_score_standard_error(fn, lm.theta)) {
      lm.converged = true;
      lm.approximate = true;
      found = lm;
    } else {
      keep(lm);
    }
  }
  if (!found) {
    if (best)
      throw NonConvergence(*best, "estimating equation has no root near the start");
    std::rethrow_exception(first_error);
  }
  fit = *found;
  if (options.standard_errors)
    fit.se = sandwich_se(fn, fit.theta);
  return fit;
}

double pointwise_estimate(const std::function<Complex(Complex)>& f, double w,
                          const PointwiseOptions& options)
{
  const auto& m = options.moments;
  switch (options.variant) {
    case PointwiseVariant::Naive:
      return f(Complex(w, 0.0)).real();
    case PointwiseVariant::MonteCarlo: {
      Engine engine(options.seed);
      std::normal_distribution<double> normal(0.0, m.sd());
      double total = 0.0;
      for (int k = 0; k < options.draws; ++k)
        total += f(Complex(w, normal(engine))).real();
      return total / options.draws;
    }
    case PointwiseVariant::ProperComplex: {
      Engine engine(options.seed);
      const double centre = options.law.raw_mean();
      double total = 0.0;
      for (int k = 0; k < options.draws; ++k) {
        const double v = options.law.sample_raw(engine) - centre;
        total += f(Complex(w - m.mean, v)).real();
      }
      return total / options.draws;
    }
    case PointwiseVariant::ComplexConstant:
      return f(Complex(w - m.mean, m.sd())).real();
    case PointwiseVariant::Tessarine: {
      const auto& co = options.coeffs;
      return tess_apply(f, Tessarine{ w - m.mean, co.b, co.c, co.d }).a;
    }
  }
  throw DomainError("unknown pointwise variant");
}

} // namespace tessera
