#pragma once

#include "tessera/coeff_solver.hpp"
#include "tessera/error_model.hpp"
#include "tessera/errors.hpp"
#include "tessera/hypercomplex.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tessera {

enum class Model
{
  Linear,     ///< y = b0 + x'b + e, x of dimension m
  Polynomial, ///< y = sum_k theta_k x^k, k = 0..m
  Poisson,    ///< y ~ Poisson(exp(b0 + b1 x))
  Logistic,   ///< y ~ Bernoulli(expit(b0 + b1 x))
};

enum class Variant
{
  TrueData,
  Naive,
  ComplexConstant, ///< tessarine score with (b, c, d) = (sigma_u, 0, 0)
  Tessarine,
  CorrectedScore,  ///< Gaussian-error corrected score
  MonteCarloCS,
  ConditionalScore,
};

std::string to_string(Model model);
std::string to_string(Variant variant);
Model model_from_string(const std::string& name);
Variant variant_from_string(const std::string& name);

/// Responses and a covariate matrix with one row per observation.
struct RegressionData
{
  Eigen::VectorXd y;
  Eigen::MatrixXd w;

  std::size_t size() const { return static_cast<std::size_t>(y.size()); }

  static RegressionData scalar(const std::vector<double>& y, const std::vector<double>& w);
};

struct ScoreSpec
{
  Model model = Model::Linear;
  Variant variant = Variant::Naive;
  /// Covariate dimension for Linear, degree for Polynomial; ignored otherwise.
  int order = 1;
  std::optional<TessCoefficients> coeffs;
  std::optional<MomentSet> moments;
  /// Error covariance for the multivariate linear model. When empty a scalar
  /// model uses moments->variance.
  Eigen::MatrixXd omega;
  /// Error mean for the multivariate linear model; defaults to moments->mean.
  Eigen::VectorXd error_mean;
  int mc_draws = 500;
  std::uint64_t seed = 0;

  /// Length of the parameter vector.
  int dimension() const;
  /// Throws ModelMismatch for unsupported model/variant pairs and DomainError
  /// when required inputs are missing.
  void validate() const;
};

/// Score of one observation. `index` selects the Monte Carlo stream for the
/// mc variant and is ignored otherwise.
Eigen::VectorXd score_eval(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                           const Eigen::VectorXd& w, std::size_t index = 0);
Eigen::VectorXd score_eval(const ScoreSpec& spec, const Eigen::VectorXd& theta, double y,
                           double w, std::size_t index = 0);

/// A family of per-observation estimating functions psi_r(theta), r < size().
class EstimatingFunction
{
public:
  virtual ~EstimatingFunction() = default;
  virtual std::size_t size() const = 0;
  virtual int dimension() const = 0;
  virtual Eigen::VectorXd score(std::size_t r, const Eigen::VectorXd& theta) const = 0;
};

/// A ScoreSpec bound to a dataset. Monte Carlo draws are generated once.
class ModelScore : public EstimatingFunction
{
public:
  ModelScore(ScoreSpec spec, const RegressionData& data);

  std::size_t size() const override { return data_.size(); }
  int dimension() const override { return spec_.dimension(); }
  Eigen::VectorXd score(std::size_t r, const Eigen::VectorXd& theta) const override;

  const ScoreSpec& spec() const { return spec_; }

private:
  ScoreSpec spec_;
  const RegressionData& data_;
  std::vector<std::vector<double>> draws_;
};

/// Mean of psi_r(theta) over r. The parallel kernel writes each observation's
/// score into its own slot and sums the slots in index order, so it agrees
/// bitwise with the serial one.
Eigen::VectorXd mean_score(const EstimatingFunction& fn, const Eigen::VectorXd& theta);
Eigen::VectorXd mean_score_serial(const EstimatingFunction& fn, const Eigen::VectorXd& theta);

/// Central-difference Jacobian of mean_score, step 1e-6 (1 + |theta_j|).
Eigen::MatrixXd mean_score_jacobian(const EstimatingFunction& fn, const Eigen::VectorXd& theta);

struct FitResult
{
  Eigen::VectorXd theta;
  Eigen::VectorXd se;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;
  /// Set when no exact root was found and theta minimizes |mean score| with a
  /// residual inside one standard error of the mean score (see mestimate).
  bool approximate = false;
};

class NonConvergence : public Error
{
public:
  NonConvergence(FitResult best, const std::string& what)
    : Error(what)
    , best_(std::move(best))
  {
  }
  const FitResult& best() const noexcept { return best_; }

private:
  FitResult best_;
};

struct SolverOptions
{
  int max_iterations = 200;
  double tolerance = 1e-8;
  double max_condition = 1e12;
  /// mestimate attaches sandwich standard errors when set.
  bool standard_errors = true;
  /// mestimate falls back to a least-squares minimizer of the mean score for
  /// the Poisson and logistic models when Newton finds no root.
  bool approximate_roots = true;
};

/// Levenberg-Marquardt on |mean score|^2 from init. Returns the best point
/// reached; converged is set when the score norm meets the tolerance.
FitResult minimize_score_norm(const EstimatingFunction& fn, Eigen::VectorXd init,
                              int max_iterations = 100, double tolerance = 1e-8);

/// sqrt(trace(B) / n), B the mean outer product of the scores at theta: the
/// standard error of the mean score's norm.
double mean_score_standard_error(const EstimatingFunction& fn, const Eigen::VectorXd& theta);

/// Damped Newton iteration on the mean score. Standard errors are left empty.
FitResult solve_estimating_equation(const EstimatingFunction& fn, Eigen::VectorXd init,
                                    const SolverOptions& options = {});

/// Fits the model and attaches sandwich standard errors. A Tessarine or
/// ComplexConstant fit that fails from `init` is retried from the naive fit.
/// For Poisson and logistic models, when no exact root is found, the
/// minimizer of |mean score| is accepted (approximate = true) if its residual
/// is at most mean_score_standard_error; otherwise NonConvergence.
FitResult mestimate(const ScoreSpec& spec, const RegressionData& data,
                    const Eigen::VectorXd& init, const SolverOptions& options = {});

/// Sandwich covariance A^{-1} B A^{-T} / n at theta.
Eigen::MatrixXd sandwich_covariance(const EstimatingFunction& fn, const Eigen::VectorXd& theta,
                                    double max_condition = 1e12);
Eigen::VectorXd sandwich_se(const EstimatingFunction& fn, const Eigen::VectorXd& theta);
Eigen::VectorXd sandwich_se(const ScoreSpec& spec, const RegressionData& data,
                            const Eigen::VectorXd& theta);

enum class PointwiseVariant
{
  Naive,
  MonteCarlo,    ///< mean of Re f(w + iV), V ~ N(0, sigma_u^2)
  ProperComplex, ///< mean of Re f(w - E(U) + i{V - E(V)}), V from the error law
  ComplexConstant,
  Tessarine,
};

struct PointwiseOptions
{
  PointwiseVariant variant = PointwiseVariant::Naive;
  MomentSet moments;
  TessCoefficients coeffs;
  ErrorLaw law;
  int draws = 1;
  std::uint64_t seed = 0;
};

/// Estimate of f(X) from W = w for an entire function f. The tessarine
/// evaluation applies f to both eigenchannels.
double pointwise_estimate(const std::function<Complex(Complex)>& f, double w,
                          const PointwiseOptions& options);

} // namespace tessera
