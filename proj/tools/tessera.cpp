// tessera command-line front end: coefficient solving, regression fits,
// density estimates and the simulation harness.

#include "tessera/coeff_solver.hpp"
#include "tessera/config.hpp"
#include "tessera/density.hpp"
#include "tessera/error_model.hpp"
#include "tessera/errors.hpp"
#include "tessera/estimators.hpp"
#include "tessera/parallel.hpp"
#include "tessera/report.hpp"
#include "tessera/simharness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

using namespace tessera;
using nlohmann::json;

namespace {

json number(double v)
{
  if (!std::isfinite(v))
    return nullptr;
  return v;
}

json vector_json(const Eigen::VectorXd& v)
{
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out.push_back(number(v(i)));
  return out;
}

json coefficients_json(const TessCoefficients& c)
{
  return { { "b", number(c.b) },
           { "c", number(c.c) },
           { "d", number(c.d) },
           { "method", to_string(c.method) },
           { "residuals", { number(c.residuals[0]), number(c.residuals[1]), number(c.residuals[2]) } },
           { "objective", number(c.objective) } };
}

std::vector<double> read_column(const std::string& path, const std::string& name, int fallback)
{
  const auto table = read_csv(path);
  int col = table.column(name);
  if (col < 0)
    col = fallback;
  if (col < 0 || col >= static_cast<int>(table.header.size()))
    throw MissingColumns("'" + path + "' has no column '" + name + "'");
  std::vector<double> out;
  for (const auto& row : table.rows) {
    if (col >= static_cast<int>(row.size()))
      throw MissingColumns("short row in '" + path + "'");
    try {
      out.push_back(std::stod(row[static_cast<std::size_t>(col)]));
    } catch (const std::exception&) {
      throw ConfigError("non-numeric value '" + row[static_cast<std::size_t>(col)] + "' in '" +
                        path + "'");
    }
  }
  return out;
}

// family:p1[:p2], e.g. gamma:2:0.5, lognormal:0:0.5, laplace:1, gaussian:0.3
ErrorLaw parse_law(const std::string& text)
{
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':'))
    parts.push_back(item);
  if (parts.empty())
    throw ConfigError("empty error law");
  const auto param = [&](std::size_t i) {
    if (i >= parts.size())
      throw ConfigError("error law '" + text + "' is missing a parameter");
    return std::stod(parts[i]);
  };
  switch (error_family_from_string(parts[0])) {
    case ErrorFamily::Gamma:
      return gamma_law(param(1), param(2));
    case ErrorFamily::Lognormal:
      return lognormal_law(param(1), param(2));
    case ErrorFamily::Laplace:
      return laplace_law(param(1));
    case ErrorFamily::Gaussian:
      return gaussian_law(param(1));
    case ErrorFamily::Zero:
      return zero_law();
  }
  throw ConfigError("unknown error law '" + text + "'");
}

struct MomentFlags
{
  double mean = 0.0;
  std::optional<double> var, mu3, mu4;

  void add(CLI::App* app)
  {
    app->add_option("--mean", mean, "Error mean E(U)");
    app->add_option("--var", var, "Error variance");
    app->add_option("--mu3", mu3, "Third central moment of the error");
    app->add_option("--mu4", mu4, "Fourth central moment of the error");
  }

  std::optional<MomentSet> get() const
  {
    if (!var && !mu3 && !mu4)
      return std::nullopt;
    if (!var || !mu3 || !mu4)
      throw ConfigError("--var, --mu3 and --mu4 must be given together");
    return MomentSet{ mean, *var, *mu3, *mu4 };
  }
};

int solve_coeffs(const MomentFlags& flags, bool all)
{
  const auto m = flags.get();
  if (!m)
    throw ConfigError("solve-coeffs needs --var, --mu3 and --mu4");
  m->validate();
  json out = coefficients_json(find_coefficients(*m));
  if (all) {
    json solutions = json::array();
    for (const auto& s : exact_solutions(*m))
      solutions.push_back(coefficients_json(s));
    out["exact_solutions"] = solutions;
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Debiased estimation for measurement-error models with tessarine shifts" };
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP threads (default: all)");

  auto* solve = app.add_subcommand("solve-coeffs", "Solve for the tessarine shift (b, c, d)");
  MomentFlags solve_moments;
  solve_moments.add(solve);
  bool solve_all = false;
  solve->add_flag("--all", solve_all, "Also list every exact solution");

  auto* fit = app.add_subcommand("fit", "Fit a regression model from a (y, w) CSV");
  std::string fit_input, fit_model = "poisson", fit_variant = "tc", fit_error_sample;
  MomentFlags fit_moments;
  int fit_order = 1, fit_draws = 500;
  std::uint64_t fit_seed = 1;
  fit->add_option("input", fit_input, "CSV with columns y and w")->required();
  fit->add_option("--model", fit_model, "linear | polynomial | poisson | logistic");
  fit->add_option("--variant", fit_variant, "true | naive | cc | tc | cs | mc | cd");
  fit->add_option("--order", fit_order, "Polynomial degree");
  fit->add_option("--mc-draws", fit_draws, "Draws per observation for the mc score");
  fit->add_option("--seed", fit_seed, "Seed for the mc score");
  fit->add_option("--error-sample", fit_error_sample,
                  "CSV whose column u (or first column) is a sample of the error");
  fit_moments.add(fit);

  auto* dens = app.add_subcommand("density", "Kernel density estimate from a one-column CSV");
  std::string dens_input, dens_method = "tc", dens_truth, dens_law, dens_bandwidths = "0.1:0.05:1";
  std::optional<double> dens_h;
  bool dens_oracle = false;
  double grid_lo = -2.0, grid_hi = 8.0;
  int grid_points = 100;
  MomentFlags dens_moments;
  std::optional<double> laplace_scale;
  dens->add_option("input", dens_input, "CSV of W values (column w, or the first column)")
    ->required();
  dens->add_option("--method", dens_method, "errorfree | naive | tc | dk");
  dens->add_option("--bandwidth,-b", dens_h, "Bandwidth h");
  dens->add_flag("--oracle-bandwidth", dens_oracle, "Choose h by MISE against --truth");
  dens->add_option("--truth", dens_truth, "True density of X as a normal mixture w:m:s,...");
  dens->add_option("--error-law", dens_law,
                   "Error law family:p1[:p2]; gives the moments, and the W density for naive");
  dens->add_option("--bandwidths", dens_bandwidths, "Candidate bandwidths for the oracle");
  dens->add_option("--grid-lo", grid_lo);
  dens->add_option("--grid-hi", grid_hi);
  dens->add_option("--grid-points", grid_points);
  dens->add_option("--laplace-scale", laplace_scale,
                   "Laplace error scale for dk (default sqrt(var / 2))");
  dens_moments.add(dens);

  auto* sim = app.add_subcommand("simulate", "Run an experiment described by a config file");
  std::string sim_config, sim_out;
  bool sim_timing = false;
  sim->add_option("--config", sim_config, "Experiment config (key = value)")->required();
  sim->add_option("--out", sim_out, "Output directory")->required();
  sim->add_flag("--timing", sim_timing, "Also write per-replicate wall-clock to timing.json");

  CLI11_PARSE(app, argc, argv);
  set_thread_count(threads);

  try {
    if (*solve)
      return solve_coeffs(solve_moments, solve_all);

    if (*fit) {
      const auto y = read_column(fit_input, "y", 0);
      const auto w = read_column(fit_input, "w", 1);
      ScoreSpec spec;
      spec.model = model_from_string(fit_model);
      spec.variant = variant_from_string(fit_variant);
      spec.order = fit_order;
      spec.mc_draws = fit_draws;
      spec.seed = fit_seed;
      spec.moments = fit_moments.get();
      if (!fit_error_sample.empty()) {
        if (spec.moments)
          throw ConfigError("give either moments or --error-sample, not both");
        spec.moments = moments_from_sample(read_column(fit_error_sample, "u", 0));
      }
      if (spec.variant == Variant::Tessarine && spec.moments)
        spec.coeffs = find_coefficients(*spec.moments);
      if (spec.variant == Variant::ComplexConstant && spec.moments)
        spec.coeffs = complex_constant(*spec.moments);
      spec.validate();
      const auto data = RegressionData::scalar(y, w);
      Eigen::VectorXd init = Eigen::VectorXd::Zero(spec.dimension());
      if (spec.model == Model::Poisson || spec.model == Model::Logistic) {
        ScoreSpec naive = spec;
        naive.variant = Variant::Naive;
        double mean = data.y.mean();
        init(0) = spec.model == Model::Poisson
                    ? std::log(std::max(mean, 1e-3))
                    : std::log(std::clamp(mean, 1e-3, 1 - 1e-3) / (1 - std::clamp(mean, 1e-3, 1 - 1e-3)));
        if (spec.variant != Variant::Naive && spec.variant != Variant::TrueData) {
          SolverOptions quiet;
          quiet.standard_errors = false;
          try {
            init = mestimate(naive, data, init, quiet).theta;
          } catch (const Error&) {
          }
        }
      }
      json out;
      try {
        const auto result = mestimate(spec, data, init);
        out = { { "theta", vector_json(result.theta) },
                { "se", vector_json(result.se) },
                { "iterations", result.iterations },
                { "converged", result.converged },
                { "score_norm", number(result.score_norm) } };
      } catch (const NonConvergence& e) {
        const auto& best = e.best();
        out = { { "theta", vector_json(best.theta) },
                { "se", json::array() },
                { "iterations", best.iterations },
                { "converged", false },
                { "score_norm", number(best.score_norm) },
                { "error", e.what() } };
      }
      out["model"] = to_string(spec.model);
      out["variant"] = to_string(spec.variant);
      if (spec.coeffs)
        out["coefficients"] = coefficients_json(*spec.coeffs);
      std::cout << out.dump(2) << '\n';
      return out["converged"].get<bool>() ? 0 : 3;
    }

    if (*dens) {
      const auto w = read_column(dens_input, "w", 0);
      DensityConfig dc;
      dc.method = density_method_from_string(dens_method);
      std::optional<ErrorLaw> law;
      if (!dens_law.empty())
        law = parse_law(dens_law);
      auto moments = dens_moments.get();
      if (!moments && law)
        moments = law->moments();
      if (dc.method == DensityMethod::Tessarine) {
        if (!moments)
          throw ConfigError("tc needs the error moments (--var/--mu3/--mu4 or --error-law)");
        dc.error_mean = moments->mean;
        dc.coeffs = find_coefficients(*moments);
      }
      if (dc.method == DensityMethod::Deconvoluting) {
        double scale = 0.0;
        if (laplace_scale)
          scale = *laplace_scale;
        else if (moments)
          scale = std::sqrt(moments->variance / 2.0);
        else
          throw ConfigError("dk needs --laplace-scale or the error variance");
        dc.phi_u = [scale](double t) { return scale > 0.0 ? laplace_charfn(t, scale) : 1.0; };
      }
      const auto grid = linspace(grid_lo, grid_hi, static_cast<std::size_t>(grid_points));
      DensityEstimate est;
      if (dens_oracle) {
        if (dens_truth.empty())
          throw ConfigError("--oracle-bandwidth needs --truth");
        const auto mixture = NormalMixture::parse(dens_truth);
        const auto px = [&mixture](double x) { return mixture.pdf(x); };
        std::vector<double> truth(grid.size());
        if (dc.method == DensityMethod::Naive) {
          if (!law)
            throw ConfigError("the naive oracle needs --error-law for the density of W");
          truth = convolved_density(px, law->as_centered(), grid);
        } else {
          for (std::size_t g = 0; g < grid.size(); ++g)
            truth[g] = px(grid[g]);
        }
        est = oracle_fit(dc, w, grid, truth, parse_number_list(dens_bandwidths)).estimate;
      } else {
        if (!dens_h)
          throw ConfigError("give --bandwidth or --oracle-bandwidth");
        est = kde(w, *dens_h, grid, dc);
      }
      std::cerr << "bandwidth " << format_number(est.bandwidth) << '\n';
      std::cout << "x,p\n";
      for (std::size_t g = 0; g < grid.size(); ++g)
        std::cout << format_number(grid[g]) << ',' << format_number(est.values[g]) << '\n';
      return 0;
    }

    if (*sim) {
      const auto cfg = SimConfig::load(sim_config);
      const auto result = run_experiment(cfg);
      write_outputs(result, sim_out, sim_timing);
      std::cerr << "wrote " << sim_out << '\n';
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
