#include "tessera/simharness.hpp"

#include "tessera/density.hpp"
#include "tessera/errors.hpp"
#include "tessera/parallel.hpp"
#include "tessera/report.hpp"

#include <json.hpp>

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <random>

namespace tessera {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double expit(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : 1.0 - 1.0 / (1.0 + std::exp(x)); }

struct RegressionSetting
{
  int n = 0;
  double setting = 0.0;
  ErrorLaw law;                           // raw (uncentered) law of U
  std::uint64_t stream = 0;               // data stream index
  std::function<MomentSet(int)> moments;  // moments handed to the estimators
  bool fixed_moments = true;
};

struct ReplicateData
{
  std::vector<double> x, w, wc, y;
};

ReplicateData generate(Model model, const SimConfig& cfg, int n, const ErrorLaw& law,
                       Engine& engine)
{
  ReplicateData d;
  const auto size = static_cast<std::size_t>(n);
  d.x.resize(size);
  d.w.resize(size);
  d.wc.resize(size);
  d.y.resize(size);
  std::normal_distribution<double> normal(model == Model::Logistic ? 1.0 : 0.0, 1.0);
  for (auto& v : d.x)
    v = normal(engine);
  const double centre = law.raw_mean();
  for (std::size_t r = 0; r < size; ++r) {
    const double u = law.sample_raw(engine);
    d.w[r] = d.x[r] + u;
    d.wc[r] = d.x[r] + (u - centre);
  }
  for (std::size_t r = 0; r < size; ++r) {
    const double eta = cfg.beta0 + cfg.beta1 * d.x[r];
    if (model == Model::Poisson)
      d.y[r] = static_cast<double>(std::poisson_distribution<long>(std::exp(eta))(engine));
    else
      d.y[r] = std::bernoulli_distribution(expit(eta))(engine) ? 1.0 : 0.0;
  }
  return d;
}

Eigen::VectorXd naive_start(Model model, const std::vector<double>& y)
{
  double mean = 0.0;
  for (double v : y)
    mean += v;
  mean /= static_cast<double>(y.size());
  Eigen::VectorXd init = Eigen::VectorXd::Zero(2);
  if (model == Model::Poisson)
    init(0) = std::log(std::max(mean, 1e-3));
  else
    init(0) = std::log(std::clamp(mean, 1e-3, 1.0 - 1e-3) / (1.0 - std::clamp(mean, 1e-3, 1.0 - 1e-3)));
  return init;
}

struct FitOutcome
{
  std::vector<double> theta;
  bool converged = false;
};

FitOutcome fit_one(Model model, const std::string& name, const ReplicateData& d,
                   const MomentSet& m, const std::optional<TessCoefficients>& coeffs,
                   const Eigen::VectorXd& naive_theta, const SimConfig& cfg, std::uint64_t mc_seed,
                   bool with_se, std::vector<double>* se = nullptr)
{
  ScoreSpec spec;
  spec.model = model;
  spec.variant = variant_from_string(name);
  spec.moments = m;
  spec.coeffs = coeffs;
  spec.mc_draws = cfg.mc_draws;
  spec.seed = mc_seed;
  const bool raw = spec.variant == Variant::Tessarine || spec.variant == Variant::ComplexConstant;
  const auto& cov = spec.variant == Variant::TrueData ? d.x : (raw ? d.w : d.wc);
  const auto data = RegressionData::scalar(d.y, cov);
  Eigen::VectorXd init = naive_theta;
  if (spec.variant == Variant::TrueData || spec.variant == Variant::Naive)
    init = naive_start(model, d.y);
  SolverOptions options;
  options.standard_errors = with_se;
  FitOutcome out;
  try {
    const auto fit = mestimate(spec, data, init, options);
    out.theta.assign(fit.theta.data(), fit.theta.data() + fit.theta.size());
    out.converged = fit.converged;
    if (se)
      se->assign(fit.se.data(), fit.se.data() + fit.se.size());
  } catch (const Error&) {
    out.converged = false;
  }
  return out;
}

Metrics metrics_or_nan(const std::vector<double>& values, double truth)
{
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return { nan, nan, nan };
  }
  return compute_metrics(values, truth);
}

double mean_standard_error(const std::vector<double>& values)
{
  if (values.size() < 2)
    return std::numeric_limits<double>::quiet_NaN();
  const double mean = pairwise_sum(values) / static_cast<double>(values.size());
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i)
    sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum(sq) / static_cast<double>(values.size() - 1);
  return std::sqrt(var / static_cast<double>(values.size()));
}

SimResult run_regression(const SimConfig& cfg, Model model,
                         const std::vector<RegressionSetting>& settings)
{
  SimResult result;
  result.config = cfg;
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  for (const auto& st : settings) {
    std::optional<TessCoefficients> fixed;
    const bool wants_coeffs =
      std::find(cfg.estimators.begin(), cfg.estimators.end(), "tc") != cfg.estimators.end();
    SettingInfo info{ st.n, st.setting, st.moments(0), std::nullopt, {}, {} };
    if (st.fixed_moments && wants_coeffs) {
      fixed = find_coefficients(info.moments);
      info.coeffs = fixed;
    }
    result.settings.push_back(info);

    std::vector<std::vector<ReplicateRecord>> per_rep(reps);
    parallel_for(reps, [&](std::size_t q) {
      auto engine = make_engine(cfg.seed, { st.stream, q });
      const auto data = generate(model, cfg, st.n, st.law, engine);
      const MomentSet m = st.moments(static_cast<int>(q));
      std::optional<TessCoefficients> coeffs = fixed;
      if (!st.fixed_moments && wants_coeffs)
        coeffs = find_coefficients(m);
      const auto naive = fit_one(model, "naive", data, m, coeffs, Eigen::VectorXd::Zero(2), cfg,
                                 0, false);
      Eigen::VectorXd naive_theta = Eigen::VectorXd::Zero(2);
      if (naive.converged)
        naive_theta = Eigen::Map<const Eigen::VectorXd>(naive.theta.data(), 2);
      else
        naive_theta = naive_start(model, data.y);
      const auto mc_seed = derive_seed(cfg.seed, { st.stream, q, 7 });
      for (const auto& name : cfg.estimators) {
        ReplicateRecord rec;
        rec.n = st.n;
        rec.setting = st.setting;
        rec.replicate = static_cast<int>(q);
        rec.estimator = name;
        const auto start = Clock::now();
        const auto fit = fit_one(model, name, data, m, coeffs, naive_theta, cfg, mc_seed, false);
        rec.seconds = seconds_since(start);
        rec.converged = fit.converged;
        if (fit.converged)
          rec.theta = fit.theta;
        per_rep[q].push_back(std::move(rec));
      }
    });

    for (const auto& name : cfg.estimators) {
      for (int p = 0; p < 2; ++p) {
        std::vector<double> values;
        int failures = 0;
        for (const auto& recs : per_rep)
          for (const auto& rec : recs)
            if (rec.estimator == name) {
              if (rec.converged)
                values.push_back(rec.theta[static_cast<std::size_t>(p)]);
              else
                ++failures;
            }
        const double truth = p == 0 ? cfg.beta0 : cfg.beta1;
        const auto mt = metrics_or_nan(values, truth);
        MetricRow row;
        row.n = st.n;
        row.setting = st.setting;
        row.estimator = name;
        row.parameter = p == 0 ? "beta0" : "beta1";
        row.bias = mt.bias;
        row.mse = mt.mse;
        row.iqr = mt.iqr;
        row.mean_se = mean_standard_error(values);
        row.converged = static_cast<int>(values.size());
        row.failures = failures;
        result.metrics.push_back(row);
      }
    }
    for (auto& recs : per_rep)
      for (auto& rec : recs)
        result.replicates.push_back(std::move(rec));
  }
  return result;
}

std::vector<RegressionSetting> lambda_settings(const SimConfig& cfg)
{
  std::vector<RegressionSetting> out;
  std::uint64_t stream = 0;
  for (int n : cfg.n)
    for (double lambda : cfg.lambda) {
      RegressionSetting st;
      st.n = n;
      st.setting = lambda;
      st.law = gamma_design(lambda);
      st.stream = stream++;
      const auto m = st.law.moments();
      st.moments = [m](int) { return m; };
      out.push_back(st);
    }
  return out;
}

} // namespace

double quantile(std::vector<double> values, double p)
{
  if (values.empty())
    throw InsufficientData("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

Metrics compute_metrics(std::span<const double> estimates, double truth)
{
  if (estimates.empty())
    throw InsufficientData("metrics need at least one estimate");
  std::vector<double> dev(estimates.size()), sq(estimates.size());
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    dev[i] = estimates[i] - truth;
    sq[i] = dev[i] * dev[i];
  }
  const double k = static_cast<double>(estimates.size());
  std::vector<double> copy(estimates.begin(), estimates.end());
  return { pairwise_sum(dev) / k, pairwise_sum(sq) / k,
           quantile(copy, 0.75) - quantile(copy, 0.25) };
}

const MetricRow& SimResult::metric(int n, double setting, const std::string& estimator,
                                   const std::string& parameter) const
{
  for (const auto& row : metrics)
    if (row.n == n && std::abs(row.setting - setting) < 1e-12 && row.estimator == estimator &&
        row.parameter == parameter)
      return row;
  throw DomainError("no metric row for " + estimator + "/" + parameter);
}

SimResult run_poisson_sim(const SimConfig& cfg)
{
  if (cfg.experiment != Experiment::PoissonSim)
    throw ConfigError("run_poisson_sim needs experiment = poisson");
  cfg.validate();
  return run_regression(cfg, Model::Poisson, lambda_settings(cfg));
}

SimResult run_logistic_sim(const SimConfig& cfg)
{
  if (cfg.experiment != Experiment::LogisticSim)
    throw ConfigError("run_logistic_sim needs experiment = logistic");
  cfg.validate();
  return run_regression(cfg, Model::Logistic, lambda_settings(cfg));
}

SimResult run_sensitivity(const SimConfig& cfg)
{
  if (cfg.experiment != Experiment::Sensitivity)
    throw ConfigError("run_sensitivity needs experiment = sensitivity");
  cfg.validate();
  const ErrorLaw law = gamma_law(4.0 / 9.0, 0.5);
  const MomentSet truth = law.moments();
  // one uniform(-1, 1) triple per replicate, shared by every delta level, so
  // E_k = 1 + delta v_k is uniform on [1 - delta, 1 + delta]
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<std::array<double, 3>> v(reps);
  for (std::size_t q = 0; q < reps; ++q) {
    auto engine = make_engine(cfg.seed, { 1000003, q });
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (auto& x : v[q])
      x = unif(engine);
  }
  std::vector<RegressionSetting> settings;
  for (int n : cfg.n)
    for (double delta : cfg.delta) {
      RegressionSetting st;
      st.n = n;
      st.setting = delta;
      st.law = law;
      st.stream = static_cast<std::uint64_t>(n);
      st.fixed_moments = delta == 0.0;
      st.moments = [truth, delta, &v](int q) {
        const auto& e = v[static_cast<std::size_t>(q)];
        MomentSet m = truth;
        m.variance *= 1.0 + delta * e[0];
        m.mu3 *= 1.0 + delta * e[1];
        m.mu4 *= 1.0 + delta * e[2];
        return m;
      };
      settings.push_back(st);
    }
  return run_regression(cfg, Model::Poisson, settings);
}

SimResult run_density_sim(const SimConfig& cfg)
{
  if (cfg.experiment != Experiment::DensitySim)
    throw ConfigError("run_density_sim needs experiment = density");
  cfg.validate();
  SimResult result;
  result.config = cfg;
  result.grid = linspace(cfg.grid_lo, cfg.grid_hi, static_cast<std::size_t>(cfg.grid_points));
  const auto& grid = result.grid;
  const auto px = [&cfg](double x) { return cfg.mixture.pdf(x); };
  const auto reps = static_cast<std::size_t>(cfg.replicates);
  std::uint64_t stream = 0;
  for (int n : cfg.n)
    for (double lambda : cfg.lambda) {
      const ErrorLaw centred =
        lambda == 1.0 ? zero_law() : lognormal_design(lambda, cfg.mixture.variance());
      const ErrorLaw raw = centred.as_centered(false);
      SettingInfo info;
      info.n = n;
      info.setting = lambda;
      info.moments = raw.moments();
      info.coeffs = find_coefficients(info.moments);
      info.truth_x.resize(grid.size());
      for (std::size_t g = 0; g < grid.size(); ++g)
        info.truth_x[g] = px(grid[g]);
      info.truth_w = convolved_density(px, centred, grid);
      result.settings.push_back(info);

      const double laplace_scale = std::sqrt(info.moments.variance / 2.0);
      const CharFn phi = [laplace_scale](double t) {
        return laplace_scale > 0.0 ? laplace_charfn(t, laplace_scale) : 1.0;
      };
      const auto this_stream = stream++;
      std::vector<std::vector<ReplicateRecord>> per_rep(reps);
      parallel_for(reps, [&](std::size_t q) {
        auto engine = make_engine(cfg.seed, { this_stream, q });
        std::vector<double> x(static_cast<std::size_t>(n)), w(x.size()), wc(x.size());
        for (auto& v : x)
          v = cfg.mixture.sample(engine);
        const double centre = raw.raw_mean();
        for (std::size_t r = 0; r < x.size(); ++r) {
          const double u = raw.sample_raw(engine);
          w[r] = x[r] + u;
          wc[r] = x[r] + (u - centre);
        }
        for (const auto& name : cfg.estimators) {
          DensityConfig dc;
          dc.method = density_method_from_string(name);
          const std::vector<double>* data = &wc;
          const std::vector<double>* truth = &info.truth_x;
          switch (dc.method) {
            case DensityMethod::ErrorFree:
              data = &x;
              break;
            case DensityMethod::Naive:
              truth = &info.truth_w;
              break;
            case DensityMethod::Tessarine:
              data = &w;
              dc.error_mean = info.moments.mean;
              dc.coeffs = *info.coeffs;
              break;
            case DensityMethod::Deconvoluting:
              dc.phi_u = phi;
              break;
          }
          ReplicateRecord rec;
          rec.n = n;
          rec.setting = lambda;
          rec.replicate = static_cast<int>(q);
          rec.estimator = name;
          const auto start = Clock::now();
          try {
            // naive picks its bandwidth against p_W but is scored against p_X
            auto fit = oracle_fit(dc, *data, grid, *truth, cfg.bandwidths);
            rec.bandwidth = fit.bandwidth;
            rec.mise = truth == &info.truth_x ? fit.mise : mise(fit.estimate, info.truth_x);
            rec.curve = std::move(fit.estimate.values);
            rec.converged = true;
          } catch (const Error&) {
            rec.converged = false;
          }
          rec.seconds = seconds_since(start);
          per_rep[q].push_back(std::move(rec));
        }
      });

      for (const auto& name : cfg.estimators) {
        std::vector<double> values;
        int failures = 0;
        for (const auto& recs : per_rep)
          for (const auto& rec : recs)
            if (rec.estimator == name) {
              if (rec.converged)
                values.push_back(rec.mise);
              else
                ++failures;
            }
        MetricRow row;
        row.n = n;
        row.setting = lambda;
        row.estimator = name;
        row.parameter = "density";
        if (!values.empty())
          row.mise = pairwise_sum(values) / static_cast<double>(values.size());
        row.mise_se = mean_standard_error(values);
        row.converged = static_cast<int>(values.size());
        row.failures = failures;
        result.metrics.push_back(row);
      }
      for (auto& recs : per_rep)
        for (auto& rec : recs)
          result.replicates.push_back(std::move(rec));
    }
  return result;
}

SimResult run_real_data(const SimConfig& cfg)
{
  if (cfg.experiment != Experiment::RealData)
    throw ConfigError("run_real_data needs experiment = realdata");
  cfg.validate();
  const auto table = read_csv(cfg.input);
  const int cy = table.column("wins"), cx = table.column("expected_goals");
  if (cy < 0 || cx < 0)
    throw MissingColumns("input needs the columns wins and expected_goals");
  std::vector<double> y, x;
  for (const auto& row : table.rows) {
    if (static_cast<int>(row.size()) <= std::max(cy, cx))
      throw MissingColumns("a row is shorter than the header");
    try {
      y.push_back(std::stod(row[static_cast<std::size_t>(cy)]));
      x.push_back(std::stod(row[static_cast<std::size_t>(cx)]));
    } catch (const std::exception&) {
      throw ConfigError("non-numeric value in the input data");
    }
  }
  if (y.size() < 5)
    throw InsufficientRows("the real-data workflow needs at least 5 rows");

  SimResult result;
  result.config = cfg;
  result.rows = static_cast<int>(y.size());
  const ErrorLaw law = gamma_law(cfg.noise_shape, cfg.noise_scale);
  auto engine = make_engine(cfg.seed, { 0 });
  ReplicateData d;
  d.x = x;
  d.y = y;
  std::vector<double> u(y.size());
  for (std::size_t r = 0; r < y.size(); ++r) {
    u[r] = law.sample_raw(engine);
    d.w.push_back(x[r] + u[r]);
    d.wc.push_back(x[r] + u[r] - law.raw_mean());
  }
  const auto um = moments_from_sample(u);
  result.error_skewness = um.skewness();
  result.error_kurtosis = um.kurtosis();

  std::vector<double> sorted = u;
  std::sort(sorted.begin(), sorted.end());
  boost::math::normal_distribution<double> standard;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(sorted.size());
    result.qq.emplace_back(boost::math::quantile(standard, p), (sorted[i] - um.mean) / um.sd());
  }

  SettingInfo info;
  info.n = result.rows;
  info.moments = law.moments();
  info.coeffs = find_coefficients(info.moments);
  result.settings.push_back(info);

  SimConfig fit_cfg = cfg;
  const auto naive =
    fit_one(Model::Poisson, "naive", d, info.moments, info.coeffs, Eigen::VectorXd::Zero(2),
            fit_cfg, 0, false);
  Eigen::VectorXd naive_theta = naive_start(Model::Poisson, y);
  if (naive.converged)
    naive_theta = Eigen::Map<const Eigen::VectorXd>(naive.theta.data(), 2);
  for (const auto& name : cfg.estimators) {
    RealDataFit fit;
    fit.estimator = name;
    const auto out = fit_one(Model::Poisson, name, d, info.moments, info.coeffs, naive_theta,
                             fit_cfg, derive_seed(cfg.seed, { 1 }), true, &fit.se);
    fit.converged = out.converged;
    fit.theta = out.theta;
    if (!fit.converged)
      fit.se.clear();
    result.fits.push_back(fit);
  }
  return result;
}

SimResult run_experiment(const SimConfig& cfg)
{
  switch (cfg.experiment) {
    case Experiment::PoissonSim:
      return run_poisson_sim(cfg);
    case Experiment::LogisticSim:
      return run_logistic_sim(cfg);
    case Experiment::DensitySim:
      return run_density_sim(cfg);
    case Experiment::Sensitivity:
      return run_sensitivity(cfg);
    case Experiment::RealData:
      return run_real_data(cfg);
  }
  throw ConfigError("unknown experiment");
}

namespace {

std::string field(double v) { return std::isnan(v) ? "" : format_number(v); }

nlohmann::json number(double v)
{
  if (!std::isfinite(v))
    return nullptr;
  return v;
}

nlohmann::json coeff_json(const TessCoefficients& c)
{
  return { { "b", number(c.b) },
           { "c", number(c.c) },
           { "d", number(c.d) },
           { "method", to_string(c.method) },
           { "residuals", { number(c.residuals[0]), number(c.residuals[1]), number(c.residuals[2]) } },
           { "objective", number(c.objective) } };
}

} // namespace

void write_outputs(const SimResult& result, const std::filesystem::path& dir, bool timing)
{
  std::filesystem::create_directories(dir);
  const auto& cfg = result.config;
  const std::string exp = to_string(cfg.experiment);
  const std::string setting_name = cfg.experiment == Experiment::Sensitivity ? "delta" : "lambda";

  nlohmann::json report;
  report["experiment"] = exp;
  report["config"] = cfg.to_text();
  nlohmann::json settings = nlohmann::json::array();
  for (const auto& s : result.settings) {
    nlohmann::json js = { { "n", s.n },
                          { setting_name, number(s.setting) },
                          { "moments",
                            { { "mean", number(s.moments.mean) },
                              { "variance", number(s.moments.variance) },
                              { "mu3", number(s.moments.mu3) },
                              { "mu4", number(s.moments.mu4) } } } };
    if (s.coeffs)
      js["coefficients"] = coeff_json(*s.coeffs);
    settings.push_back(js);
  }
  report["settings"] = settings;

  if (cfg.experiment == Experiment::RealData) {
    report["rows"] = result.rows;
    report["error_skewness"] = number(result.error_skewness);
    report["error_kurtosis"] = number(result.error_kurtosis);
    nlohmann::json fits = nlohmann::json::array();
    std::vector<std::vector<std::string>> rows;
    for (const auto& f : result.fits) {
      nlohmann::json jf = { { "estimator", f.estimator }, { "converged", f.converged } };
      std::vector<std::string> row{ f.estimator };
      for (std::size_t p = 0; p < 2; ++p) {
        const double th = p < f.theta.size() ? f.theta[p] : std::nan("");
        const double se = p < f.se.size() ? f.se[p] : std::nan("");
        jf["beta" + std::to_string(p)] = number(th);
        jf["se" + std::to_string(p)] = number(se);
        row.push_back(field(th));
        row.push_back(field(se));
      }
      row.push_back(f.converged ? "1" : "0");
      fits.push_back(jf);
      rows.push_back(row);
    }
    report["fits"] = fits;
    write_csv(dir / "table1.csv", { "estimator", "beta0", "se0", "beta1", "se1", "converged" },
              rows);
    std::vector<std::vector<std::string>> qq;
    for (const auto& [theoretical, sample] : result.qq)
      qq.push_back({ format_number(theoretical), format_number(sample) });
    write_csv(dir / "qq.csv", { "normal_quantile", "standardized_error" }, qq);
  } else {
    std::vector<std::vector<std::string>> rows;
    nlohmann::json metrics = nlohmann::json::array();
    int failures = 0;
    for (const auto& m : result.metrics) {
      rows.push_back({ exp, std::to_string(m.n), field(m.setting), m.estimator, m.parameter,
                       field(m.bias), field(m.mse), field(m.iqr), field(m.mise), field(m.mise_se),
                       std::to_string(m.converged), std::to_string(m.failures) });
      metrics.push_back({ { "n", m.n },
                          { setting_name, number(m.setting) },
                          { "estimator", m.estimator },
                          { "parameter", m.parameter },
                          { "bias", number(m.bias) },
                          { "mse", number(m.mse) },
                          { "iqr", number(m.iqr) },
                          { "mise", number(m.mise) },
                          { "mise_se", number(m.mise_se) },
                          { "converged", m.converged },
                          { "failures", m.failures } });
      failures += m.parameter == "beta1" || m.parameter == "density" ? m.failures : 0;
    }
    write_csv(dir / "metrics.csv",
              { "experiment", "n", setting_name, "estimator", "parameter", "bias", "mse", "iqr",
                "mise", "mise_se", "converged", "failures" },
              rows);
    report["metrics"] = metrics;
    report["replicate_failures"] = failures;

    if (cfg.experiment == Experiment::DensitySim) {
      std::vector<std::vector<std::string>> summary, curves, truth;
      for (const auto& r : result.replicates) {
        summary.push_back({ std::to_string(r.n), field(r.setting), std::to_string(r.replicate),
                            r.estimator, field(r.bandwidth), field(r.mise) });
        for (std::size_t g = 0; g < r.curve.size(); ++g)
          curves.push_back({ std::to_string(r.n), field(r.setting), std::to_string(r.replicate),
                             r.estimator, format_number(result.grid[g]),
                             format_number(r.curve[g]) });
      }
      for (const auto& s : result.settings)
        for (std::size_t g = 0; g < result.grid.size(); ++g)
          truth.push_back({ std::to_string(s.n), field(s.setting), format_number(result.grid[g]),
                            format_number(s.truth_x[g]), format_number(s.truth_w[g]) });
      write_csv(dir / "density_mise.csv",
                { "n", "lambda", "replicate", "method", "bandwidth", "mise" }, summary);
      write_csv(dir / "density_curves.csv",
                { "n", "lambda", "replicate", "method", "x", "value" }, curves);
      write_csv(dir / "density_truth.csv", { "n", "lambda", "x", "p_x", "p_w" }, truth);
    } else {
      std::vector<std::vector<std::string>> est;
      for (const auto& r : result.replicates)
        est.push_back({ std::to_string(r.n), field(r.setting), std::to_string(r.replicate),
                        r.estimator, r.converged ? format_number(r.theta[0]) : "",
                        r.converged ? format_number(r.theta[1]) : "", r.converged ? "1" : "0" });
      write_csv(dir / "estimates.csv",
                { "n", setting_name, "replicate", "estimator", "beta0", "beta1", "converged" },
                est);
    }
  }
  write_text(dir / "report.json", report.dump(2) + "\n");

  if (timing) {
    nlohmann::json t = nlohmann::json::array();
    for (const auto& r : result.replicates)
      t.push_back({ { "n", r.n },
                    { setting_name, number(r.setting) },
                    { "replicate", r.replicate },
                    { "estimator", r.estimator },
                    { "seconds", r.seconds } });
    write_text(dir / "timing.json", t.dump(2) + "\n");
  }
}

} // namespace tessera
