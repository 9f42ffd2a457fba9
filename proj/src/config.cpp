#include "tessera/config.hpp"

#include "tessera/errors.hpp"
#include "tessera/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tessera {

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos)
    return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty())
      out.push_back(item);
  }
  return out;
}

double to_number(const std::string& key, const std::string& text)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size())
      throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "': '" + text + "' is not a number");
  }
}

int to_int(const std::string& key, const std::string& text)
{
  const double v = to_number(key, text);
  if (v != std::floor(v) || std::abs(v) > 2e9)
    throw ConfigError("key '" + key + "': '" + text + "' is not an integer");
  return static_cast<int>(v);
}

std::string join_numbers(const std::vector<double>& values)
{
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i)
    out += (i ? "," : "") + format_number(values[i]);
  return out;
}

} // namespace

std::string to_string(Experiment experiment)
{
  switch (experiment) {
    case Experiment::PoissonSim:
      return "poisson";
    case Experiment::LogisticSim:
      return "logistic";
    case Experiment::DensitySim:
      return "density";
    case Experiment::Sensitivity:
      return "sensitivity";
    case Experiment::RealData:
      return "realdata";
  }
  return "poisson";
}

Experiment experiment_from_string(const std::string& name)
{
  for (auto e : { Experiment::PoissonSim, Experiment::LogisticSim, Experiment::DensitySim,
                  Experiment::Sensitivity, Experiment::RealData })
    if (to_string(e) == name)
      return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

std::vector<double> parse_number_list(const std::string& text)
{
  std::vector<double> out;
  for (const auto& item : split_list(text)) {
    const auto c1 = item.find(':');
    if (c1 == std::string::npos) {
      out.push_back(to_number("list", item));
      continue;
    }
    const auto c2 = item.find(':', c1 + 1);
    if (c2 == std::string::npos)
      throw ConfigError("range '" + item + "' must be lo:step:hi");
    const double lo = to_number("list", trim(item.substr(0, c1)));
    const double step = to_number("list", trim(item.substr(c1 + 1, c2 - c1 - 1)));
    const double hi = to_number("list", trim(item.substr(c2 + 1)));
    if (!(step > 0.0) || hi < lo)
      throw ConfigError("range '" + item + "' needs a positive step and lo <= hi");
    const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (long k = 0; k < count; ++k) {
      // snap to a short decimal so 0:0.1:0.3 gives 0.3 and not 0.30000000000000004
      const double v = std::stod(format_number(std::round((lo + k * step) * 1e12) / 1e12));
      out.push_back(v);
    }
  }
  return out;
}

SimConfig SimConfig::defaults(Experiment experiment)
{
  SimConfig c;
  c.experiment = experiment;
  c.seed = 20240611;
  switch (experiment) {
    case Experiment::PoissonSim:
      c.n = { 250 };
      c.lambda = { 0.8, 0.9, 1.0 };
      c.replicates = 200;
      c.estimators = { "true", "naive", "cs", "tc" };
      c.beta0 = 1.0;
      c.beta1 = -1.0;
      break;
    case Experiment::LogisticSim:
      c.n = { 500 };
      c.lambda = { 0.8, 0.9, 1.0 };
      c.replicates = 200;
      c.estimators = { "true", "naive", "mc", "cd", "tc" };
      c.beta0 = 5.0;
      c.beta1 = -5.0;
      break;
    case Experiment::DensitySim:
      c.n = { 50 };
      c.lambda = { 0.9 };
      c.replicates = 100;
      c.estimators = { "errorfree", "naive", "tc", "dk" };
      c.mixture = NormalMixture::parse("0.5:0:1,0.5:5:1");
      c.bandwidths = parse_number_list("0.1:0.05:1.0");
      break;
    case Experiment::Sensitivity:
      c.n = { 250 };
      c.lambda = { 0.9 };
      c.replicates = 500;
      c.estimators = { "true", "naive", "cs", "tc" };
      c.beta0 = 1.0;
      c.beta1 = -1.0;
      c.delta = parse_number_list("0:0.1:0.6");
      break;
    case Experiment::RealData:
      c.n = {};
      c.lambda = {};
      c.replicates = 1;
      c.estimators = { "true", "naive", "cs", "cc", "tc" };
      c.input = "data/hockey_synthetic.csv";
      break;
  }
  return c;
}

SimConfig SimConfig::parse(const std::string& text)
{
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::string experiment;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "experiment")
      experiment = value;
    else
      entries.emplace_back(key, value);
  }
  if (experiment.empty())
    throw ConfigError("config must name an experiment");
  SimConfig c = defaults(experiment_from_string(experiment));
  for (const auto& [key, value] : entries) {
    if (key == "n") {
      c.n.clear();
      for (double v : parse_number_list(value))
        c.n.push_back(to_int(key, format_number(v)));
    } else if (key == "lambda") {
      c.lambda = parse_number_list(value);
    } else if (key == "replicates") {
      c.replicates = to_int(key, value);
    } else if (key == "seed") {
      try {
        c.seed = std::stoull(value);
      } catch (const std::exception&) {
        throw ConfigError("key 'seed': '" + value + "' is not an unsigned integer");
      }
    } else if (key == "estimators") {
      c.estimators = split_list(value);
    } else if (key == "beta0") {
      c.beta0 = to_number(key, value);
    } else if (key == "beta1") {
      c.beta1 = to_number(key, value);
    } else if (key == "mc_draws") {
      c.mc_draws = to_int(key, value);
    } else if (key == "delta") {
      c.delta = parse_number_list(value);
    } else if (key == "mixture") {
      c.mixture = NormalMixture::parse(value);
    } else if (key == "grid_lo") {
      c.grid_lo = to_number(key, value);
    } else if (key == "grid_hi") {
      c.grid_hi = to_number(key, value);
    } else if (key == "grid_points") {
      c.grid_points = to_int(key, value);
    } else if (key == "bandwidths") {
      c.bandwidths = parse_number_list(value);
    } else if (key == "input") {
      c.input = value;
    } else if (key == "noise_shape") {
      c.noise_shape = to_number(key, value);
    } else if (key == "noise_scale") {
      c.noise_scale = to_number(key, value);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  c.validate();
  return c;
}

SimConfig SimConfig::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void SimConfig::validate() const
{
  if (replicates < 1)
    throw ConfigError("replicates must be at least 1");
  if (experiment != Experiment::RealData) {
    if (n.empty())
      throw ConfigError("at least one sample size is required");
    for (int v : n)
      if (v < 3)
        throw ConfigError("sample sizes must be at least 3");
    if (lambda.empty())
      throw ConfigError("at least one reliability ratio is required");
    for (double l : lambda)
      if (!(l > 0.0) || l > 1.0)
        throw ConfigError("reliability ratios must lie in (0, 1]");
  }
  if (estimators.empty())
    throw ConfigError("the estimator list is empty");
  for (double d : delta)
    if (!(d >= 0.0) || d > 0.6 + 1e-12)
      throw ConfigError("delta values must lie in [0, 0.6]");
  if (experiment == Experiment::Sensitivity && delta.empty())
    throw ConfigError("the sensitivity experiment needs a delta grid");
  if (experiment == Experiment::DensitySim) {
    if (bandwidths.empty())
      throw ConfigError("the density experiment needs candidate bandwidths");
    for (double h : bandwidths)
      if (!(h > 0.0))
        throw ConfigError("bandwidths must be positive");
    if (grid_points < 2 || !(grid_hi > grid_lo))
      throw ConfigError("the density grid needs at least 2 increasing points");
    for (const auto& e : estimators)
      density_method_from_string(e);
  }
  if (mc_draws < 1)
    throw ConfigError("mc_draws must be at least 1");
  if (experiment == Experiment::RealData && (!(noise_shape > 0.0) || !(noise_scale > 0.0)))
    throw ConfigError("noise_shape and noise_scale must be positive");
}

std::string SimConfig::to_text() const
{
  std::ostringstream os;
  os << "experiment = " << to_string(experiment) << '\n';
  if (!n.empty()) {
    os << "n = ";
    for (std::size_t i = 0; i < n.size(); ++i)
      os << (i ? "," : "") << n[i];
    os << '\n';
  }
  if (!lambda.empty())
    os << "lambda = " << join_numbers(lambda) << '\n';
  os << "replicates = " << replicates << '\n';
  os << "seed = " << seed << '\n';
  os << "estimators = ";
  for (std::size_t i = 0; i < estimators.size(); ++i)
    os << (i ? "," : "") << estimators[i];
  os << '\n';
  switch (experiment) {
    case Experiment::PoissonSim:
    case Experiment::LogisticSim:
    case Experiment::Sensitivity:
      os << "beta0 = " << format_number(beta0) << '\n';
      os << "beta1 = " << format_number(beta1) << '\n';
      if (experiment == Experiment::LogisticSim)
        os << "mc_draws = " << mc_draws << '\n';
      if (experiment == Experiment::Sensitivity)
        os << "delta = " << join_numbers(delta) << '\n';
      break;
    case Experiment::DensitySim:
      os << "mixture = " << mixture.to_string() << '\n';
      os << "grid_lo = " << format_number(grid_lo) << '\n';
      os << "grid_hi = " << format_number(grid_hi) << '\n';
      os << "grid_points = " << grid_points << '\n';
      os << "bandwidths = " << join_numbers(bandwidths) << '\n';
      break;
    case Experiment::RealData:
      os << "input = " << input << '\n';
      os << "noise_shape = " << format_number(noise_shape) << '\n';
      os << "noise_scale = " << format_number(noise_scale) << '\n';
      break;
  }
  return os.str();
}

} // namespace tessera
