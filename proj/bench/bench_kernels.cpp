// Serial reference kernels against their OpenMP counterparts. The thread
// count argument applies to the kernels that only have a parallel form.

#include "tessera/coeff_solver.hpp"
#include "tessera/config.hpp"
#include "tessera/density.hpp"
#include "tessera/estimators.hpp"
#include "tessera/parallel.hpp"
#include "tessera/simharness.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace tessera;

namespace {

RegressionData logistic_data(std::size_t n)
{
  auto engine = make_engine(1);
  std::normal_distribution<double> normal(1.0, 1.0);
  std::uniform_real_distribution<double> unit;
  const auto law = gamma_design(0.8);
  std::vector<double> y(n), w(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double x = normal(engine);
    y[r] = unit(engine) < 1.0 / (1.0 + std::exp(-5.0 + 5.0 * x)) ? 1.0 : 0.0;
    w[r] = x + law.sample(engine);
  }
  return RegressionData::scalar(y, w);
}

ScoreSpec mc_spec()
{
  ScoreSpec s;
  s.model = Model::Logistic;
  s.variant = Variant::MonteCarloCS;
  s.moments = gamma_design(0.8).moments();
  s.mc_draws = 500;
  s.seed = 3;
  return s;
}

struct DensityFixture
{
  std::vector<double> data, grid;
  DensityConfig tc, dk;

  DensityFixture()
  {
    const auto law = gamma_design(0.9).as_centered();
    const auto mix = NormalMixture::parse("0.5:0:1,0.5:5:1");
    auto engine = make_engine(2);
    for (int r = 0; r < 50; ++r)
      data.push_back(mix.sample(engine) + law.sample(engine));
    grid = linspace(-2, 8, 100);
    tc.method = DensityMethod::Tessarine;
    tc.coeffs = find_coefficients(law.moments());
    const double scale = std::sqrt(law.moments().variance / 2);
    dk.method = DensityMethod::Deconvoluting;
    dk.phi_u = [scale](double t) { return laplace_charfn(t, scale); };
  }
};

const DensityFixture& density_fixture()
{
  static const DensityFixture f;
  return f;
}

void BM_MeanScoreSerial(benchmark::State& state)
{
  const auto data = logistic_data(500);
  const ModelScore fn(mc_spec(), data);
  Eigen::VectorXd theta(2);
  theta << 4.0, -4.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(mean_score_serial(fn, theta));
}

void BM_MeanScoreParallel(benchmark::State& state)
{
  set_thread_count(static_cast<int>(state.range(0)));
  const auto data = logistic_data(500);
  const ModelScore fn(mc_spec(), data);
  Eigen::VectorXd theta(2);
  theta << 4.0, -4.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(mean_score(fn, theta));
}

void BM_KdeTessarineSerial(benchmark::State& state)
{
  const auto& f = density_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(kde_serial(f.data, 0.4, f.grid, f.tc));
}

void BM_KdeTessarineParallel(benchmark::State& state)
{
  set_thread_count(static_cast<int>(state.range(0)));
  const auto& f = density_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(kde(f.data, 0.4, f.grid, f.tc));
}

void BM_KdeDeconvolutingSerial(benchmark::State& state)
{
  const auto& f = density_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(kde_serial(f.data, 0.4, f.grid, f.dk));
}

void BM_KdeDeconvolutingParallel(benchmark::State& state)
{
  set_thread_count(static_cast<int>(state.range(0)));
  const auto& f = density_fixture();
  for (auto _ : state)
    benchmark::DoNotOptimize(kde(f.data, 0.4, f.grid, f.dk));
}

void BM_MinimizeQ(benchmark::State& state)
{
  set_thread_count(static_cast<int>(state.range(0)));
  const MomentSet gaussian{ 0.0, 1.0, 0.0, 3.0 };
  for (auto _ : state)
    benchmark::DoNotOptimize(minimize_q(gaussian, 16, 7));
}

void BM_PoissonReplicates(benchmark::State& state)
{
  set_thread_count(static_cast<int>(state.range(0)));
  const auto cfg = SimConfig::parse("experiment = poisson\nn = 250\nlambda = 0.8\n"
                                    "replicates = 40\nseed = 1\nestimators = naive, cs, tc\n"
                                    "beta0 = 1\nbeta1 = -1\n");
  for (auto _ : state)
    benchmark::DoNotOptimize(run_experiment(cfg));
}

int max_threads()
{
  static const int n = thread_count();
  return n;
}

void thread_args(benchmark::internal::Benchmark* b)
{
  b->Arg(1);
  if (max_threads() > 1)
    b->Arg(max_threads());
}

} // namespace

BENCHMARK(BM_MeanScoreSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MeanScoreParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KdeTessarineSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeTessarineParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_KdeDeconvolutingSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KdeDeconvolutingParallel)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_MinimizeQ)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_PoissonReplicates)->Apply(thread_args)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
