// Serial reference integrators against the OpenMP batch kernels on the
// default two-class ring.

#include <vector>

#include <benchmark/benchmark.h>

#include "critwin/config.hpp"
#include "critwin/rng.hpp"
#include "critwin/sampler.hpp"

using namespace critwin;

namespace {

constexpr int kBatch = 64;
constexpr int kSteps = 100;

const GaussianMixtureModel& model() {
  static const GaussianMixtureModel m = [] {
    ModelSpec spec;
    spec.lattice = LatticeSpec::ring(64);
    return build_model(spec);
  }();
  return m;
}

const NoiseSchedule kSchedule = NoiseSchedule::cosine();
const DenoiserPolicy kPolicy = DenoiserPolicy::constant(ScoreMode::uncond());

void make_batch(std::vector<Stream>& rngs, std::vector<Eigen::VectorXd>& states) {
  rngs.clear();
  states.clear();
  for (int i = 0; i < kBatch; ++i) {
    rngs.emplace_back(derive_seed(7, "bench", 0, i));
    states.push_back(rngs.back().normal_vector(model().n_sites()));
  }
}

void BM_SdeSerial(benchmark::State& st) {
  std::vector<Stream> rngs;
  std::vector<Eigen::VectorXd> states;
  for (auto _ : st) {
    make_batch(rngs, states);
    for (int i = 0; i < kBatch; ++i)
      benchmark::DoNotOptimize(
          reverse_sde_euler(model(), kSchedule, kPolicy, states[i], 1.0, 0.0, kSteps, rngs[i]));
  }
  st.SetItemsProcessed(st.iterations() * kBatch);
}

void BM_SdeBatch(benchmark::State& st) {
  std::vector<Stream> rngs;
  std::vector<Eigen::VectorXd> states;
  for (auto _ : st) {
    make_batch(rngs, states);
    benchmark::DoNotOptimize(reverse_sde_euler_batch(model(), kSchedule, kPolicy, states, 1.0, 0.0, kSteps,
                                                     rngs, static_cast<int>(st.range(0))));
  }
  st.SetItemsProcessed(st.iterations() * kBatch);
}

void BM_OdeSerial(benchmark::State& st) {
  std::vector<Stream> rngs;
  std::vector<Eigen::VectorXd> states;
  make_batch(rngs, states);
  for (auto _ : st)
    for (int i = 0; i < kBatch; ++i)
      benchmark::DoNotOptimize(reverse_ode_heun(model(), kSchedule, kPolicy, states[i], 1.0, 0.0, kSteps));
  st.SetItemsProcessed(st.iterations() * kBatch);
}

void BM_OdeBatch(benchmark::State& st) {
  std::vector<Stream> rngs;
  std::vector<Eigen::VectorXd> states;
  make_batch(rngs, states);
  for (auto _ : st)
    benchmark::DoNotOptimize(reverse_ode_heun_batch(model(), kSchedule, kPolicy, states, 1.0, 0.0, kSteps,
                                                    static_cast<int>(st.range(0))));
  st.SetItemsProcessed(st.iterations() * kBatch);
}

}  // namespace

BENCHMARK(BM_SdeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SdeBatch)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OdeSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OdeBatch)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
