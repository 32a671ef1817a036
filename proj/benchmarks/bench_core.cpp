#include <random>

#include <benchmark/benchmark.h>

#include "bqnn/dynamics.hpp"
#include "bqnn/forward.hpp"
#include "bqnn/gbs.hpp"
#include "bqnn/loop_hafnian.hpp"
#include "bqnn/model.hpp"

namespace {

using namespace bqnn;

MatC random_symmetric(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  MatC b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      b(i, j) = cd(u(rng), u(rng));
      b(j, i) = b(i, j);
    }
  return b;
}

SystemParams stable_system(int modes) {
  SystemParams p = SystemParams::zero(modes);
  p.kappa.setConstant(1.0);
  p.delta.setConstant(0.3);
  p.eps.setConstant(cd(1.5, 0.0));
  for (int q = 0; q < SystemParams::pair_count(modes); ++q) {
    p.g[q] = 0.8 + 0.1 * q;
    p.gs[q] = cd(0.2, -0.05 * q);
  }
  return p;
}

void bm_loop_hafnian(benchmark::State& state) {
  const MatC b = random_symmetric(static_cast<int>(state.range(0)), 11);
  for (auto _ : state) benchmark::DoNotOptimize(loop_hafnian(b));
}
BENCHMARK(bm_loop_hafnian)->DenseRange(4, 16, 4);

void bm_evolve_segment(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  const SystemParams p = stable_system(modes);
  const Propagator prop = make_propagator(p, 1.0, DegeneracyGuard::value_only);
  const GaussianState vac = GaussianState::vacuum(modes);
  for (auto _ : state) benchmark::DoNotOptimize(evolve_segment(vac, prop));
}
BENCHMARK(bm_evolve_segment)->DenseRange(2, 6, 2);

void bm_forward_gradient(benchmark::State& state) {
  const int modes = static_cast<int>(state.range(0));
  ModelSpec spec;
  spec.modes = modes;
  spec.uploads = 1;
  spec.features = 2 * modes;
  spec.outputs = 1;
  Model model(spec, LearningRates{});
  model.kappa = VecR::Constant(modes, 0.2);
  for (auto& up : model.upload) {
    up.delta.setConstant(0.1);
    up.eps.setConstant(cd(40.0, 0.0));
    up.g.setConstant(10.0);
    up.gs.setConstant(cd(2.0, 0.0));
  }
  model.readout_w.setConstant(1.0);

  ForwardOptions opt;
  opt.dt = 2.0;
  opt.plan = MeasurementPlan::canonical(modes, 1);
  opt.loss = LossKind::bce_logits;
  opt.input_dim = modes;
  const VecR x = VecR::Constant(modes, 0.5);
  const VecR target = VecR::Constant(1, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(forward_sample(model, opt, x, target));
}
BENCHMARK(bm_forward_gradient)->DenseRange(2, 6, 2);

}  // namespace

BENCHMARK_MAIN();
