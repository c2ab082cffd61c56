// Production kernels (OpenMP, factorized, sparse) vs the serial dense
// reference implementations, on synthetic instances.
#include <benchmark/benchmark.h>

#include "rankcom/em.hpp"
#include "rankcom/generative.hpp"
#include "rankcom/reference.hpp"

using namespace rankcom;

namespace {

struct Instance {
  DirectedWeightedGraph graph;
  Model model;
};

Instance make_instance(int n) {
  SyntheticSpec spec = SyntheticSpec::paper_synthetic_small();
  spec.n = n;
  Synthetic synth = make_synthetic(spec, 0.5, 12345);
  GraphView view(synth.graph);
  HyperParams hp;
  hp.K = 3;
  hp.seed = 1;
  Model m = init_model(view, hp, QPin::kNone, 0);
  // a few sweeps so the state is typical of mid-run EM
  for (int it = 0; it < 3; ++it) {
    e_step_q(view, m, QSchedule::kSequential);
    m_step(view, m, hp);
  }
  return {std::move(synth.graph), std::move(m)};
}

void bm_elbo_parallel(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  GraphView view(inst.graph);
  for (auto _ : state) benchmark::DoNotOptimize(elbo(view, inst.model, {}));
}

void bm_elbo_reference(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(reference::elbo(inst.graph, nullptr, inst.model, {}));
}

void bm_estep_parallel(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  GraphView view(inst.graph);
  for (auto _ : state) {
    Model m = inst.model;
    e_step_q(view, m, QSchedule::kParallel);
    benchmark::DoNotOptimize(m.posterior.Q);
  }
}

void bm_estep_reference(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        reference::e_step(inst.graph, nullptr, inst.model, QSchedule::kParallel));
}

void bm_memberships_parallel(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  GraphView view(inst.graph);
  for (auto _ : state) {
    CommunityParams p = inst.model.community;
    update_memberships(view, p, inst.model.posterior.Q, {});
    benchmark::DoNotOptimize(p.u);
  }
}

void bm_memberships_reference(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    CommunityParams p = inst.model.community;
    reference::update_memberships(inst.graph, nullptr, p, inst.model.posterior.Q, {});
    benchmark::DoNotOptimize(p.u);
  }
}

void bm_update_c_parallel(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  GraphView view(inst.graph);
  for (auto _ : state)
    benchmark::DoNotOptimize(update_c(view, inst.model.ranking, inst.model.posterior.Q));
}

void bm_update_c_reference(benchmark::State& state) {
  const Instance inst = make_instance(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(
        reference::update_c(inst.graph, nullptr, inst.model.ranking, inst.model.posterior.Q));
}

}  // namespace

BENCHMARK(bm_elbo_parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_elbo_reference)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_estep_parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_estep_reference)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_memberships_parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_memberships_reference)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_update_c_parallel)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_update_c_reference)->Arg(200)->Arg(400)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
