#include "aotplan/aot.hpp"
#include "aotplan/bench/domains.hpp"
#include "aotplan/lrtdp.hpp"
#include "aotplan/uct.hpp"

#include <benchmark/benchmark.h>

using namespace aotplan;

namespace {

const ctp::Model& ctp_model() {
    static const ctp::Model model = [] {
        ctp::GeneratorParams p;
        p.num_nodes = 10;
        p.edge_density = 0.25;
        p.seed = 7;
        return ctp::Model(ctp::generate(p).instance);
    }();
    return model;
}

const sailing::Model& sailing_model() {
    static const sailing::Model model(sailing::make_instance(10));
    return model;
}

void BM_ctp_aot_optimistic(benchmark::State& state) {
    const auto& m = ctp_model();
    Rng weather_rng(1);
    auto b0 = m.initial_belief(ctp::sample_solvable_weather(m.instance(), weather_rng));
    BasePolicy<ctp::Belief> pi = [&m](const ctp::Belief& b, int, Rng&) { return m.optimistic_action(b); };
    AotConfig cfg;
    cfg.budget.iterations = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto r = aot_plan(m, b0, m.instance().num_nodes, LeafEvaluator<ctp::Model>::rollouts(m, pi), cfg);
        benchmark::DoNotOptimize(r.action);
    }
}
BENCHMARK(BM_ctp_aot_optimistic)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_ctp_uct_optimistic(benchmark::State& state) {
    const auto& m = ctp_model();
    Rng weather_rng(1);
    auto b0 = m.initial_belief(ctp::sample_solvable_weather(m.instance(), weather_rng));
    BasePolicy<ctp::Belief> pi = [&m](const ctp::Belief& b, int, Rng&) { return m.optimistic_action(b); };
    UctConfig cfg;
    cfg.budget.iterations = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto r = uct_plan(m, b0, m.instance().num_nodes, pi, cfg);
        benchmark::DoNotOptimize(r.action);
    }
}
BENCHMARK(BM_ctp_uct_optimistic)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_sailing_lrtdp_minmin(benchmark::State& state) {
    const auto& m = sailing_model();
    auto h = MinMinHeuristic<sailing::Model>::make(m, m.initial_state(), 50);
    LrtdpConfig cfg;
    cfg.budget.iterations = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto r = lrtdp_plan(m, m.initial_state(), 50, h, cfg);
        benchmark::DoNotOptimize(r.action);
    }
}
BENCHMARK(BM_sailing_lrtdp_minmin)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_sailing_aot_zero(benchmark::State& state) {
    const auto& m = sailing_model();
    AotConfig cfg;
    cfg.budget.iterations = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        auto r = aot_plan(m, m.initial_state(), 50,
                          LeafEvaluator<sailing::Model>::deterministic(zero_heuristic<sailing::State>()), cfg);
        benchmark::DoNotOptimize(r.action);
    }
}
BENCHMARK(BM_sailing_aot_zero)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
