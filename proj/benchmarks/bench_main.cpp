#include <benchmark/benchmark.h>

#include <vector>

#include "tpg/env.hpp"
#include "tpg/evolution.hpp"
#include "tpg/lgp.hpp"
#include "tpg/team_graph.hpp"

using namespace tpg;

namespace {

std::vector<Instruction> random_code(Rng& rng, std::size_t n)
{
    std::vector<Instruction> code;
    for (std::size_t i = 0; i < n; ++i) {
        code.push_back(random_instruction(rng));
    }
    return code;
}

// A small hand-wired graph: `teams` teams of `width` programs each, every
// non-leaf pointing at a later team.
Population layered_graph(Rng& rng, std::size_t teams, std::size_t width)
{
    Population pop;
    std::vector<TeamId> ids;
    for (std::size_t i = 0; i < teams; ++i) {
        ids.push_back(pop.ids.team());
    }
    for (std::size_t i = 0; i < teams; ++i) {
        Team t;
        t.id = ids[i];
        for (std::size_t k = 0; k < width; ++k) {
            Action a = DiscreteAction {static_cast<int>(rng.below(3))};
            if (k > 0 && i + 1 < teams) {
                a = TeamRef {ids[i + 1 + rng.index(teams - i - 1)]};
            }
            auto id = pop.ids.program();
            t.programs.push_back(pop.add_program(Program(id, random_code(rng, 24), a, pop.ids.bank())));
        }
        pop.add_team(std::move(t));
    }
    return pop;
}

} // namespace

static void BM_ExecuteEffective(benchmark::State& state)
{
    Rng rng(1);
    Program prog(1, random_code(rng, static_cast<std::size_t>(state.range(0))), DiscreteAction {0}, 1);
    std::array<double, kMemorySize> bank {};
    Observation obs {0.3, -0.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute(prog, obs, bank));
    }
    state.counters["effective"] = static_cast<double>(prog.effective_code().size());
}
BENCHMARK(BM_ExecuteEffective)->Arg(10)->Arg(40)->Arg(160);

static void BM_ExecuteFull(benchmark::State& state)
{
    Rng rng(1);
    auto code = random_code(rng, static_cast<std::size_t>(state.range(0)));
    std::array<double, kMemorySize> bank {};
    Observation obs {0.3, -0.2};
    for (auto _ : state) {
        benchmark::DoNotOptimize(execute_full(code, obs, bank));
    }
}
BENCHMARK(BM_ExecuteFull)->Arg(10)->Arg(40)->Arg(160);

static void BM_Traversal(benchmark::State& state)
{
    Rng rng(2);
    auto pop = layered_graph(rng, static_cast<std::size_t>(state.range(0)), 8);
    Agent agent(pop, pop.roots().front());
    agent.reset();
    std::size_t t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(agent.act({0.1, 0.4}, t++));
    }
}
BENCHMARK(BM_Traversal)->Arg(1)->Arg(8)->Arg(32);

static void BM_EnvStep(benchmark::State& state)
{
    auto task = static_cast<TaskId>(state.range(0));
    Rng rng(3);
    auto s = reset(task, rng);
    ActionPair a {2, 0.5};
    for (auto _ : state) {
        auto [next, res] = step(task, s, a);
        benchmark::DoNotOptimize(next);
        benchmark::DoNotOptimize(res);
    }
    state.SetLabel(std::string(task_name(task)));
}
BENCHMARK(BM_EnvStep)->DenseRange(0, 5);

static void BM_Generation(benchmark::State& state)
{
    EvolutionParams p;
    p.tasks = {TaskId::CartPole};
    p.R_size = 200;
    p.n_elite = 20;
    p.test_interval = 0;
    auto evo = start_evolution(p);
    for (auto _ : state) {
        step_generation(evo, {});
    }
}
BENCHMARK(BM_Generation)->Unit(benchmark::kMillisecond)->Iterations(20);

BENCHMARK_MAIN();
