// Serial reference vs OpenMP kernels. Arg = thread count for the parallel side.
#include <benchmark/benchmark.h>

#include <omp.h>

#include <random>
#include <string>

#include "abductor/bench/suites.hpp"
#include "abductor/logic/parser.hpp"
#include "abductor/meta/learner.hpp"
#include "abductor/meta/metarule.hpp"
#include "abductor/meta/task.hpp"

using namespace abductor;

namespace {

// Six constants, five unary predicates, two chain/conjunction meta-rules.
meta::Task enumeration_task() {
    std::mt19937_64 rng(17);
    logic::Program bk;
    const char* preds[] = {"p", "q", "r", "s", "t"};
    for (const char* p : preds) {
        for (int c = 0; c < 6; ++c) {
            if (rng() % 2 == 0) {
                bk.add(logic::parse_clause(std::string(p) + "(c" + std::to_string(c) + ")."));
            }
        }
    }
    bk.add(logic::parse_clause("p(c0)."));
    bk.add(logic::parse_clause("q(c0)."));
    std::vector<logic::Atom> pos = {logic::parse_atom("f(c0)")};
    std::vector<logic::Atom> neg = {logic::parse_atom("f(c5)")};
    return meta::Task::make(bk, pos, neg,
                            {meta::parse_metarule("[[P,Q],[P,A],[[Q,A]]]"),
                             meta::parse_metarule("[[P,Q,R],[P,A],[[Q,A],[R,A]]]")});
}

void BM_EnumerateSerial(benchmark::State& state) {
    const auto task = enumeration_task();
    for (auto _ : state) {
        benchmark::DoNotOptimize(meta::enumerate_bruteforce(task, 2));
    }
}

void BM_EnumerateParallel(benchmark::State& state) {
    const auto task = enumeration_task();
    omp_set_num_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(meta::enumerate_bruteforce_parallel(task, 2));
    }
}

void BM_VoteSuite(benchmark::State& state) {
    bench::VoteSuiteConfig cfg;
    cfg.per_class = 60;
    cfg.seed = 3;
    cfg.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bench::run_vote_suite(cfg));
    }
}

void BM_ClevrSynth(benchmark::State& state) {
    bench::ClevrSynthConfig cfg;
    cfg.tasks = 6;
    cfg.seed = 2;
    cfg.jobs = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(bench::run_clevr_synth(cfg));
    }
}

} // namespace

BENCHMARK(BM_EnumerateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EnumerateParallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
// jobs = 1 runs the serial path
BENCHMARK(BM_VoteSuite)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ClevrSynth)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
