// Serial reference vs OpenMP kernels.
//
//   psr_bench --benchmark_filter=EStep
//   OMP_NUM_THREADS=8 psr_bench
//
// The E-step pair differs in two ways at once (thread parallelism and
// Cholesky-vs-inverse evaluation); the profile pair differs only in the
// per-agent loop being parallel.

#include <benchmark/benchmark.h>

#include <vector>

#include "psr/gmm.hpp"
#include "psr/ingest.hpp"
#include "psr/pipeline.hpp"
#include "psr/stub_annotator.hpp"
#include "psr/synth.hpp"

namespace {

using psr::Mat3;
using psr::Vec3;

const psr::gmm::GmmModel& bench_model() {
    static const psr::gmm::GmmModel model({
        {0.5, Vec3(0.2, 0.3, 0.25), Mat3::Identity() * 0.02},
        {0.3, Vec3(0.8, 0.7, 0.7), Mat3::Identity() * 0.01},
        {0.2, Vec3(0.5, 0.5, 0.5), Mat3::Identity() * 0.05},
    });
    return model;
}

void EStepParallel(benchmark::State& state) {
    const auto& model = bench_model();
    const auto pts = psr::gmm::sample(model, static_cast<std::size_t>(state.range(0)), 1);
    std::vector<double> joint(pts.size() * model.k()), dens(pts.size());
    for (auto _ : state) {
        psr::gmm::e_step_parallel(pts, model.evals(), joint, dens);
        benchmark::DoNotOptimize(dens.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void EStepSerialReference(benchmark::State& state) {
    const auto& model = bench_model();
    const auto pts = psr::gmm::sample(model, static_cast<std::size_t>(state.range(0)), 1);
    std::vector<double> joint(pts.size() * model.k()), dens(pts.size());
    for (auto _ : state) {
        psr::gmm::e_step_serial_reference(pts, model.components(), joint, dens);
        benchmark::DoNotOptimize(dens.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

BENCHMARK(EStepParallel)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);
BENCHMARK(EStepSerialReference)->Arg(1 << 12)->Arg(1 << 16)->Arg(1 << 20)->Unit(benchmark::kMicrosecond);

// Agent inputs from a synthetic corpus scaled by `factor`.
std::vector<psr::ingest::AgentInputs> agent_inputs(int factor) {
    psr::synth::SynthOptions opt;
    auto& c = opt.counts;
    c.type1 *= factor;
    c.type2 *= factor;
    c.type3 *= factor;
    c.type4 *= factor;
    c.type5_persona *= factor;
    c.type5_stimulus *= factor;
    c.broadcasters *= factor;
    c.bio_only *= factor;
    const auto fixture = psr::synth::generate(opt);
    const psr::ingest::AnnotationSet ann(psr::ingest::annotate_corpus(fixture.corpus));
    return psr::ingest::join_interactions(fixture.corpus, ann).agents;
}

void ProfilesParallel(benchmark::State& state) {
    const auto agents = agent_inputs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(psr::pipeline::build_profiles_parallel(agents, {}));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(agents.size()));
}

void ProfilesSerial(benchmark::State& state) {
    const auto agents = agent_inputs(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(psr::pipeline::build_profiles_serial(agents, {}));
    state.SetItemsProcessed(state.iterations() * static_cast<long>(agents.size()));
}

BENCHMARK(ProfilesParallel)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(ProfilesSerial)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
