#include "bnn/inference.hpp"
#include "bnn/model.hpp"
#include "bnn/permutation.hpp"
#include "bnn/rebasin.hpp"

#include <benchmark/benchmark.h>

using namespace bnn;

namespace {

WeightSet random_weights(const Architecture& a, Rng& rng) {
    WeightSet w(a);
    fill_gaussian(w.flat(), rng, 0.0, 0.05);
    return w;
}

Dataset random_batch(std::size_t n, std::size_t d, Rng& rng) {
    Dataset out;
    out.images = Matrix(n, d);
    for (double& v : out.images.data()) v = rng.uniform();
    out.labels.resize(n);
    for (auto& l : out.labels) l = static_cast<std::uint8_t>(rng.uniform_index(10));
    return out;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    const Matrix a = sample_gaussian(rng, n, n, 0.0, 1.0);
    const Matrix b = sample_gaussian(rng, n, n, 0.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(512);

void BM_Hungarian(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    const Matrix c = sample_gaussian(rng, n, n, 0.0, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_lap_max(c));
}
BENCHMARK(BM_Hungarian)->Arg(64)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_WeightMatch(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    const WeightSet w = random_weights({784, h, 10, Activation::relu}, rng);
    const WeightSet pw = apply_to_weights(random_permutation(h, rng), w);
    for (auto _ : state) benchmark::DoNotOptimize(weight_match(w, pw));
}
BENCHMARK(BM_WeightMatch)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Gradient(benchmark::State& state) {
    const auto h = static_cast<std::size_t>(state.range(0));
    Rng rng(4);
    const WeightSet w = random_weights({784, h, 10, Activation::relu}, rng);
    const Dataset batch = random_batch(128, 784, rng);
    for (auto _ : state) benchmark::DoNotOptimize(grad_neg_log_posterior(w, batch.images, batch.labels, 1.0));
}
BENCHMARK(BM_Gradient)->Arg(16)->Arg(128)->Arg(512)->Unit(benchmark::kMicrosecond);

void BM_Leapfrog(benchmark::State& state) {
    Rng rng(5);
    const Architecture a{784, 16, 10, Activation::relu};
    const Dataset d = random_batch(2000, 784, rng);
    const PotentialFn u = posterior_potential(d, a, 1.0);
    PhasePoint z = make_phase_point(u, random_weights(a, rng).flatten());
    z.momentum.assign(z.position.size(), 0.0);
    for (auto _ : state) leapfrog(u, z, 1e-4, 10);
    state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_Leapfrog)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
