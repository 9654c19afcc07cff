#include <benchmark/benchmark.h>

#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/discrete.hpp"
#include "lightfr/random.hpp"
#include "lightfr/real_matrix.hpp"
#include "lightfr/topk.hpp"

using namespace lightfr;

namespace {

ItemCodeMatrix random_items(std::size_t m, std::uint32_t f, std::uint64_t seed) {
    Rng rng(seed);
    ItemCodeMatrix items(m, f);
    for (std::size_t i = 0; i < m; ++i) items.set_code(i, random_code(f, rng));
    return items;
}

RealMatrix random_real(std::size_t m, std::size_t f, std::uint64_t seed) {
    Rng rng(seed);
    RealMatrix mat(m, f);
    for (double& x : mat.data()) x = rng.uniform(-1.0, 1.0);
    return mat;
}

void BM_TopKHamming(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto items = random_items(m, 64, 1);
    Rng rng(2);
    const auto q = random_code(64, rng);
    for (auto _ : state) benchmark::DoNotOptimize(top_k_hamming(q, items, 10));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_TopKHamming)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMicrosecond);

void BM_TopKInner(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto items = random_real(m, 32, 1);
    const auto q = random_real(1, 32, 2);
    for (auto _ : state) benchmark::DoNotOptimize(top_k_inner(q.row(0), items, 10));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}
BENCHMARK(BM_TopKInner)->RangeMultiplier(10)->Range(1000, 1000000)->Unit(benchmark::kMicrosecond);

void BM_LocalUserUpdate(benchmark::State& state) {
    const auto ratings = static_cast<std::size_t>(state.range(0));
    const auto items = random_items(ratings, 64, 3);
    Rng rng(4);
    ClientState c{0, random_code(64, rng), {}};
    for (std::size_t i = 0; i < ratings; ++i) c.local_data.push_back({static_cast<ItemId>(i), rng.unit(), 0});
    for (auto _ : state) benchmark::DoNotOptimize(local_user_update(c, items, 0.1, 1));
}
BENCHMARK(BM_LocalUserUpdate)->Arg(10)->Arg(100)->Arg(1000);

void BM_AggregateGrad(benchmark::State& state) {
    const std::size_t m = 2000, clients = static_cast<std::size_t>(state.range(0));
    const auto items = random_items(m, 64, 5);
    Rng rng(6);
    std::vector<GradientUpdate> ups;
    for (std::size_t c = 0; c < clients; ++c) {
        ClientState cs{static_cast<UserId>(c), random_code(64, rng), {}};
        for (int e = 0; e < 25; ++e) {
            const auto item = static_cast<ItemId>(rng.below(m));
            bool dup = false;
            for (const auto& r : cs.local_data) dup |= r.item == item;
            if (!dup) cs.local_data.push_back({item, rng.unit(), 0});
        }
        ups.push_back(compute_item_gradients(cs, items));
    }
    for (auto _ : state) benchmark::DoNotOptimize(aggregate_grad(ups, items, 0.1));
}
BENCHMARK(BM_AggregateGrad)->Arg(100)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
