#include "lightfr/metrics.hpp"

#include <cmath>

#include "lightfr/error.hpp"
#include "lightfr/parallel.hpp"

namespace lightfr {

std::size_t rank_of_positive(UserId user, ItemId positive, std::span<const ItemId> negatives, const Scorer& score) {
    const double pos = score(user, positive);
    std::size_t rank = 1;
    for (ItemId neg : negatives) {
        const double s = score(user, neg);
        if (s > pos || (s == pos && neg < positive)) ++rank;
    }
    return rank;
}

double hr_at_k(std::span<const std::size_t> ranks, std::size_t k) {
    if (ranks.empty()) throw Error("hit ratio of an empty rank list");
    std::size_t hits = 0;
    for (auto r : ranks) hits += r <= k ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(ranks.size());
}

double ndcg_at_k(std::span<const std::size_t> ranks, std::size_t k) {
    if (ranks.empty()) throw Error("NDCG of an empty rank list");
    double sum = 0.0;
    for (auto r : ranks)
        if (r <= k) sum += 1.0 / std::log2(static_cast<double>(r) + 1.0);
    return sum / static_cast<double>(ranks.size());
}

std::vector<std::size_t> rank_instances(const Scorer& score, std::span<const EvalInstance> instances,
                                        unsigned workers) {
    std::vector<std::size_t> ranks(instances.size());
    parallel_for(instances.size(), workers, [&](std::size_t i) {
        const auto& inst = instances[i];
        ranks[i] = rank_of_positive(inst.user, inst.positive, inst.negatives, score);
    });
    return ranks;
}

MetricsReport evaluate(const Scorer& score, std::span<const EvalInstance> instances, std::size_t k,
                       unsigned workers) {
    if (instances.empty()) throw Error("no evaluable instances");
    const auto ranks = rank_instances(score, instances, workers);
    return {hr_at_k(ranks, k), ndcg_at_k(ranks, k), k, ranks.size()};
}

MetricsReport evaluate(const Scorer& score, const SplitDataset& split, std::size_t k,
                       std::size_t negatives_per_positive, std::uint64_t seed, unsigned workers) {
    if (split.evaluable_users() == 0) throw Error("no evaluable users in split");
    const auto instances = build_eval_instances(split, Part::test, negatives_per_positive, seed);
    return evaluate(score, instances, k, workers);
}

Scorer hamming_scorer(const std::vector<BinaryCode>& users, const ItemCodeMatrix& items) {
    return [&users, &items](UserId u, ItemId i) {
        const BinaryCode& b = users[u];
        const std::size_t wpr = items.words_per_row();
        const auto row = items.data().subspan(i * wpr, wpr);
        int h = 0;
        for (std::size_t w = 0; w < wpr; ++w) h += std::popcount(b.words()[w] ^ row[w]);
        const double f = items.bits();
        return 0.5 + (f - 2.0 * h) / (2.0 * f);
    };
}

Scorer inner_product_scorer(const RealMatrix& users, const RealMatrix& items) {
    return [&users, &items](UserId u, ItemId i) { return dot(users.row(u), items.row(i)); };
}

}  // namespace lightfr
