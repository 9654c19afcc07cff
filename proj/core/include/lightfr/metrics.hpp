#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/real_matrix.hpp"

namespace lightfr {

struct MetricsReport {
    double hr_at_k = 0.0;
    double ndcg_at_k = 0.0;
    std::size_t k = 10;
    std::size_t evaluated_instances = 0;
};

/// score(user, item); higher ranks first. Must be safe to call concurrently.
using Scorer = std::function<double(UserId, ItemId)>;

/// 1-based rank of `positive` among {positive} + negatives by descending score.
/// A negative with an equal score outranks the positive iff its id is lower.
std::size_t rank_of_positive(UserId user, ItemId positive, std::span<const ItemId> negatives, const Scorer& score);

/// Fraction of ranks <= k. Throws on an empty list.
double hr_at_k(std::span<const std::size_t> ranks, std::size_t k);

/// Mean of 1/log2(rank + 1) over ranks <= k (0 otherwise); one relevant item
/// per instance, so the ideal DCG is 1. Throws on an empty list.
double ndcg_at_k(std::span<const std::size_t> ranks, std::size_t k);

/// Ranks of every instance's positive, in instance order.
std::vector<std::size_t> rank_instances(const Scorer& score, std::span<const EvalInstance> instances,
                                        unsigned workers = 1);

/// HR@k and NDCG@k averaged over all instances. Throws if there are none.
MetricsReport evaluate(const Scorer& score, std::span<const EvalInstance> instances, std::size_t k,
                       unsigned workers = 1);

/// Builds the test instances (negatives fixed per seed) and evaluates them.
MetricsReport evaluate(const Scorer& score, const SplitDataset& split, std::size_t k,
                       std::size_t negatives_per_positive, std::uint64_t seed, unsigned workers = 1);

/// Hamming similarity between user and item codes. Holds references: the
/// arguments must outlive the scorer.
Scorer hamming_scorer(const std::vector<BinaryCode>& users, const ItemCodeMatrix& items);

/// Inner product p_u . q_i. Holds references.
Scorer inner_product_scorer(const RealMatrix& users, const RealMatrix& items);

}  // namespace lightfr
