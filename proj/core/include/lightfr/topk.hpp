#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/real_matrix.hpp"

namespace lightfr {

struct ScoredItem {
    ItemId item = 0;
    double score = 0.0;

    friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

/// The k items with the highest Hamming similarity to `query`, best first;
/// ties go to the lower item id. `exclude` lists item ids to skip (any order).
/// Throws unless 1 <= k <= m - |exclude|.
std::vector<ScoredItem> top_k_hamming(const BinaryCode& query, const ItemCodeMatrix& items, std::size_t k,
                                      std::span<const ItemId> exclude = {});

/// Same contract as top_k_hamming, scored by inner product.
std::vector<ScoredItem> top_k_inner(std::span<const double> query, const RealMatrix& items, std::size_t k,
                                    std::span<const ItemId> exclude = {});

}  // namespace lightfr
