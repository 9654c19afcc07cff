#include "lightfr/topk.hpp"

#include <algorithm>
#include <bit>
#include <string>

#include "lightfr/error.hpp"

namespace lightfr {

namespace {

std::vector<char> exclusion_mask(std::size_t m, std::span<const ItemId> exclude, std::size_t& excluded) {
    excluded = 0;
    if (exclude.empty()) return {};
    std::vector<char> mask(m, 0);
    for (ItemId i : exclude) {
        if (i < m && !mask[i]) {
            mask[i] = 1;
            ++excluded;
        }
    }
    return mask;
}

void check_k(std::size_t k, std::size_t m, std::size_t excluded) {
    if (k < 1 || k > m - excluded)
        throw Error("top-k needs 1 <= k <= " + std::to_string(m - excluded) + " candidates, got k=" + std::to_string(k));
}

// Bounded selection keeping the k best (key, id) pairs. `Better(a, b)` orders
// keys; ids break ties ascending. The heap top is the current worst.
template <typename Key, typename Better>
class Selector {
public:
    Selector(std::size_t k, Better better) : k_(k), better_(better) { heap_.reserve(k); }

    void offer(Key key, ItemId id) {
        if (heap_.size() < k_) {
            heap_.push_back({key, id});
            std::push_heap(heap_.begin(), heap_.end(), worse_on_top());
            return;
        }
        // Ids arrive ascending, so an equal key never displaces an earlier id.
        if (!better_(key, heap_.front().key)) return;
        std::pop_heap(heap_.begin(), heap_.end(), worse_on_top());
        heap_.back() = {key, id};
        std::push_heap(heap_.begin(), heap_.end(), worse_on_top());
    }

    template <typename ToScore>
    std::vector<ScoredItem> finish(ToScore to_score) {
        std::sort(heap_.begin(), heap_.end(), [&](const Entry& a, const Entry& b) { return ranks_before(a, b); });
        std::vector<ScoredItem> out;
        out.reserve(heap_.size());
        for (const auto& e : heap_) out.push_back({e.id, to_score(e.key)});
        return out;
    }

private:
    struct Entry {
        Key key;
        ItemId id;
    };

    bool ranks_before(const Entry& a, const Entry& b) const {
        if (better_(a.key, b.key)) return true;
        if (better_(b.key, a.key)) return false;
        return a.id < b.id;
    }
    auto worse_on_top() const {
        return [this](const Entry& a, const Entry& b) { return ranks_before(a, b); };
    }

    std::size_t k_;
    Better better_;
    std::vector<Entry> heap_;
};

}  // namespace

std::vector<ScoredItem> top_k_hamming(const BinaryCode& query, const ItemCodeMatrix& items, std::size_t k,
                                      std::span<const ItemId> exclude) {
    if (query.size() != items.bits())
        throw Error("query length " + std::to_string(query.size()) + " does not match item codes of length " +
                    std::to_string(items.bits()));
    const std::size_t m = items.rows();
    std::size_t excluded = 0;
    const auto mask = exclusion_mask(m, exclude, excluded);
    check_k(k, m, excluded);

    auto fewer_differences = [](std::uint32_t a, std::uint32_t b) { return a < b; };
    Selector<std::uint32_t, decltype(fewer_differences)> sel(k, fewer_differences);
    const auto data = items.data();
    const std::size_t wpr = items.words_per_row();
    const std::uint64_t* q = query.words();

    if (wpr == 1 && mask.empty()) {
        const std::uint64_t q0 = q[0];
        for (std::size_t i = 0; i < m; ++i)
            sel.offer(static_cast<std::uint32_t>(std::popcount(data[i] ^ q0)), static_cast<ItemId>(i));
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            if (!mask.empty() && mask[i]) continue;
            std::uint32_t h = 0;
            for (std::size_t w = 0; w < wpr; ++w) h += static_cast<std::uint32_t>(std::popcount(data[i * wpr + w] ^ q[w]));
            sel.offer(h, static_cast<ItemId>(i));
        }
    }
    const double f = items.bits();
    return sel.finish([f](std::uint32_t h) { return 0.5 + (f - 2.0 * h) / (2.0 * f); });
}

std::vector<ScoredItem> top_k_inner(std::span<const double> query, const RealMatrix& items, std::size_t k,
                                    std::span<const ItemId> exclude) {
    if (query.size() != items.cols())
        throw Error("query dimension " + std::to_string(query.size()) + " does not match item dimension " +
                    std::to_string(items.cols()));
    const std::size_t m = items.rows();
    std::size_t excluded = 0;
    const auto mask = exclusion_mask(m, exclude, excluded);
    check_k(k, m, excluded);

    auto higher = [](double a, double b) { return a > b; };
    Selector<double, decltype(higher)> sel(k, higher);
    for (std::size_t i = 0; i < m; ++i) {
        if (!mask.empty() && mask[i]) continue;
        sel.offer(dot(query, items.row(i)), static_cast<ItemId>(i));
    }
    return sel.finish([](double s) { return s; });
}

}  // namespace lightfr
