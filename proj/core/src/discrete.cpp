#include "lightfr/discrete.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "lightfr/error.hpp"

namespace lightfr {

namespace {

void check_items(const BinaryCode& code, std::span<const LocalRating> ratings, const ItemCodeMatrix& items) {
    if (code.size() != items.bits())
        throw Error("client code has " + std::to_string(code.size()) + " bits but item codes have " +
                    std::to_string(items.bits()));
    for (const auto& r : ratings)
        if (r.item >= items.rows()) throw Error("rated item " + std::to_string(r.item) + " is not in the item matrix");
}

// Sum_i (r_i - 1/2 - c_i/(2f)) * d_ik with c_i = dot_i - b_k d_ik, scaled by
// 1/f, minus the balance term. Shared by user_bit_score and the DCD loop so both
// produce bit-identical scores.
double bit_score(std::span<const LocalRating> ratings, std::span<const int> dots, const ItemCodeMatrix& items,
                 std::uint32_t k, int b_k, int code_sum, double lambda) {
    const double two_f = 2.0 * items.bits();
    double acc = 0.0;
    for (std::size_t e = 0; e < ratings.size(); ++e) {
        const int d_ik = items.sign(ratings[e].item, k);
        const int rest = dots[e] - b_k * d_ik;
        acc += (ratings[e].rating - 0.5 - rest / two_f) * d_ik;
    }
    return acc / items.bits() - 2.0 * lambda * (code_sum - b_k);
}

std::vector<int> dots_with(const BinaryCode& code, std::span<const LocalRating> ratings, const ItemCodeMatrix& items) {
    std::vector<int> dots(ratings.size());
    for (std::size_t e = 0; e < ratings.size(); ++e) dots[e] = dot_pm1(code, items.code(ratings[e].item));
    return dots;
}

// Applies the sign-with-fallback rule to each bit of `code` in order, given
// per-bit gradient sums. Returns the number of flipped bits.
std::size_t resign_bits(BinaryCode& code, std::span<const double> sums, double lambda) {
    const std::uint32_t f = code.size();
    int code_sum = code.sum();
    std::size_t flips = 0;
    for (std::uint32_t k = 0; k < f; ++k) {
        const int d_k = code.sign(k);
        const double score = sums[k] / f - 2.0 * lambda * (code_sum - d_k);
        if (score == 0.0) continue;
        const int s = score > 0.0 ? 1 : -1;
        if (s != d_k) {
            code.set(k, s);
            code_sum += 2 * s;
            ++flips;
        }
    }
    return flips;
}

}  // namespace

const char* to_string(Aggregation a) noexcept { return a == Aggregation::gradient ? "grad" : "para"; }

void HyperParams::validate() const {
    if (f != 8 && f != 16 && f != 32 && f != 64 && f != 128)
        throw Error("code length f must be one of 8, 16, 32, 64, 128; got " + std::to_string(f));
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw Error("lambda must be a finite value >= 0");
    if (!(client_fraction > 0.0 && client_fraction <= 1.0)) throw Error("client fraction p must lie in (0, 1]");
    if (sweeps < 1) throw Error("sweeps must be >= 1");
    if (local_epochs < 1) throw Error("local epochs E must be >= 1");
}

double squared_error(const BinaryCode& code, std::span<const LocalRating> ratings, const ItemCodeMatrix& items) {
    check_items(code, ratings, items);
    double loss = 0.0;
    for (const auto& r : ratings) {
        const double e = r.rating - hamming_similarity(code, items.code(r.item));
        loss += e * e;
    }
    return loss;
}

double local_loss(const ClientState& client, const ItemCodeMatrix& items, double lambda) {
    const double balance = static_cast<double>(client.code.sum());
    return squared_error(client.code, client.local_data, items) + lambda * balance * balance;
}

double user_bit_score(const ClientState& client, const ItemCodeMatrix& items, std::uint32_t k, double lambda) {
    check_items(client.code, client.local_data, items);
    if (k >= client.code.size()) throw Error("bit index out of range");
    const auto dots = dots_with(client.code, client.local_data, items);
    return bit_score(client.local_data, dots, items, k, client.code.sign(k), client.code.sum(), lambda);
}

UserUpdateResult local_user_update(const ClientState& client, const ItemCodeMatrix& items, double lambda,
                                   std::size_t sweeps) {
    check_items(client.code, client.local_data, items);
    UserUpdateResult out{client.code, 0};
    auto dots = dots_with(out.code, client.local_data, items);
    int code_sum = out.code.sum();
    const std::uint32_t f = out.code.size();

    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        std::size_t flips_this_sweep = 0;
        for (std::uint32_t k = 0; k < f; ++k) {
            const int b_k = out.code.sign(k);
            const double score = bit_score(client.local_data, dots, items, k, b_k, code_sum, lambda);
            if (score == 0.0) continue;
            const int s = score > 0.0 ? 1 : -1;
            if (s == b_k) continue;
            out.code.set(k, s);
            code_sum += 2 * s;
            for (std::size_t e = 0; e < dots.size(); ++e) dots[e] += 2 * s * items.sign(client.local_data[e].item, k);
            ++flips_this_sweep;
        }
        out.flips += flips_this_sweep;
        if (flips_this_sweep == 0) break;  // fixed point; later sweeps cannot change anything
    }
    return out;
}

GradientUpdate compute_item_gradients(const ClientState& client, const ItemCodeMatrix& items) {
    check_items(client.code, client.local_data, items);
    const std::uint32_t f = client.code.size();
    const double two_f = 2.0 * f;
    GradientUpdate up;
    up.client_id = client.user_id;
    up.f = f;
    up.items.reserve(client.local_data.size());
    up.grads.resize(client.local_data.size() * f);
    for (std::size_t e = 0; e < client.local_data.size(); ++e) {
        const auto& r = client.local_data[e];
        up.items.push_back(r.item);
        const int dot = dot_pm1(client.code, items.code(r.item));
        for (std::uint32_t k = 0; k < f; ++k) {
            const int b_k = client.code.sign(k);
            const int rest = dot - b_k * items.sign(r.item, k);
            up.grads[e * f + k] = (r.rating - 0.5 - rest / two_f) * b_k;
        }
    }
    return up;
}

AggregateResult aggregate_grad(std::span<const GradientUpdate> updates, const ItemCodeMatrix& items,
                               const AggregateOptions& options) {
    const std::uint32_t f = items.bits();
    const std::size_t m = items.rows();
    for (const auto& up : updates) {
        if (up.f != f)
            throw Error("gradient update from client " + std::to_string(up.client_id) + " has f=" +
                        std::to_string(up.f) + ", expected " + std::to_string(f));
        if (up.grads.size() != up.items.size() * f) throw Error("malformed gradient update");
        for (ItemId i : up.items)
            if (i >= m) throw Error("gradient for unknown item " + std::to_string(i));
    }
    if (options.weighted && !(options.total_instances > 0.0))
        throw Error("weighted aggregation needs a positive instance total");

    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return updates[a].client_id < updates[b].client_id; });

    AggregateResult out{items, std::vector<std::uint32_t>(m, 0), 0};
    std::vector<std::int64_t> slot(m, -1);
    std::vector<ItemId> touched;
    std::vector<double> sums;
    for (std::size_t idx : order) {
        const auto& up = updates[idx];
        const double w = options.weighted ? static_cast<double>(up.size()) / options.total_instances : 1.0;
        for (std::size_t e = 0; e < up.size(); ++e) {
            const ItemId i = up.items[e];
            if (slot[i] < 0) {
                slot[i] = static_cast<std::int64_t>(touched.size());
                touched.push_back(i);
                sums.resize(sums.size() + f, 0.0);
            }
            ++out.touches[i];
            double* acc = sums.data() + static_cast<std::size_t>(slot[i]) * f;
            const auto row = up.row(e);
            if (options.weighted) {
                for (std::uint32_t k = 0; k < f; ++k) acc[k] += w * row[k];
            } else {
                for (std::uint32_t k = 0; k < f; ++k) acc[k] += row[k];
            }
        }
    }

    std::vector<std::size_t> by_item(touched.size());
    std::iota(by_item.begin(), by_item.end(), 0);
    std::sort(by_item.begin(), by_item.end(), [&](std::size_t a, std::size_t b) { return touched[a] < touched[b]; });
    for (std::size_t s : by_item) {
        const ItemId i = touched[s];
        BinaryCode code = out.items.code(i);
        out.flips += resign_bits(code, std::span(sums).subspan(s * f, f), options.lambda);
        out.items.set_code(i, code);
    }
    return out;
}

ItemCodeUpload local_item_update(const GradientUpdate& update, const ItemCodeMatrix& items, double lambda) {
    if (update.f != items.bits()) throw Error("gradient update length does not match item codes");
    ItemCodeUpload out;
    out.client_id = update.client_id;
    out.items = update.items;
    out.codes.reserve(update.size());
    for (std::size_t e = 0; e < update.size(); ++e) {
        BinaryCode code = items.code(update.items[e]);
        resign_bits(code, update.row(e), lambda);
        out.codes.push_back(code);
    }
    return out;
}

AggregateResult aggregate_para(std::span<const ItemCodeUpload> uploads, const ItemCodeMatrix& previous) {
    const std::uint32_t f = previous.bits();
    const std::size_t m = previous.rows();
    AggregateResult out{previous, std::vector<std::uint32_t>(m, 0), 0};
    std::vector<std::int64_t> slot(m, -1);
    std::vector<ItemId> touched;
    std::vector<int> votes;
    for (const auto& up : uploads) {
        if (up.items.size() != up.codes.size()) throw Error("malformed item code upload");
        for (std::size_t e = 0; e < up.items.size(); ++e) {
            const ItemId i = up.items[e];
            if (i >= m) throw Error("upload for unknown item " + std::to_string(i));
            if (up.codes[e].size() != f) throw Error("uploaded code length does not match item codes");
            if (slot[i] < 0) {
                slot[i] = static_cast<std::int64_t>(touched.size());
                touched.push_back(i);
                votes.resize(votes.size() + f, 0);
            }
            ++out.touches[i];
            int* acc = votes.data() + static_cast<std::size_t>(slot[i]) * f;
            for (std::uint32_t k = 0; k < f; ++k) acc[k] += up.codes[e].sign(k);
        }
    }
    for (std::size_t s = 0; s < touched.size(); ++s) {
        const ItemId i = touched[s];
        for (std::uint32_t k = 0; k < f; ++k) {
            const int v = votes[s * f + k];
            if (v == 0) continue;
            const int sgn = v > 0 ? 1 : -1;
            if (sgn != out.items.sign(i, k)) {
                out.items.set(i, k, sgn);
                ++out.flips;
            }
        }
    }
    return out;
}

BinaryCode cold_start_user(const ClientState& client, const ItemCodeMatrix& items, std::size_t sweeps) {
    if (client.local_data.empty())
        throw Error("cold-start user " + std::to_string(client.user_id) +
                    " has no ratings; zero-interaction users need side information");
    return local_user_update(client, items, 0.0, sweeps).code;
}

BinaryCode cold_start_item(std::span<const GradientUpdate> updates, const ItemCodeMatrix& items, ItemId item) {
    if (updates.empty()) throw Error("cold-start item " + std::to_string(item) + " has no client gradients");
    for (const auto& up : updates)
        if (up.items.size() != 1 || up.items.front() != item)
            throw Error("cold-start updates must carry exactly item " + std::to_string(item));
    return aggregate_grad(updates, items, 0.0).items.code(item);
}

}  // namespace lightfr
