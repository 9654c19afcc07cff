#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"

namespace lightfr {

/// One federated participant: its private code b_u and its local ratings
/// (unit scale). Item ids in `local_data` are unique.
struct ClientState {
    UserId user_id = 0;
    BinaryCode code;
    std::vector<LocalRating> local_data;
};

/// Per-bit item gradients one client uploads: `grads` holds f values for each
/// entry of `items`, row-major.
struct GradientUpdate {
    UserId client_id = 0;
    std::uint32_t f = 0;
    std::vector<ItemId> items;
    std::vector<double> grads;

    std::size_t size() const noexcept { return items.size(); }
    std::span<const double> row(std::size_t e) const noexcept { return {grads.data() + e * f, f}; }
};

/// Item rows a client re-signed locally, uploaded for parameter aggregation.
struct ItemCodeUpload {
    UserId client_id = 0;
    std::vector<ItemId> items;
    std::vector<BinaryCode> codes;
};

enum class Aggregation : std::uint8_t { gradient, parameter };

const char* to_string(Aggregation a) noexcept;

struct HyperParams {
    std::uint32_t f = 64;
    double lambda = 0.6;
    std::size_t rounds = 50;       // T
    std::size_t local_epochs = 1;  // E
    double client_fraction = 0.6;  // p
    std::size_t sweeps = 1;        // DCD passes over the bits per local epoch
    /// Scale each client's gradients by |I_u| / N before summing. Off by default.
    bool weighted_aggregation = false;

    /// Throws unless f is one of 8, 16, 32, 64, 128, lambda >= 0, 0 < p <= 1 and
    /// sweeps >= 1.
    void validate() const;
};

/// Sum over the client's ratings of (r - sim(b_u, d_i))^2 plus lambda * (sum_k b_uk)^2.
double local_loss(const ClientState& client, const ItemCodeMatrix& items, double lambda);

/// Squared-error part of local_loss only.
double squared_error(const BinaryCode& code, std::span<const LocalRating> ratings, const ItemCodeMatrix& items);

/// Coordinate score for bit k of the client's code:
///   sum_i (1/f) (r_ui - 1/2 - (1/2f) d_{i,-k}.b_{u,-k}) d_ik - 2 lambda sum_{k' != k} b_uk'.
/// Setting b_uk to its sign minimizes local_loss over that bit.
double user_bit_score(const ClientState& client, const ItemCodeMatrix& items, std::uint32_t k, double lambda);

struct UserUpdateResult {
    BinaryCode code;
    std::size_t flips = 0;
};

/// `sweeps` passes of discrete coordinate descent over bits 0..f-1. Each bit
/// takes the sign of its score, or keeps its value when the score is exactly
/// zero. Scores see bits flipped earlier in the same pass.
UserUpdateResult local_user_update(const ClientState& client, const ItemCodeMatrix& items, double lambda,
                                   std::size_t sweeps);

/// Per rated item and bit: (r - 1/2 - (1/2f) b_{u,-k}.d_{i,-k}) * b_uk, against
/// the item codes as downloaded.
GradientUpdate compute_item_gradients(const ClientState& client, const ItemCodeMatrix& items);

struct AggregateResult {
    ItemCodeMatrix items;
    /// Number of updates that carried each item.
    std::vector<std::uint32_t> touches;
    std::size_t flips = 0;
};

struct AggregateOptions {
    double lambda = 0.0;
    /// When set, gradients from client u are scaled by |I_u| / total_instances.
    double total_instances = 0.0;
    bool weighted = false;
};

/// Server-side gradient aggregation. For every item carried by at least one
/// update, bits k = 0..f-1 in order take sign((1/f) sum_u grad_uik - 2 lambda
/// sum_{k' != k} d_ik') with the current bits, or keep their value on an exact
/// zero. Updates are summed in ascending client id. Other items are unchanged.
AggregateResult aggregate_grad(std::span<const GradientUpdate> updates, const ItemCodeMatrix& items,
                               const AggregateOptions& options);

inline AggregateResult aggregate_grad(std::span<const GradientUpdate> updates, const ItemCodeMatrix& items,
                                      double lambda) {
    return aggregate_grad(updates, items, AggregateOptions{lambda});
}

/// Client-side step of parameter aggregation: the client's rated rows of D
/// re-signed from its own gradients, same rule as aggregate_grad.
ItemCodeUpload local_item_update(const GradientUpdate& update, const ItemCodeMatrix& items, double lambda);

/// Server-side parameter aggregation: per uploaded item, the elementwise sign
/// of the sum of uploaded codes; a zero sum keeps the bit from `previous`.
/// Items nobody uploaded keep their previous code.
AggregateResult aggregate_para(std::span<const ItemCodeUpload> uploads, const ItemCodeMatrix& previous);

/// Code for a new client against existing item codes: local_user_update with
/// lambda = 0. Throws if the client has no ratings.
BinaryCode cold_start_user(const ClientState& client, const ItemCodeMatrix& items, std::size_t sweeps);

/// Code for a new item from existing clients' gradients on it (aggregation with
/// lambda = 0). All updates must carry exactly that one item; `items` holds the
/// item's current (initial) code at row `item`.
BinaryCode cold_start_item(std::span<const GradientUpdate> updates, const ItemCodeMatrix& items, ItemId item);

}  // namespace lightfr
