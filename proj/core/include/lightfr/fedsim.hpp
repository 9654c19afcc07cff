#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/discrete.hpp"
#include "lightfr/metrics.hpp"

namespace lightfr {

/// Clients taking part in one round (0-based index), ascending by id.
struct RoundPlan {
    std::size_t round = 0;
    std::vector<UserId> selected;
    std::uint64_t seed = 0;
};

/// Uniform sample without replacement of max(1, round(p * n)) of the n clients,
/// deterministic in (seed, round). Returns an empty plan when n is 0.
RoundPlan select_clients(std::size_t n, double p, std::size_t round, std::uint64_t seed);

struct RoundRecord {
    /// 1-based: the record of plan.round t has round t + 1.
    std::size_t round = 0;
    std::size_t participants = 0;
    /// Global objective after the round: squared error over all train ratings
    /// plus lambda times every user's and item's squared code sum.
    double loss = 0.0;
    std::size_t item_flips = 0;
    std::size_t user_flips = 0;
    /// Serialized bytes actually produced by the selected clients.
    std::size_t upload_bytes = 0;
    /// Packed item matrix size times the number of selected clients.
    std::size_t download_bytes = 0;
    std::optional<MetricsReport> validation;
};

struct TrainState {
    ItemCodeMatrix items;
    std::vector<ClientState> clients;
    std::vector<RoundRecord> history;
    /// Number of completed rounds.
    std::size_t round = 0;

    std::vector<BinaryCode> user_codes() const;
};

/// Random item matrix and user codes (one stream per user) from `seed`. Every
/// user becomes a client holding its train ratings.
TrainState init_state(const SplitDataset& split, const HyperParams& hp, std::uint64_t seed);

/// State with the given codes instead of random ones.
TrainState make_state(const SplitDataset& split, ItemCodeMatrix items, std::span<const BinaryCode> user_codes);

/// The global objective used in RoundRecord::loss.
double global_loss(const TrainState& state, double lambda, unsigned workers = 1);

/// One round: every selected client runs E local epochs of user update and item
/// gradient computation against the round-start item matrix, uploads a
/// serialized payload, and the server aggregates the decoded payloads.
/// Clients not in the plan are untouched. Appends to history and returns the
/// record. Throws if plan.round != state.round.
const RoundRecord& run_round(TrainState& state, const RoundPlan& plan, const HyperParams& hp, Aggregation mode,
                             unsigned workers = 1);

/// Validation hook: metrics for the current state.
using Validator = std::function<MetricsReport(const TrainState&)>;

/// HR/NDCG@k on the validation part with fixed negatives drawn from `seed`.
/// Returns an empty function when no user has validation interactions.
Validator make_validator(const SplitDataset& split, std::size_t k, std::size_t negatives, std::uint64_t seed,
                         unsigned workers = 1);

struct TrainOptions {
    unsigned workers = 1;
    /// Evaluate every this many rounds (0 = never).
    std::size_t eval_every = 0;
    Validator validator;
    /// Stop when validation HR fails to improve for this many consecutive
    /// evaluations (0 = never).
    std::size_t patience = 0;
    /// When set, a checkpoint per round is written here.
    std::filesystem::path checkpoint_dir;
    /// When set, the file is truncated and one row per round appended.
    std::filesystem::path metrics_csv;
    std::function<void(const RoundRecord&)> on_round;
};

/// Runs the remaining rounds state.round .. hp.rounds - 1 (0-based), drawing
/// each round's plan from (seed, round).
void train(TrainState& state, const HyperParams& hp, std::uint64_t seed, Aggregation mode,
           const TrainOptions& options = {});

TrainState train(const SplitDataset& split, const HyperParams& hp, std::uint64_t seed, Aggregation mode,
                 const TrainOptions& options = {});

/// Round-level snapshot: item matrix, user codes and completed round count.
/// Binary: "LFRC" magic, u64 round, u64 n, u32 f, n packed codes, then the
/// item matrix in its own binary form.
struct Checkpoint {
    std::size_t round = 0;
    ItemCodeMatrix items;
    std::vector<BinaryCode> user_codes;
};

void save_checkpoint(const TrainState& state, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Header: round,loss,hr_at_10,ndcg_at_10,flips,upload_bytes,download_bytes,user_flips,participants.
/// Metrics are empty on rounds without evaluation.
void write_round_csv_header(std::ostream& out);
void write_round_csv_row(std::ostream& out, const RoundRecord& r);

}  // namespace lightfr
