#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lightfr/random.hpp"

namespace lightfr {

using UserId = std::uint32_t;
using ItemId = std::uint32_t;

struct RatingTriple {
    UserId user = 0;
    ItemId item = 0;
    double rating = 0.0;  // raw scale
    double unit = 0.0;    // rating / rating_max
    std::int64_t timestamp = 0;
};

/// Ratings with contiguous 0-based user and item indices.
struct Dataset {
    std::vector<RatingTriple> ratings;
    std::size_t n = 0;  // users
    std::size_t m = 0;  // items
    double rating_min = 0.0;
    double rating_max = 0.0;

    // Index maps: user_keys[u] is the identifier that appeared in the source file.
    std::vector<std::string> user_keys;
    std::vector<std::string> item_keys;

    std::size_t duplicates_dropped = 0;

    std::size_t size() const noexcept { return ratings.size(); }
};

/// How a ratings file is laid out.
struct RatingFormat {
    /// Field separator. "::" for MovieLens-1M, "," for CSV; empty means any run of
    /// spaces or tabs.
    std::string separator;
    /// Overrides the detected scale bounds. Ratings outside an explicit range are
    /// rejected.
    std::optional<double> rating_min;
    std::optional<double> rating_max;

    static RatingFormat movielens() { return {"::", std::nullopt, std::nullopt}; }
    static RatingFormat csv() { return {",", std::nullopt, std::nullopt}; }
    static RatingFormat whitespace() { return {"", std::nullopt, std::nullopt}; }

    /// "movielens" | "csv" | "tsv" | "whitespace" | a literal separator string.
    static RatingFormat parse(const std::string& name);
};

/// Reads `user sep item sep rating [sep timestamp]` lines. Files ending in .gz,
/// or starting with the gzip magic, are decompressed transparently.
///
/// Lines without a timestamp take their 0-based line position as timestamp, so
/// file order stands in for chronology. Blank lines and lines starting with '#'
/// are skipped. A repeated (user, item) pair replaces the earlier record.
Dataset load_ratings(const std::filesystem::path& path, const RatingFormat& format);

/// Same as load_ratings, over an in-memory buffer.
Dataset parse_ratings(const std::string& text, const RatingFormat& format);

inline double normalize_rating(double r, double rating_max) noexcept { return r / rating_max; }

// --- splitting --------------------------------------------------------------

struct LocalRating {
    ItemId item = 0;
    double rating = 0.0;  // unit scale
    std::int64_t timestamp = 0;
};

enum class Part : std::uint8_t { train, validation, test };

const char* to_string(Part p) noexcept;

struct SplitFractions {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

/// Counts for one user's chronological split.
struct SplitCounts {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

/// Split policy for a user with `total` interactions. Below 3 interactions
/// everything goes to train. Otherwise train = round(train_fraction * total)
/// clamped to [1, total - 1], validation = floor(validation_fraction * total)
/// clamped so at least one test interaction remains, test takes the rest.
SplitCounts split_counts(std::size_t total, const SplitFractions& fractions);

struct UserSplit {
    std::vector<LocalRating> train;
    std::vector<LocalRating> validation;
    std::vector<LocalRating> test;
    bool evaluable = false;

    const std::vector<LocalRating>& part(Part p) const noexcept;
};

struct SplitDataset {
    std::size_t n = 0;
    std::size_t m = 0;
    std::vector<UserSplit> users;
    /// Omega_i: train users of each item, ascending.
    std::vector<std::vector<UserId>> item_users;
    /// Every item a user touched in any part, ascending.
    std::vector<std::vector<ItemId>> interacted;

    std::size_t count(Part p) const noexcept;
    std::size_t evaluable_users() const noexcept;
    /// Flattened view of one part; `rating` and `unit` both hold the unit-scale value.
    std::vector<RatingTriple> triples(Part p) const;
    bool has_interacted(UserId u, ItemId i) const;
};

/// Sorts each user's interactions by (timestamp, item) and splits them.
SplitDataset chronological_split(const Dataset& ds, const SplitFractions& fractions = {});

/// `count` distinct items the user never interacted with, in sampling order.
/// Deterministic for a given generator state.
std::vector<ItemId> sample_negatives(UserId user, std::size_t count, const SplitDataset& split, Rng& rng);

/// One ranking instance: a held-out positive and its fixed negatives.
struct EvalInstance {
    UserId user = 0;
    ItemId positive = 0;
    std::vector<ItemId> negatives;
};

/// Instances for every (evaluable user, positive in `part`) pair. Negatives are
/// drawn once per pair from a stream derived from (seed, user, item).
std::vector<EvalInstance> build_eval_instances(const SplitDataset& split, Part part, std::size_t negatives,
                                               std::uint64_t seed);

/// Writes user_id,item_id,unit_rating,timestamp,split rows, users ascending,
/// each user's rows in chronological order.
void write_split_manifest(const SplitDataset& split, const std::filesystem::path& path);

}  // namespace lightfr
