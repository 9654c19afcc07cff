#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"

namespace lightfr {

/// Rating implied by one coordinate of a real-valued item gradient uploaded
/// with lambda = 0, g = (p.q - r) p, when the attacker knows p and q:
/// r = p.q - g_k / p_k. Throws if p_k == 0.
double recover_rating_real(std::span<const double> p_u, std::span<const double> q_i, double gradient_k,
                           std::size_t k);

/// The binary protocol's upload for a single rated item:
/// grad_k = (r - 1/2 - (1/2f) b_{-k}.d_{-k}) b_k.
std::vector<double> binary_gradient(const BinaryCode& b, const BinaryCode& d, double rating);

struct FeasibleCandidate {
    BinaryCode code;
    double rating = 0.0;
};

struct FeasibleSet {
    std::vector<FeasibleCandidate> candidates;

    /// Ratings that differ by more than `tolerance`, ascending.
    std::vector<double> distinct_ratings(double tolerance = 1e-9) const;
};

/// Every code b in {+-1}^f (f <= 16) whose per-bit implied ratings
///   r_k = grad_k b_k + 1/2 + (1/2f) b_{-k}.d_{-k}
/// agree within 1e-9 and lie in [0, 1]; the candidate's rating is their mean.
/// With a non-empty grid the rating must also be within 1e-9 of a grid value.
/// Candidates are listed in ascending code order (bit 0 least significant).
FeasibleSet feasible_ratings_binary(std::span<const double> gradient, const BinaryCode& d,
                                    std::span<const double> grid = {});

struct AmbiguityExample {
    BinaryCode true_code;
    BinaryCode item_code;
    double true_rating = 0.0;
    FeasibleSet feasible;
};

struct AmbiguityReport {
    std::size_t trials = 0;
    std::size_t ambiguous = 0;
    double rate = 0.0;
    /// Trials where the true (b, r) was missing from the feasible set; always 0
    /// unless the enumeration is broken.
    std::size_t truth_missing = 0;
    std::vector<AmbiguityExample> examples;
};

/// Monte Carlo over random codes b, d and ratings drawn uniformly from `grid`
/// (or uniform on [0, 1] when the grid is empty): the fraction of trials whose
/// feasible set holds at least two distinct ratings. The feasible search is
/// over all real ratings unless `restrict_to_grid`. Throws if trials is 0.
AmbiguityReport ambiguity_rate(std::size_t trials, std::uint32_t f, std::span<const double> grid,
                               std::uint64_t seed, bool restrict_to_grid = false, std::size_t keep_examples = 3,
                               unsigned workers = 1);

/// Real-valued protocol: over `trials` random (p, q, r) with lambda = 0, the
/// largest |recovered - true| rating error across all usable coordinates.
struct RecoveryReport {
    std::size_t trials = 0;
    double max_error = 0.0;
    struct Sample {
        double true_rating;
        double recovered;
    };
    std::vector<Sample> samples;
};

RecoveryReport real_recovery_trials(std::size_t trials, std::size_t f, std::uint64_t seed,
                                    std::size_t keep_samples = 5);

}  // namespace lightfr
