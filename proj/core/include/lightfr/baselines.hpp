#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "lightfr/binary_code.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/discrete.hpp"
#include "lightfr/real_matrix.hpp"

namespace lightfr {

/// Real-valued user (P, n x f) and item (Q, m x f) embeddings.
struct RealFactors {
    RealMatrix P;
    RealMatrix Q;

    std::size_t dim() const noexcept { return P.cols(); }
    friend bool operator==(const RealFactors&, const RealFactors&) = default;
};

/// Entries i.i.d. uniform in [-0.05, 0.05].
RealFactors init_factors(std::size_t n, std::size_t m, std::size_t f, std::uint64_t seed);

/// p_u - 2 eta (sum_i (p_u.q_i - r_ui) q_i + lambda p_u). Ratings index rows of Q.
/// Throws DivergenceError on a non-finite result.
std::vector<double> fed_mf_local_user_update(std::span<const double> p_u, std::span<const LocalRating> ratings,
                                             const RealMatrix& Q, double eta, double lambda);

/// Per rated item: (p_u.q_i - r_ui) p_u + lambda q_i.
GradientUpdate fed_mf_item_gradients(UserId client, std::span<const double> p_u,
                                     std::span<const LocalRating> ratings, const RealMatrix& Q, double lambda);

/// q_i -= 2 eta sum_u grad_ui, gradients summed over clients (ascending id)
/// before the single step. Items nobody sent are unchanged.
void fed_mf_server_item_update(RealMatrix& Q, std::span<const GradientUpdate> updates, double eta);

/// Sum of squared errors over the given ratings.
double mf_squared_error(const RealFactors& factors, std::span<const RatingTriple> ratings);

/// One full-batch gradient step on
///   sum_(u,i) [(r_ui - p_u.q_i)^2 + lambda |q_i|^2] + lambda sum_u |p_u|^2,
/// the objective whose per-client split is the federated update above.
void mf_full_batch_step(RealFactors& factors, std::span<const RatingTriple> ratings, double eta, double lambda);

struct FedMfOptions {
    std::size_t f = 32;
    double eta = 0.01;
    double lambda = 0.01;
    /// Multiply eta by this when validation error rises after a round.
    double decay = 0.9;
    std::size_t rounds = 50;
    double client_fraction = 0.6;
    unsigned workers = 1;
};

struct FedMfRound {
    std::size_t round = 0;
    double train_error = 0.0;
    double validation_error = 0.0;
    double eta = 0.0;
    std::size_t upload_bytes = 0;
    std::size_t download_bytes = 0;
};

struct FedMfResult {
    RealFactors factors;
    std::vector<FedMfRound> history;
};

/// Real-valued federated MF: per round, each selected client computes item
/// gradients with its round-start p_u, then updates p_u; the server applies
/// the summed item gradients in one step. Client sampling matches LightFR.
FedMfResult fed_mf_train(const SplitDataset& split, const FedMfOptions& options, std::uint64_t seed);

/// One federated round as above, on an explicit client list.
void fed_mf_round(RealFactors& factors, const SplitDataset& split, std::span<const UserId> selected, double eta,
                  double lambda, unsigned workers = 1, std::size_t* upload_bytes = nullptr);

struct CentralizedMfOptions {
    std::size_t f = 32;
    double eta = 0.01;
    double lambda = 0.01;
    std::size_t epochs = 50;
};

struct CentralizedMfResult {
    RealFactors factors;
    /// Training squared error after each epoch.
    std::vector<double> epoch_error;
};

/// Plain SGD over the triples in a seeded shuffled order each epoch:
/// e = p.q - r; p -= 2 eta (e q + lambda p); q -= 2 eta (e p + lambda q).
/// Throws DivergenceError on non-finite factors.
CentralizedMfResult centralized_mf_train(std::span<const RatingTriple> ratings, std::size_t n, std::size_t m,
                                         const CentralizedMfOptions& options, std::uint64_t seed);

struct CodeSet {
    std::vector<BinaryCode> users;
    ItemCodeMatrix items;
};

/// Per dimension, +1 where the value exceeds that dimension's median over its
/// population (users and items separately), else -1. f must be in [1, 128].
CodeSet quantize_median(const RealFactors& factors);

/// I.i.d. +-1 codes from the same streams init_state uses.
CodeSet random_codes(std::size_t n, std::size_t m, std::uint32_t f, std::uint64_t seed);

/// u64 rows, u64 cols, then row-major little-endian doubles.
void write_matrix(std::ostream& out, const RealMatrix& mat);
RealMatrix read_matrix(std::istream& in);
void save_factors(const RealFactors& factors, const std::filesystem::path& users_path,
                  const std::filesystem::path& items_path);
RealFactors load_factors(const std::filesystem::path& users_path, const std::filesystem::path& items_path);

}  // namespace lightfr
