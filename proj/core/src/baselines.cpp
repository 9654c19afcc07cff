#include "lightfr/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "le_io.hpp"
#include "lightfr/error.hpp"
#include "lightfr/fedsim.hpp"
#include "lightfr/parallel.hpp"
#include "lightfr/payload.hpp"
#include "lightfr/random.hpp"

namespace lightfr {

namespace {

void check_finite(std::span<const double> v, double eta, const char* what) {
    for (double x : v)
        if (!std::isfinite(x))
            throw DivergenceError(std::string(what) + " diverged (non-finite value) with learning rate eta=" +
                                  std::to_string(eta));
}

void check_ratings(std::span<const LocalRating> ratings, const RealMatrix& Q, std::size_t f) {
    if (Q.cols() != f) throw Error("user and item embeddings have different dimensions");
    for (const auto& r : ratings)
        if (r.item >= Q.rows()) throw Error("rated item " + std::to_string(r.item) + " is not in Q");
}

double median(std::vector<double> v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    const double hi = v[n / 2];
    if (n % 2 == 1) return hi;
    const double lo = *std::max_element(v.begin(), v.begin() + n / 2);
    return (lo + hi) / 2.0;
}

std::vector<BinaryCode> quantize_rows(const RealMatrix& mat) {
    const std::size_t rows = mat.rows(), f = mat.cols();
    std::vector<BinaryCode> out(rows, BinaryCode(static_cast<std::uint32_t>(f)));
    if (rows == 0) return out;
    std::vector<double> col(rows);
    for (std::size_t k = 0; k < f; ++k) {
        for (std::size_t r = 0; r < rows; ++r) col[r] = mat(r, k);
        const double med = median(col);
        for (std::size_t r = 0; r < rows; ++r)
            if (mat(r, k) > med) out[r].set(static_cast<std::uint32_t>(k), 1);
    }
    return out;
}

}  // namespace

RealFactors init_factors(std::size_t n, std::size_t m, std::size_t f, std::uint64_t seed) {
    if (f == 0) throw Error("embedding dimension must be positive");
    RealFactors out{RealMatrix(n, f), RealMatrix(m, f)};
    Rng rng(derive_seed(seed, {kTagFactors}));
    for (double& x : out.P.data()) x = rng.uniform(-0.05, 0.05);
    for (double& x : out.Q.data()) x = rng.uniform(-0.05, 0.05);
    return out;
}

std::vector<double> fed_mf_local_user_update(std::span<const double> p_u, std::span<const LocalRating> ratings,
                                             const RealMatrix& Q, double eta, double lambda) {
    if (!(eta > 0.0)) throw Error("learning rate eta must be positive");
    check_ratings(ratings, Q, p_u.size());
    std::vector<double> grad(p_u.size(), 0.0);
    for (const auto& r : ratings) {
        const auto q = Q.row(r.item);
        const double e = dot(p_u, q) - r.rating;
        for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += e * q[k];
    }
    std::vector<double> out(p_u.begin(), p_u.end());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] -= 2.0 * eta * (grad[k] + lambda * p_u[k]);
    check_finite(out, eta, "user embedding");
    return out;
}

GradientUpdate fed_mf_item_gradients(UserId client, std::span<const double> p_u,
                                     std::span<const LocalRating> ratings, const RealMatrix& Q, double lambda) {
    const std::size_t f = p_u.size();
    check_ratings(ratings, Q, f);
    GradientUpdate up;
    up.client_id = client;
    up.f = static_cast<std::uint32_t>(f);
    up.items.reserve(ratings.size());
    up.grads.resize(ratings.size() * f);
    for (std::size_t e = 0; e < ratings.size(); ++e) {
        const auto& r = ratings[e];
        const auto q = Q.row(r.item);
        const double err = dot(p_u, q) - r.rating;
        up.items.push_back(r.item);
        for (std::size_t k = 0; k < f; ++k) up.grads[e * f + k] = err * p_u[k] + lambda * q[k];
    }
    return up;
}

void fed_mf_server_item_update(RealMatrix& Q, std::span<const GradientUpdate> updates, double eta) {
    const std::size_t f = Q.cols();
    for (const auto& up : updates) {
        if (up.f != f || up.grads.size() != up.items.size() * f)
            throw Error("item gradient payload from client " + std::to_string(up.client_id) +
                        " does not match embedding dimension " + std::to_string(f));
        for (ItemId i : up.items)
            if (i >= Q.rows()) throw Error("gradient for unknown item " + std::to_string(i));
    }
    std::vector<std::size_t> order(updates.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return updates[a].client_id < updates[b].client_id; });

    RealMatrix sum(Q.rows(), f);
    std::vector<char> touched(Q.rows(), 0);
    for (std::size_t idx : order) {
        const auto& up = updates[idx];
        for (std::size_t e = 0; e < up.size(); ++e) {
            touched[up.items[e]] = 1;
            auto acc = sum.row(up.items[e]);
            const auto g = up.row(e);
            for (std::size_t k = 0; k < f; ++k) acc[k] += g[k];
        }
    }
    for (std::size_t i = 0; i < Q.rows(); ++i) {
        if (!touched[i]) continue;
        auto q = Q.row(i);
        const auto g = sum.row(i);
        for (std::size_t k = 0; k < f; ++k) q[k] -= 2.0 * eta * g[k];
        check_finite(q, eta, "item embedding");
    }
}

double mf_squared_error(const RealFactors& factors, std::span<const RatingTriple> ratings) {
    double loss = 0.0;
    for (const auto& t : ratings) {
        const double e = t.unit - dot(factors.P.row(t.user), factors.Q.row(t.item));
        loss += e * e;
    }
    return loss;
}

void mf_full_batch_step(RealFactors& factors, std::span<const RatingTriple> ratings, double eta, double lambda) {
    const std::size_t f = factors.dim();
    RealMatrix gp(factors.P.rows(), f), gq(factors.Q.rows(), f);
    for (std::size_t u = 0; u < factors.P.rows(); ++u)
        for (std::size_t k = 0; k < f; ++k) gp(u, k) = lambda * factors.P(u, k);
    for (const auto& t : ratings) {
        const auto p = factors.P.row(t.user);
        const auto q = factors.Q.row(t.item);
        const double e = dot(p, q) - t.unit;
        for (std::size_t k = 0; k < f; ++k) {
            gp(t.user, k) += e * q[k];
            gq(t.item, k) += e * p[k] + lambda * q[k];
        }
    }
    for (std::size_t x = 0; x < gp.data().size(); ++x) factors.P.data()[x] -= 2.0 * eta * gp.data()[x];
    for (std::size_t x = 0; x < gq.data().size(); ++x) factors.Q.data()[x] -= 2.0 * eta * gq.data()[x];
    check_finite(factors.P.data(), eta, "user embedding");
    check_finite(factors.Q.data(), eta, "item embedding");
}

void fed_mf_round(RealFactors& factors, const SplitDataset& split, std::span<const UserId> selected, double eta,
                  double lambda, unsigned workers, std::size_t* upload_bytes) {
    const std::size_t f = factors.dim();
    std::vector<std::vector<std::uint8_t>> payloads(selected.size());
    std::vector<std::vector<double>> new_p(selected.size());
    parallel_for(selected.size(), workers, [&](std::size_t s) {
        const UserId u = selected[s];
        const auto& data = split.users[u].train;
        const auto p = factors.P.row(u);
        payloads[s] = serialize(fed_mf_item_gradients(u, p, data, factors.Q, lambda));
        new_p[s] = fed_mf_local_user_update(p, data, factors.Q, eta, lambda);
    });
    std::vector<GradientUpdate> updates;
    updates.reserve(selected.size());
    std::size_t bytes = 0;
    for (const auto& pl : payloads) {
        bytes += pl.size();
        updates.push_back(deserialize_gradient(pl, static_cast<std::uint32_t>(f)));
    }
    fed_mf_server_item_update(factors.Q, updates, eta);
    for (std::size_t s = 0; s < selected.size(); ++s)
        std::copy(new_p[s].begin(), new_p[s].end(), factors.P.row(selected[s]).begin());
    if (upload_bytes) *upload_bytes = bytes;
}

FedMfResult fed_mf_train(const SplitDataset& split, const FedMfOptions& options, std::uint64_t seed) {
    if (!(options.eta > 0.0)) throw Error("learning rate eta must be positive");
    FedMfResult out{init_factors(split.n, split.m, options.f, seed), {}};
    const auto train = split.triples(Part::train);
    const auto valid = split.triples(Part::validation);
    const auto& watch = valid.empty() ? train : valid;
    double eta = options.eta;
    double prev = mf_squared_error(out.factors, watch);
    for (std::size_t t = 0; t < options.rounds; ++t) {
        const auto plan = select_clients(split.n, options.client_fraction, t, seed);
        FedMfRound rec;
        rec.round = t + 1;
        rec.eta = eta;
        fed_mf_round(out.factors, split, plan.selected, eta, options.lambda, options.workers, &rec.upload_bytes);
        rec.download_bytes = plan.selected.size() * split.m * options.f * sizeof(double);
        rec.train_error = mf_squared_error(out.factors, train);
        rec.validation_error = mf_squared_error(out.factors, watch);
        if (rec.validation_error > prev) eta *= options.decay;
        prev = rec.validation_error;
        out.history.push_back(rec);
    }
    return out;
}

CentralizedMfResult centralized_mf_train(std::span<const RatingTriple> ratings, std::size_t n, std::size_t m,
                                         const CentralizedMfOptions& options, std::uint64_t seed) {
    if (!(options.eta > 0.0)) throw Error("learning rate eta must be positive");
    for (const auto& t : ratings)
        if (t.user >= n || t.item >= m) throw Error("rating outside the n x m matrix");
    CentralizedMfResult out{init_factors(n, m, options.f, seed), {}};
    const std::size_t f = options.f;
    std::vector<std::size_t> order(ratings.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> p_old(f);
    for (std::size_t epoch = 0; epoch < options.epochs; ++epoch) {
        Rng rng(derive_seed(seed, {kTagShuffle, epoch}));
        for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
        for (std::size_t idx : order) {
            const auto& t = ratings[idx];
            auto p = out.factors.P.row(t.user);
            auto q = out.factors.Q.row(t.item);
            const double e = dot(p, q) - t.unit;
            std::copy(p.begin(), p.end(), p_old.begin());
            for (std::size_t k = 0; k < f; ++k) {
                p[k] -= 2.0 * options.eta * (e * q[k] + options.lambda * p[k]);
                q[k] -= 2.0 * options.eta * (e * p_old[k] + options.lambda * q[k]);
            }
        }
        const double err = mf_squared_error(out.factors, ratings);
        if (!std::isfinite(err))
            throw DivergenceError("centralized MF diverged in epoch " + std::to_string(epoch + 1) +
                                  " with learning rate eta=" + std::to_string(options.eta));
        out.epoch_error.push_back(err);
    }
    return out;
}

CodeSet quantize_median(const RealFactors& factors) {
    const std::size_t f = factors.dim();
    if (f < 1 || f > BinaryCode::kMaxBits || factors.Q.cols() != f)
        throw Error("median quantization needs matching dimensions in [1, 128]");
    CodeSet out{quantize_rows(factors.P), ItemCodeMatrix(factors.Q.rows(), static_cast<std::uint32_t>(f))};
    const auto items = quantize_rows(factors.Q);
    for (std::size_t i = 0; i < items.size(); ++i) out.items.set_code(i, items[i]);
    return out;
}

CodeSet random_codes(std::size_t n, std::size_t m, std::uint32_t f, std::uint64_t seed) {
    CodeSet out{{}, ItemCodeMatrix(m, f)};
    Rng item_rng(derive_seed(seed, {kTagItems}));
    for (std::size_t i = 0; i < m; ++i) out.items.set_code(i, random_code(f, item_rng));
    out.users.reserve(n);
    for (std::size_t u = 0; u < n; ++u) {
        Rng rng(derive_seed(seed, {kTagUsers, u}));
        out.users.push_back(random_code(f, rng));
    }
    return out;
}

void write_matrix(std::ostream& out, const RealMatrix& mat) {
    le::write<std::uint64_t>(out, mat.rows());
    le::write<std::uint64_t>(out, mat.cols());
    for (double v : mat.data()) le::write_f64(out, v);
    if (!out) throw Error("failed writing matrix");
}

RealMatrix read_matrix(std::istream& in) {
    const auto rows = le::read<std::uint64_t>(in);
    const auto cols = le::read<std::uint64_t>(in);
    if (cols == 0 || rows > (std::uint64_t{1} << 40) / cols) throw Error("matrix header has implausible shape");
    RealMatrix mat(rows, cols);
    for (double& v : mat.data()) v = le::read_f64(in);
    return mat;
}

void save_factors(const RealFactors& factors, const std::filesystem::path& users_path,
                  const std::filesystem::path& items_path) {
    for (const auto& [path, mat] : {std::pair{users_path, &factors.P}, std::pair{items_path, &factors.Q}}) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + path.string());
        write_matrix(out, *mat);
    }
}

RealFactors load_factors(const std::filesystem::path& users_path, const std::filesystem::path& items_path) {
    RealFactors out;
    for (auto [path, mat] : {std::pair{users_path, &out.P}, std::pair{items_path, &out.Q}}) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path.string());
        *mat = read_matrix(in);
    }
    if (out.P.cols() != out.Q.cols()) throw Error("user and item factor files have different dimensions");
    return out;
}

}  // namespace lightfr
