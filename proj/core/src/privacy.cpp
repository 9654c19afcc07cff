#include "lightfr/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lightfr/error.hpp"
#include "lightfr/parallel.hpp"
#include "lightfr/random.hpp"
#include "lightfr/real_matrix.hpp"

namespace lightfr {

namespace {

constexpr double kAgree = 1e-9;
constexpr std::uint64_t kTagTrials = 0x50525654;

}  // namespace

double recover_rating_real(std::span<const double> p_u, std::span<const double> q_i, double gradient_k,
                           std::size_t k) {
    if (p_u.size() != q_i.size() || k >= p_u.size()) throw Error("attack dimensions do not match");
    if (p_u[k] == 0.0) throw Error("p_u[" + std::to_string(k) + "] is zero; that coordinate reveals nothing");
    return dot(p_u, q_i) - gradient_k / p_u[k];
}

std::vector<double> binary_gradient(const BinaryCode& b, const BinaryCode& d, double rating) {
    const std::uint32_t f = b.size();
    const int full = dot_pm1(b, d);
    std::vector<double> g(f);
    for (std::uint32_t k = 0; k < f; ++k) {
        const int rest = full - b.sign(k) * d.sign(k);
        g[k] = (rating - 0.5 - rest / (2.0 * f)) * b.sign(k);
    }
    return g;
}

std::vector<double> FeasibleSet::distinct_ratings(double tolerance) const {
    std::vector<double> r;
    for (const auto& c : candidates) r.push_back(c.rating);
    std::sort(r.begin(), r.end());
    std::vector<double> out;
    for (double v : r)
        if (out.empty() || v - out.back() > tolerance) out.push_back(v);
    return out;
}

FeasibleSet feasible_ratings_binary(std::span<const double> gradient, const BinaryCode& d,
                                    std::span<const double> grid) {
    const std::uint32_t f = d.size();
    if (f > 16) throw Error("feasible-set enumeration supports f <= 16, got " + std::to_string(f));
    if (gradient.size() != f) throw Error("gradient length does not match the item code");
    FeasibleSet out;
    std::vector<double> implied(f);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << f); ++mask) {
        const std::uint64_t words[2] = {mask, 0};
        const BinaryCode b = BinaryCode::from_words(f, std::span(words, 1));
        const int full = dot_pm1(b, d);
        double lo = INFINITY, hi = -INFINITY, sum = 0.0;
        for (std::uint32_t k = 0; k < f; ++k) {
            const int rest = full - b.sign(k) * d.sign(k);
            implied[k] = gradient[k] * b.sign(k) + 0.5 + rest / (2.0 * f);
            lo = std::min(lo, implied[k]);
            hi = std::max(hi, implied[k]);
            sum += implied[k];
        }
        if (hi - lo > kAgree) continue;
        const double r = sum / f;
        if (r < -kAgree || r > 1.0 + kAgree) continue;
        if (!grid.empty() &&
            std::none_of(grid.begin(), grid.end(), [r](double g) { return std::abs(g - r) <= kAgree; }))
            continue;
        out.candidates.push_back({b, r});
    }
    return out;
}

AmbiguityReport ambiguity_rate(std::size_t trials, std::uint32_t f, std::span<const double> grid,
                               std::uint64_t seed, bool restrict_to_grid, std::size_t keep_examples,
                               unsigned workers) {
    if (trials == 0) throw Error("ambiguity rate needs at least one trial");
    if (f < 1 || f > 16) throw Error("ambiguity rate supports 1 <= f <= 16");
    std::vector<AmbiguityExample> results(trials);
    parallel_for(trials, workers, [&](std::size_t t) {
        Rng rng(derive_seed(seed, {kTagTrials, t}));
        AmbiguityExample& ex = results[t];
        ex.true_code = random_code(f, rng);
        ex.item_code = random_code(f, rng);
        ex.true_rating = grid.empty() ? rng.unit() : grid[rng.below(grid.size())];
        const auto g = binary_gradient(ex.true_code, ex.item_code, ex.true_rating);
        ex.feasible = feasible_ratings_binary(g, ex.item_code, restrict_to_grid ? grid : std::span<const double>{});
    });

    AmbiguityReport rep;
    rep.trials = trials;
    for (auto& ex : results) {
        if (ex.feasible.distinct_ratings().size() >= 2) ++rep.ambiguous;
        const bool has_truth = std::any_of(ex.feasible.candidates.begin(), ex.feasible.candidates.end(), [&](const auto& c) {
            return c.code == ex.true_code && std::abs(c.rating - ex.true_rating) <= kAgree;
        });
        if (!has_truth) ++rep.truth_missing;
    }
    rep.rate = static_cast<double>(rep.ambiguous) / static_cast<double>(trials);
    for (std::size_t t = 0; t < std::min(keep_examples, trials); ++t) rep.examples.push_back(std::move(results[t]));
    return rep;
}

RecoveryReport real_recovery_trials(std::size_t trials, std::size_t f, std::uint64_t seed, std::size_t keep_samples) {
    if (trials == 0 || f == 0) throw Error("recovery trials need trials > 0 and f > 0");
    RecoveryReport rep;
    rep.trials = trials;
    Rng rng(derive_seed(seed, {kTagTrials}));
    std::vector<double> p(f), q(f);
    for (std::size_t t = 0; t < trials; ++t) {
        for (auto& x : p) x = rng.uniform(-1.0, 1.0);
        for (auto& x : q) x = rng.uniform(-1.0, 1.0);
        const double r = rng.unit();
        const double residual = dot(p, q) - r;
        double worst = 0.0, first = NAN;
        for (std::size_t k = 0; k < f; ++k) {
            if (p[k] == 0.0) continue;
            const double rec = recover_rating_real(p, q, residual * p[k], k);
            worst = std::max(worst, std::abs(rec - r));
            if (std::isnan(first)) first = rec;
        }
        rep.max_error = std::max(rep.max_error, worst);
        if (rep.samples.size() < keep_samples) rep.samples.push_back({r, first});
    }
    return rep;
}

}  // namespace lightfr
