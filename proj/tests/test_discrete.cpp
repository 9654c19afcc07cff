#include <gtest/gtest.h>

#include <random>

#include "lightfr/discrete.hpp"
#include "lightfr/error.hpp"
#include "oracles.hpp"

using namespace lightfr;

namespace {

ItemCodeMatrix matrix_of(std::initializer_list<const char*> rows) {
    std::string text;
    for (const char* r : rows) (text += r) += '\n';
    return ItemCodeMatrix::from_text(text);
}

ClientState client(const char* code, std::vector<LocalRating> data, UserId id = 0) {
    return {id, BinaryCode::parse(code), std::move(data)};
}

GradientUpdate update(UserId id, std::vector<ItemId> items, std::vector<double> grads, std::uint32_t f) {
    return {id, f, std::move(items), std::move(grads)};
}

// Random client with f bits and `count` distinct rated items in an m-row matrix.
struct Instance {
    ItemCodeMatrix items;
    ClientState client;
};

Instance random_instance(std::uint32_t f, std::size_t m, std::size_t count, std::mt19937_64& g, bool dyadic = false) {
    Instance in{ItemCodeMatrix(m, f), {}};
    for (std::size_t i = 0; i < m; ++i) in.items.set_code(i, oracle::pack(oracle::random_signs(f, g)));
    in.client.code = oracle::pack(oracle::random_signs(f, g));
    std::vector<ItemId> ids(m);
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), g);
    for (std::size_t e = 0; e < count; ++e) {
        const double r = dyadic ? static_cast<double>(g() % 5) / 4.0 : static_cast<double>(g() % 1000) / 999.0;
        in.client.local_data.push_back({ids[e], r, 0});
    }
    return in;
}

std::vector<oracle::Obs> observations(const Instance& in) {
    std::vector<oracle::Obs> obs;
    for (const auto& r : in.client.local_data) obs.push_back({oracle::unpack(in.items.code(r.item)), r.rating});
    return obs;
}

}  // namespace

TEST(LocalLoss, Examples) {
    const auto d = matrix_of({"++"});
    EXPECT_DOUBLE_EQ(local_loss(client("++", {{0, 1.0}}), d, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(local_loss(client("--", {{0, 1.0}}), d, 0.0), 1.0);
    const auto c = client("++", {{0, 0.3}});
    EXPECT_DOUBLE_EQ(local_loss(c, d, 1.0), local_loss(c, d, 0.0) + 4.0);
    EXPECT_THROW(local_loss(client("++", {{3, 1.0}}), d, 0.0), Error);
}

TEST(UserBitScore, Examples) {
    const auto d = matrix_of({"++"});
    EXPECT_DOUBLE_EQ(user_bit_score(client("--", {{0, 1.0}}), d, 0, 0.0), 0.375);
    EXPECT_DOUBLE_EQ(user_bit_score(client("--", {}), d, 0, 0.0), 0.0);
    EXPECT_DOUBLE_EQ(user_bit_score(client("++", {{0, 1.0}}), d, 0, 10.0), -19.875);
}

TEST(UserBitScore, EqualsHalfTheLossDifference) {
    std::mt19937_64 g(1);
    for (int t = 0; t < 300; ++t) {
        const std::uint32_t f = 1 + g() % 24;
        const double lambda = (g() % 4) * 0.25;
        auto in = random_instance(f, 8, g() % 6, g);
        const auto obs = observations(in);
        const auto x = oracle::unpack(in.client.code);
        for (std::uint32_t k = 0; k < f; ++k)
            ASSERT_NEAR(user_bit_score(in.client, in.items, k, lambda), oracle::score_by_difference(x, obs, k, lambda),
                        1e-12);
    }
}

TEST(LocalUserUpdate, Examples) {
    const auto d = matrix_of({"++"});
    auto r = local_user_update(client("--", {{0, 1.0}}), d, 0.0, 1);
    EXPECT_EQ(r.code.to_string(), "++");
    EXPECT_EQ(r.flips, 2u);
    r = local_user_update(client("++", {{0, 1.0}}), d, 0.0, 1);
    EXPECT_EQ(r.flips, 0u);
    r = local_user_update(client("++", {{0, 1.0}}), d, 10.0, 1);
    EXPECT_EQ(r.code.to_string(), "-+");
}

TEST(LocalUserUpdate, MatchesLossDifferenceOracle) {
    std::mt19937_64 g(2);
    for (int t = 0; t < 300; ++t) {
        const std::uint32_t f = 1 + g() % 20;
        const double lambda = (g() % 3) * 0.5;
        auto in = random_instance(f, 6, 1 + g() % 5, g);
        const auto expect = oracle::dcd_by_difference(oracle::unpack(in.client.code), observations(in), lambda);
        ASSERT_EQ(oracle::unpack(local_user_update(in.client, in.items, lambda, 1).code), expect);
    }
}

TEST(LocalUserUpdate, ConvergedCodeIsOneFlipOptimal) {
    std::mt19937_64 g(3);
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t f = 8 + g() % 25;
        const double lambda = (g() % 3) * 0.05;
        auto in = random_instance(f, 10, 1 + g() % 8, g);
        in.client.code = local_user_update(in.client, in.items, lambda, 1000).code;
        ASSERT_EQ(local_user_update(in.client, in.items, lambda, 1).flips, 0u);
        const double base = local_loss(in.client, in.items, lambda);
        for (std::uint32_t k = 0; k < f; ++k) {
            auto c = in.client;
            c.code.flip(k);
            ASSERT_GE(local_loss(c, in.items, lambda), base - 1e-12);
        }
    }
}

TEST(ComputeItemGradients, Examples) {
    const auto d = matrix_of({"++"});
    auto up = compute_item_gradients(client("++", {{0, 1.0}}, 5), d);
    EXPECT_EQ(up.client_id, 5u);
    ASSERT_EQ(up.size(), 1u);
    EXPECT_DOUBLE_EQ(up.row(0)[0], 0.25);
    EXPECT_DOUBLE_EQ(up.row(0)[1], 0.25);

    // r = 1/2 + (1/2f) b_rest . d_rest zeroes the gradient: f=2, b=[+,+], d=[+,-]
    // gives rest = -1 for k=0, so r = 0.25.
    const auto d2 = matrix_of({"+-"});
    up = compute_item_gradients(client("++", {{0, 0.25}}), d2);
    EXPECT_EQ(up.row(0)[0], 0.0);

    up = compute_item_gradients(client("++", {}), d);
    EXPECT_EQ(up.size(), 0u);
}

TEST(ComputeItemGradients, MatchesNaiveDefinition) {
    std::mt19937_64 g(4);
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t f = 1 + g() % 64;
        auto in = random_instance(f, 5, 1 + g() % 5, g);
        const auto up = compute_item_gradients(in.client, in.items);
        for (std::size_t e = 0; e < up.size(); ++e) {
            const auto& r = in.client.local_data[e];
            const auto want =
                oracle::item_gradient(oracle::unpack(in.client.code), oracle::unpack(in.items.code(r.item)), r.rating);
            for (std::uint32_t k = 0; k < f; ++k) ASSERT_NEAR(up.row(e)[k], want[k], 1e-12);
        }
    }
}

TEST(ComputeItemGradients, SignFlipSymmetry) {
    std::mt19937_64 g(5);
    for (int t = 0; t < 200; ++t) {
        const std::uint32_t f = 2 + g() % 30;
        auto in = random_instance(f, 3, 1, g, true);
        auto mirror = in.client;
        mirror.code = in.client.code.complement();
        mirror.local_data[0].rating = 1.0 - in.client.local_data[0].rating;
        const auto a = compute_item_gradients(in.client, in.items);
        const auto b = compute_item_gradients(mirror, in.items);
        EXPECT_EQ(a.items, b.items);
        EXPECT_EQ(a.grads, b.grads);
    }
}

TEST(AggregateGrad, TwoClientExample) {
    const auto d = matrix_of({"+-"});
    const std::vector<GradientUpdate> ups{update(1, {0}, {-0.75, 0.25}, 2), update(0, {0}, {0.25, 0.25}, 2)};
    const auto out = aggregate_grad(ups, d, 0.0);
    EXPECT_EQ(out.items.code(0).to_string(), "-+");
    EXPECT_EQ(out.touches[0], 2u);
    EXPECT_EQ(out.flips, 2u);
}

TEST(AggregateGrad, ZeroSumsKeepCodeAndUntouchedRowsStay) {
    const auto d = matrix_of({"+-", "--"});
    const std::vector<GradientUpdate> ups{update(0, {0}, {0.5, -0.5}, 2), update(1, {0}, {-0.5, 0.5}, 2)};
    const auto out = aggregate_grad(ups, d, 0.0);
    EXPECT_EQ(out.items, d);
    EXPECT_EQ(out.touches[1], 0u);
    // Large lambda re-signs touched rows only.
    const auto heavy = aggregate_grad(std::vector<GradientUpdate>{update(0, {0}, {0, 0}, 2)}, matrix_of({"++", "++"}), 5.0);
    EXPECT_EQ(heavy.items.code(0).to_string(), "-+");
    EXPECT_EQ(heavy.items.code(1).to_string(), "++");
}

TEST(AggregateGrad, RejectsMismatchedLength) {
    const auto d = matrix_of({"+-"});
    EXPECT_THROW(aggregate_grad(std::vector<GradientUpdate>{update(0, {0}, {1, 1, 1}, 3)}, d, 0.0), Error);
    EXPECT_THROW(aggregate_grad(std::vector<GradientUpdate>{update(0, {4}, {1, 1}, 2)}, d, 0.0), Error);
}

TEST(AggregateGrad, MatchesPerBitOracle) {
    std::mt19937_64 g(6);
    for (int t = 0; t < 300; ++t) {
        const std::uint32_t f = 8;
        const std::size_t m = 1 + g() % 5, clients = 1 + g() % 4;
        const double lambda = (g() % 4) * 0.125;
        ItemCodeMatrix d(m, f);
        for (std::size_t i = 0; i < m; ++i) d.set_code(i, oracle::pack(oracle::random_signs(f, g)));
        std::vector<GradientUpdate> ups;
        for (std::size_t c = 0; c < clients; ++c) {
            ClientState cs{static_cast<UserId>(clients - c), oracle::pack(oracle::random_signs(f, g)), {}};
            for (std::size_t i = 0; i < m; ++i)
                if (g() % 2) cs.local_data.push_back({static_cast<ItemId>(i), static_cast<double>(g() % 5) / 4.0, 0});
            ups.push_back(compute_item_gradients(cs, d));
        }
        const auto got = aggregate_grad(ups, d, lambda);

        for (std::size_t i = 0; i < m; ++i) {
            auto x = oracle::unpack(d.code(i));
            std::vector<double> sum(f, 0.0);
            bool touched = false;
            for (const auto& up : ups)
                for (std::size_t e = 0; e < up.size(); ++e)
                    if (up.items[e] == i) {
                        touched = true;
                        for (std::uint32_t k = 0; k < f; ++k) sum[k] += up.row(e)[k];
                    }
            if (touched) {
                for (std::uint32_t k = 0; k < f; ++k) {
                    const double s = sum[k] / f - 2.0 * lambda * (oracle::sum(x) - x[k]);
                    if (s > 0) x[k] = 1;
                    else if (s < 0) x[k] = -1;
                }
            }
            ASSERT_EQ(oracle::unpack(got.items.code(i)), x) << "trial " << t << " item " << i;
        }
    }
}

TEST(AggregateGrad, ClientOrderDoesNotMatter) {
    std::mt19937_64 g(7);
    const std::uint32_t f = 16;
    ItemCodeMatrix d(4, f);
    std::vector<GradientUpdate> ups;
    for (UserId c = 0; c < 6; ++c) {
        GradientUpdate up{c, f, {0, 1, 3}, {}};
        for (int e = 0; e < 3 * 16; ++e) up.grads.push_back(std::uniform_real_distribution<double>(-1, 1)(g));
        ups.push_back(up);
    }
    const auto a = aggregate_grad(ups, d, 0.1);
    std::reverse(ups.begin(), ups.end());
    EXPECT_EQ(aggregate_grad(ups, d, 0.1).items, a.items);
}

TEST(AggregatePara, MajorityFallbackAndSingle) {
    const auto prev = matrix_of({"-"});
    auto up = [](UserId id, const char* c) { return ItemCodeUpload{id, {0}, {BinaryCode::parse(c)}}; };
    EXPECT_EQ(aggregate_para(std::vector{up(0, "+"), up(1, "+"), up(2, "-")}, prev).items.code(0).to_string(), "+");
    EXPECT_EQ(aggregate_para(std::vector{up(0, "+"), up(1, "-")}, prev).items.code(0).to_string(), "-");
    const auto single = aggregate_para(std::vector{ItemCodeUpload{0, {0, 1}, {BinaryCode::parse("+-+"), BinaryCode::parse("-++")}}},
                                       matrix_of({"---", "---"}));
    EXPECT_EQ(single.items, matrix_of({"+-+", "-++"}));
    EXPECT_THROW(aggregate_para(std::vector{up(0, "++")}, prev), Error);
}

TEST(LocalItemUpdate, SameRuleAsServer) {
    std::mt19937_64 g(8);
    for (int t = 0; t < 50; ++t) {
        auto in = random_instance(32, 6, 1 + g() % 6, g);
        const auto up = compute_item_gradients(in.client, in.items);
        const auto local = local_item_update(up, in.items, 0.05);
        const auto server = aggregate_grad(std::vector{up}, in.items, 0.05);
        for (std::size_t e = 0; e < local.items.size(); ++e)
            EXPECT_EQ(local.codes[e], server.items.code(local.items[e]));
    }
}

TEST(ColdStart, UserExamples) {
    const auto d = matrix_of({"++"});
    EXPECT_EQ(cold_start_user(client("--", {{0, 1.0}}), d, 1).to_string(), "++");
    EXPECT_EQ(cold_start_user(client("++", {{0, 1.0}}), d, 1).to_string(), "++");
    EXPECT_THROW(cold_start_user(client("++", {}), d, 1), Error);
}

TEST(ColdStart, UserEqualsLambdaZeroUpdate) {
    std::mt19937_64 g(9);
    for (int t = 0; t < 100; ++t) {
        auto in = random_instance(64, 10, 1 + g() % 9, g);
        EXPECT_EQ(cold_start_user(in.client, in.items, 3), local_user_update(in.client, in.items, 0.0, 3).code);
    }
}

TEST(ColdStart, ItemExamples) {
    const auto d = matrix_of({"--"});
    EXPECT_EQ(cold_start_item(std::vector{update(0, {0}, {0.25, 0.25}, 2)}, d, 0).to_string(), "++");
    EXPECT_EQ(cold_start_item(std::vector{update(0, {0}, {0.25, -0.5}, 2), update(1, {0}, {-0.25, 0.5}, 2)}, d, 0)
                  .to_string(),
              "--");
    EXPECT_EQ(cold_start_item(std::vector{update(0, {0}, {-0.05, 0.1}, 2), update(1, {0}, {-0.05, 0.1}, 2),
                                          update(2, {0}, {0.0, 0.1}, 2)},
                              d, 0)
                  .to_string(),
              "-+");
    EXPECT_THROW(cold_start_item(std::vector<GradientUpdate>{}, d, 0), Error);
}

TEST(HyperParams, Validation) {
    HyperParams hp;
    EXPECT_NO_THROW(hp.validate());
    hp.f = 12;
    EXPECT_THROW(hp.validate(), Error);
    hp = {};
    hp.client_fraction = 0.0;
    EXPECT_THROW(hp.validate(), Error);
    hp = {};
    hp.lambda = -1;
    EXPECT_THROW(hp.validate(), Error);
}
