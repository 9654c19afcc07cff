#include "lightfr/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include "le_io.hpp"
#include "lightfr/error.hpp"
#include "lightfr/parallel.hpp"
#include "lightfr/payload.hpp"
#include "lightfr/random.hpp"

namespace lightfr {

namespace {

struct ClientOutcome {
    BinaryCode code;
    std::size_t flips = 0;
    std::vector<std::uint8_t> payload;
};

// Runs one client's local epochs on a private copy of its rated rows, then
// serializes what it would send to the server.
ClientOutcome run_client(const ClientState& client, const ItemCodeMatrix& snapshot, const HyperParams& hp,
                         Aggregation mode) {
    const std::uint32_t f = snapshot.bits();
    const std::size_t rated = client.local_data.size();
    ItemCodeMatrix local(rated, f);
    ClientState view{client.user_id, client.code, {}};
    view.local_data.reserve(rated);
    for (std::size_t e = 0; e < rated; ++e) {
        const auto& r = client.local_data[e];
        local.set_code(e, snapshot.code(r.item));
        view.local_data.push_back({static_cast<ItemId>(e), r.rating, r.timestamp});
    }

    ClientOutcome out;
    GradientUpdate grads;
    for (std::size_t epoch = 0; epoch < hp.local_epochs; ++epoch) {
        auto res = local_user_update(view, local, hp.lambda, hp.sweeps);
        view.code = res.code;
        out.flips += res.flips;
        grads = compute_item_gradients(view, local);
        // Later epochs (and the parameter upload) see the locally re-signed rows.
        if (mode == Aggregation::parameter || epoch + 1 < hp.local_epochs) {
            const auto upd = local_item_update(grads, local, hp.lambda);
            for (std::size_t e = 0; e < rated; ++e) local.set_code(e, upd.codes[e]);
        }
    }
    out.code = view.code;

    std::vector<ItemId> global_ids(rated);
    for (std::size_t e = 0; e < rated; ++e) global_ids[e] = client.local_data[e].item;
    if (mode == Aggregation::gradient) {
        grads.client_id = client.user_id;
        grads.f = f;
        grads.items = std::move(global_ids);
        out.payload = serialize(grads);
    } else {
        ItemCodeUpload up{client.user_id, std::move(global_ids), {}};
        up.codes.reserve(rated);
        for (std::size_t e = 0; e < rated; ++e) up.codes.push_back(local.code(e));
        out.payload = serialize(up, f);
    }
    return out;
}

std::size_t total_train(const std::vector<ClientState>& clients) {
    std::size_t n = 0;
    for (const auto& c : clients) n += c.local_data.size();
    return n;
}

}  // namespace

RoundPlan select_clients(std::size_t n, double p, std::size_t round, std::uint64_t seed) {
    if (!(p > 0.0 && p <= 1.0)) throw Error("client fraction p must lie in (0, 1]");
    RoundPlan plan{round, {}, derive_seed(seed, {kTagRound, round})};
    if (n == 0) return plan;
    const auto want = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(p * static_cast<double>(n))), 1, n);
    std::vector<UserId> pool(n);
    std::iota(pool.begin(), pool.end(), UserId{0});
    Rng rng(plan.seed);
    for (std::size_t i = 0; i < want; ++i) std::swap(pool[i], pool[i + rng.below(n - i)]);
    pool.resize(want);
    std::sort(pool.begin(), pool.end());
    plan.selected = std::move(pool);
    return plan;
}

std::vector<BinaryCode> TrainState::user_codes() const {
    std::vector<BinaryCode> out;
    out.reserve(clients.size());
    for (const auto& c : clients) out.push_back(c.code);
    return out;
}

TrainState make_state(const SplitDataset& split, ItemCodeMatrix items, std::span<const BinaryCode> user_codes) {
    if (items.rows() != split.m) throw Error("item matrix has " + std::to_string(items.rows()) + " rows, dataset has " +
                                             std::to_string(split.m) + " items");
    if (user_codes.size() != split.n) throw Error("expected one code per user");
    TrainState st;
    st.items = std::move(items);
    st.clients.resize(split.n);
    for (std::size_t u = 0; u < split.n; ++u) {
        if (user_codes[u].size() != st.items.bits()) throw Error("user and item code lengths differ");
        st.clients[u] = {static_cast<UserId>(u), user_codes[u], split.users[u].train};
    }
    return st;
}

TrainState init_state(const SplitDataset& split, const HyperParams& hp, std::uint64_t seed) {
    hp.validate();
    ItemCodeMatrix items(split.m, hp.f);
    Rng item_rng(derive_seed(seed, {kTagItems}));
    for (std::size_t i = 0; i < split.m; ++i) items.set_code(i, random_code(hp.f, item_rng));
    std::vector<BinaryCode> users;
    users.reserve(split.n);
    for (std::size_t u = 0; u < split.n; ++u) {
        Rng rng(derive_seed(seed, {kTagUsers, u}));
        users.push_back(random_code(hp.f, rng));
    }
    return make_state(split, std::move(items), users);
}

double global_loss(const TrainState& state, double lambda, unsigned workers) {
    const std::size_t n = state.clients.size();
    std::vector<double> per_user(n);
    parallel_for(n, workers, [&](std::size_t u) {
        const auto& c = state.clients[u];
        per_user[u] = local_loss(c, state.items, lambda);
    });
    double loss = 0.0;
    for (double v : per_user) loss += v;
    for (std::size_t i = 0; i < state.items.rows(); ++i) {
        const double s = state.items.code(i).sum();
        loss += lambda * s * s;
    }
    return loss;
}

const RoundRecord& run_round(TrainState& state, const RoundPlan& plan, const HyperParams& hp, Aggregation mode,
                             unsigned workers) {
    hp.validate();
    if (plan.round != state.round)
        throw Error("round plan " + std::to_string(plan.round) + " does not match state round " +
                    std::to_string(state.round));
    for (UserId u : plan.selected)
        if (u >= state.clients.size()) throw Error("plan selects unknown client " + std::to_string(u));

    const ItemCodeMatrix& snapshot = state.items;
    const std::size_t download = snapshot.pack_rows().size();
    std::vector<ClientOutcome> outcomes(plan.selected.size());
    parallel_for(plan.selected.size(), workers, [&](std::size_t s) {
        outcomes[s] = run_client(state.clients[plan.selected[s]], snapshot, hp, mode);
    });

    RoundRecord rec;
    rec.round = plan.round + 1;
    rec.participants = plan.selected.size();
    rec.download_bytes = download * plan.selected.size();
    for (std::size_t s = 0; s < outcomes.size(); ++s) {
        rec.upload_bytes += outcomes[s].payload.size();
        rec.user_flips += outcomes[s].flips;
    }

    const std::uint32_t f = snapshot.bits();
    AggregateResult agg;
    if (mode == Aggregation::gradient) {
        std::vector<GradientUpdate> updates;
        updates.reserve(outcomes.size());
        for (const auto& o : outcomes) updates.push_back(deserialize_gradient(o.payload, f));
        AggregateOptions opts{hp.lambda, static_cast<double>(total_train(state.clients)), hp.weighted_aggregation};
        agg = aggregate_grad(updates, snapshot, opts);
    } else {
        std::vector<ItemCodeUpload> uploads;
        uploads.reserve(outcomes.size());
        for (const auto& o : outcomes) uploads.push_back(deserialize_codes(o.payload, f));
        agg = aggregate_para(uploads, snapshot);
    }
    rec.item_flips = agg.flips;

    state.items = std::move(agg.items);
    for (std::size_t s = 0; s < outcomes.size(); ++s) state.clients[plan.selected[s]].code = outcomes[s].code;
    ++state.round;
    rec.loss = global_loss(state, hp.lambda, workers);
    state.history.push_back(std::move(rec));
    return state.history.back();
}

Validator make_validator(const SplitDataset& split, std::size_t k, std::size_t negatives, std::uint64_t seed,
                         unsigned workers) {
    auto instances = std::make_shared<const std::vector<EvalInstance>>(
        build_eval_instances(split, Part::validation, negatives, seed));
    if (instances->empty()) return {};
    return [instances, k, workers](const TrainState& state) {
        const auto users = state.user_codes();
        return evaluate(hamming_scorer(users, state.items), *instances, k, workers);
    };
}

void write_round_csv_header(std::ostream& out) {
    out << "round,loss,hr_at_10,ndcg_at_10,flips,upload_bytes,download_bytes,user_flips,participants\n";
}

void write_round_csv_row(std::ostream& out, const RoundRecord& r) {
    out << r.round << ',' << std::setprecision(17) << r.loss << ',';
    if (r.validation) out << r.validation->hr_at_k << ',' << r.validation->ndcg_at_k;
    else out << ',';
    out << ',' << r.item_flips << ',' << r.upload_bytes << ',' << r.download_bytes << ',' << r.user_flips << ','
        << r.participants << '\n';
}

void train(TrainState& state, const HyperParams& hp, std::uint64_t seed, Aggregation mode,
           const TrainOptions& options) {
    hp.validate();
    std::ofstream csv;
    if (!options.metrics_csv.empty()) {
        csv.open(options.metrics_csv, std::ios::trunc);
        if (!csv) throw Error("cannot write " + options.metrics_csv.string());
        write_round_csv_header(csv);
    }
    if (!options.checkpoint_dir.empty()) std::filesystem::create_directories(options.checkpoint_dir);

    double best_hr = -1.0;
    std::size_t stale = 0;
    while (state.round < hp.rounds) {
        const auto plan = select_clients(state.clients.size(), hp.client_fraction, state.round, seed);
        run_round(state, plan, hp, mode, options.workers);
        RoundRecord& rec = state.history.back();

        bool stop = false;
        if (options.eval_every > 0 && options.validator && rec.round % options.eval_every == 0) {
            rec.validation = options.validator(state);
            if (rec.validation->hr_at_k > best_hr) {
                best_hr = rec.validation->hr_at_k;
                stale = 0;
            } else if (options.patience > 0 && ++stale >= options.patience) {
                stop = true;
            }
        }
        if (!options.checkpoint_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof name, "round-%04zu.lfrc", rec.round);
            save_checkpoint(state, options.checkpoint_dir / name);
        }
        if (csv.is_open()) {
            write_round_csv_row(csv, rec);
            csv.flush();
        }
        if (options.on_round) options.on_round(rec);
        if (stop) break;
    }
}

TrainState train(const SplitDataset& split, const HyperParams& hp, std::uint64_t seed, Aggregation mode,
                 const TrainOptions& options) {
    TrainState state = init_state(split, hp, seed);
    train(state, hp, seed, mode, options);
    return state;
}

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write checkpoint " + path.string());
    out.write("LFRC", 4);
    le::write<std::uint64_t>(out, state.round);
    le::write<std::uint64_t>(out, state.clients.size());
    le::write<std::uint32_t>(out, state.items.bits());
    std::vector<std::uint8_t> buf;
    for (const auto& c : state.clients) {
        buf.assign(c.code.byte_count(), 0);
        c.code.to_bytes(buf);
        out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    }
    state.items.write(out);
    if (!out) throw Error("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open checkpoint " + path.string());
    le::expect_magic(in, "LFRC", "checkpoint");
    Checkpoint cp;
    cp.round = le::read<std::uint64_t>(in);
    const auto n = le::read<std::uint64_t>(in);
    const auto f = le::read<std::uint32_t>(in);
    if (f < 1 || f > BinaryCode::kMaxBits) throw Error("checkpoint has invalid code length");
    std::vector<std::uint8_t> buf((f + 7) / 8);
    cp.user_codes.reserve(n);
    for (std::uint64_t u = 0; u < n; ++u) {
        in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!in) throw Error("truncated checkpoint " + path.string());
        cp.user_codes.push_back(BinaryCode::from_bytes(f, buf));
    }
    cp.items = ItemCodeMatrix::read(in);
    if (cp.items.bits() != f) throw Error("checkpoint code lengths disagree");
    return cp;
}

}  // namespace lightfr
