#include "app.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "lightfr/baselines.hpp"
#include "lightfr/bench.hpp"
#include "lightfr/corpus.hpp"
#include "lightfr/cost.hpp"
#include "lightfr/error.hpp"
#include "lightfr/fedsim.hpp"
#include "lightfr/metrics.hpp"
#include "lightfr/parallel.hpp"
#include "lightfr/privacy.hpp"

namespace lightfr::app {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::vector<std::string> kModels{"lightfr", "lightfr_para", "lightfr_init", "random", "fedmf_real"};

bool is_binary_model(const std::string& m) { return m != "fedmf_real"; }

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

// Records produced files in <out>/manifest.json, keeping entries from earlier commands.
class Outputs {
public:
    Outputs(const ExperimentConfig& c, std::string command)
        : dir_(c.out), command_(std::move(command)), hash_(config_hash(c)) {
        fs::create_directories(dir_);
    }

    fs::path path(const std::string& name) {
        files_.push_back(name);
        return dir_ / name;
    }

    void finish() {
        const fs::path mpath = dir_ / "manifest.json";
        ojson manifest = ojson::object();
        if (fs::exists(mpath)) {
            std::ifstream in(mpath);
            try {
                manifest = ojson::parse(in);
            } catch (const nlohmann::json::exception&) {
                manifest = ojson::object();
            }
        }
        if (!manifest.contains("files") || !manifest["files"].is_object()) manifest["files"] = ojson::object();
        for (const auto& f : files_) {
            if (!fs::exists(dir_ / f)) throw Error("expected output " + (dir_ / f).string() + " was not written");
            manifest["files"][f] = {{"command", command_}, {"config_hash", hash_}};
        }
        manifest["last_command"] = command_;
        manifest["config_hash"] = hash_;
        write_json(mpath, manifest);
    }

private:
    fs::path dir_;
    std::string command_;
    std::string hash_;
    std::vector<std::string> files_;
};

std::string dataset_label(const ExperimentConfig& c) {
    if (!c.dataset_name.empty()) return c.dataset_name;
    return c.data_path.empty() ? std::string("none") : fs::path(c.data_path).stem().string();
}

Dataset load_dataset(const ExperimentConfig& c) {
    if (c.data_path.empty()) throw Error("no dataset given (set data_path or pass --data)");
    return load_ratings(c.data_path, RatingFormat::parse(c.data_format));
}

void write_part_csv(const fs::path& path, const SplitDataset& split, Part p) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << "user_id,item_id,unit_rating,timestamp\n" << std::setprecision(17);
    for (UserId u = 0; u < split.n; ++u)
        for (const auto& r : split.users[u].part(p)) out << u << ',' << r.item << ',' << r.rating << ',' << r.timestamp << '\n';
}

struct Trained {
    std::vector<BinaryCode> users;
    ItemCodeMatrix items;
    RealFactors factors;
    bool binary = true;
    std::size_t upload_total = 0;
    std::size_t download_total = 0;
};

MetricsReport evaluate_trained(const Trained& t, const SplitDataset& split, const ExperimentConfig& c, unsigned workers) {
    const Scorer scorer = t.binary ? hamming_scorer(t.users, t.items) : inner_product_scorer(t.factors.P, t.factors.Q);
    return evaluate(scorer, split, c.k, c.negatives, *c.seed, workers);
}

std::size_t storage_bytes(const Trained& t) {
    if (t.binary) return t.items.pack_rows().size() + (t.users.empty() ? 0 : t.users.front().byte_count());
    return (t.factors.Q.rows() + 1) * t.factors.Q.cols() * sizeof(double);
}

ojson summary_json(const ExperimentConfig& c, const Trained& t, const MetricsReport& m) {
    const bool binary = is_binary_model(c.model);
    ojson j;
    j["model"] = c.model;
    j["dataset"] = dataset_label(c);
    j["f"] = binary ? c.hp.f : c.real_f;
    j["T"] = c.hp.rounds;
    j["E"] = c.hp.local_epochs;
    j["p"] = c.hp.client_fraction;
    j["lambda"] = binary ? c.hp.lambda : c.mf_lambda;
    j["hr_at_" + std::to_string(c.k)] = m.hr_at_k;
    j["ndcg_at_" + std::to_string(c.k)] = m.ndcg_at_k;
    j["upload_bytes_total"] = t.upload_total;
    j["download_bytes_total"] = t.download_total;
    j["storage_bytes"] = storage_bytes(t);
    j["seed"] = *c.seed;
    j["evaluated_instances"] = m.evaluated_instances;
    return j;
}

// Trains the configured model; writes per-round metrics and artifacts via `outs`
// when given.
Trained train_model(const ExperimentConfig& c, const SplitDataset& split, unsigned workers, Outputs* outs,
                    std::ostream& log) {
    Trained t;
    const std::uint64_t seed = *c.seed;
    if (c.model == "lightfr" || c.model == "lightfr_para") {
        const auto mode = c.model == "lightfr" ? Aggregation::gradient : Aggregation::parameter;
        TrainOptions opts;
        opts.workers = workers;
        opts.eval_every = c.eval_every;
        opts.patience = c.patience;
        if (c.eval_every > 0) opts.validator = make_validator(split, c.k, c.negatives, seed, workers);
        if (outs) {
            opts.metrics_csv = outs->path("metrics.csv");
            if (c.checkpoints) opts.checkpoint_dir = c.out / "checkpoints";
        }
        opts.on_round = [&log](const RoundRecord& r) {
            log << "round " << r.round << " loss " << r.loss << " item_flips " << r.item_flips << '\n';
        };
        TrainState st = train(split, c.hp, seed, mode, opts);
        for (const auto& r : st.history) {
            t.upload_total += r.upload_bytes;
            t.download_total += r.download_bytes;
        }
        t.users = st.user_codes();
        t.items = std::move(st.items);
        if (outs) save_checkpoint(make_state(split, t.items, t.users), outs->path("model.lfrc"));
    } else if (c.model == "lightfr_init") {
        c.hp.validate();
        CentralizedMfOptions o{c.hp.f, c.eta, c.mf_lambda, c.mf_epochs};
        const auto triples = split.triples(Part::train);
        auto res = centralized_mf_train(triples, split.n, split.m, o, seed);
        log << "centralized MF: squared error " << res.epoch_error.front() << " -> " << res.epoch_error.back() << '\n';
        auto codes = quantize_median(res.factors);
        t.users = std::move(codes.users);
        t.items = std::move(codes.items);
        if (outs) {
            save_factors(res.factors, outs->path("user_factors.bin"), outs->path("item_factors.bin"));
            save_checkpoint(make_state(split, t.items, t.users), outs->path("model.lfrc"));
        }
    } else if (c.model == "random") {
        c.hp.validate();
        auto codes = random_codes(split.n, split.m, c.hp.f, seed);
        t.users = std::move(codes.users);
        t.items = std::move(codes.items);
        if (outs) save_checkpoint(make_state(split, t.items, t.users), outs->path("model.lfrc"));
    } else {
        FedMfOptions o;
        o.f = c.real_f;
        o.eta = c.eta;
        o.lambda = c.mf_lambda;
        o.rounds = c.hp.rounds;
        o.client_fraction = c.hp.client_fraction;
        o.workers = workers;
        auto res = fed_mf_train(split, o, seed);
        t.binary = false;
        t.factors = std::move(res.factors);
        std::ostringstream csv;
        csv << "round,train_error,validation_error,eta,upload_bytes,download_bytes\n" << std::setprecision(17);
        for (const auto& r : res.history) {
            t.upload_total += r.upload_bytes;
            t.download_total += r.download_bytes;
            csv << r.round << ',' << r.train_error << ',' << r.validation_error << ',' << r.eta << ','
                << r.upload_bytes << ',' << r.download_bytes << '\n';
        }
        if (outs) {
            write_text(outs->path("metrics.csv"), csv.str());
            save_factors(t.factors, outs->path("user_factors.bin"), outs->path("item_factors.bin"));
        }
    }
    return t;
}

// ---- commands ----

int cmd_prepare(const ExperimentConfig& c, std::ostream& out) {
    const auto ds = load_dataset(c);
    const auto split = chronological_split(ds);
    Outputs outs(c, "prepare");
    write_part_csv(outs.path("train.csv"), split, Part::train);
    write_part_csv(outs.path("validation.csv"), split, Part::validation);
    write_part_csv(outs.path("test.csv"), split, Part::test);
    write_split_manifest(split, outs.path("split.csv"));
    ojson stats;
    stats["dataset"] = dataset_label(c);
    stats["n"] = ds.n;
    stats["m"] = ds.m;
    stats["N"] = ds.size();
    stats["duplicates_dropped"] = ds.duplicates_dropped;
    stats["rating_min"] = ds.rating_min;
    stats["rating_max"] = ds.rating_max;
    stats["density"] = ds.n && ds.m ? static_cast<double>(ds.size()) / (static_cast<double>(ds.n) * ds.m) : 0.0;
    stats["average_profile"] = ds.n ? static_cast<double>(ds.size()) / ds.n : 0.0;
    stats["train"] = split.count(Part::train);
    stats["validation"] = split.count(Part::validation);
    stats["test"] = split.count(Part::test);
    stats["evaluable_users"] = split.evaluable_users();
    write_json(outs.path("stats.json"), stats);
    outs.finish();
    out << "n=" << ds.n << " m=" << ds.m << " N=" << ds.size() << '\n';
    return 0;
}

int cmd_train(const ExperimentConfig& c, unsigned workers, std::ostream& out, std::ostream& log) {
    const auto split = chronological_split(load_dataset(c));
    Outputs outs(c, "train");
    const Trained t = train_model(c, split, workers, &outs, log);
    const auto m = evaluate_trained(t, split, c, workers);
    const auto j = summary_json(c, t, m);
    write_json(outs.path("summary.json"), j);
    write_json(outs.path("config.json"), config_to_json(c));
    outs.finish();
    out << j.dump() << '\n';
    return 0;
}

int cmd_evaluate(const ExperimentConfig& c, const std::string& checkpoint, const std::string& scorer_name,
                 unsigned workers, std::ostream& out) {
    const auto split = chronological_split(load_dataset(c));
    MetricsReport m;
    if (scorer_name == "oracle") {
        std::vector<std::unordered_set<ItemId>> positives(split.n);
        for (UserId u = 0; u < split.n; ++u)
            for (const auto& r : split.users[u].test) positives[u].insert(r.item);
        m = evaluate([&](UserId u, ItemId i) { return positives[u].count(i) ? 1.0 : 0.0; }, split, c.k, c.negatives,
                     *c.seed, workers);
    } else if (scorer_name == "model") {
        if (checkpoint.empty()) throw Error("evaluate needs --checkpoint");
        const fs::path cp(checkpoint);
        if (!fs::exists(cp)) throw Error("checkpoint not found: " + cp.string());
        Trained t;
        if (fs::is_directory(cp)) {
            t.binary = false;
            t.factors = load_factors(cp / "user_factors.bin", cp / "item_factors.bin");
            if (t.factors.P.rows() != split.n || t.factors.Q.rows() != split.m)
                throw Error("factors in " + cp.string() + " do not match the dataset shape");
        } else {
            auto ck = load_checkpoint(cp);
            if (ck.user_codes.size() != split.n || ck.items.rows() != split.m)
                throw Error("checkpoint " + cp.string() + " does not match the dataset shape");
            t.users = std::move(ck.user_codes);
            t.items = std::move(ck.items);
        }
        m = evaluate_trained(t, split, c, workers);
    } else {
        throw Error("unknown scorer '" + scorer_name + "' (expected model or oracle)");
    }
    Outputs outs(c, "evaluate");
    ojson j;
    j["model"] = scorer_name == "oracle" ? std::string("oracle") : c.model;
    j["dataset"] = dataset_label(c);
    j["checkpoint"] = checkpoint;
    j["k"] = m.k;
    j["hr_at_" + std::to_string(c.k)] = m.hr_at_k;
    j["ndcg_at_" + std::to_string(c.k)] = m.ndcg_at_k;
    j["evaluated_instances"] = m.evaluated_instances;
    j["negatives"] = c.negatives;
    j["seed"] = *c.seed;
    write_json(outs.path("evaluation.json"), j);
    outs.finish();
    out << j.dump() << '\n';
    return 0;
}

int cmd_sweep(const ExperimentConfig& base, const std::string& axis, const std::vector<double>& values,
              unsigned workers, std::ostream& out, std::ostream& log) {
    if (values.empty()) throw Error("sweep needs at least one value");
    if (axis != "f" && axis != "lambda" && axis != "p") throw Error("sweep axis must be f, lambda or p");
    if (base.model != "lightfr" && base.model != "lightfr_para")
        throw Error("sweeps run the federated binary models (lightfr, lightfr_para)");
    const auto split = chronological_split(load_dataset(base));
    Outputs outs(base, "sweep");
    std::ostringstream csv;
    csv << "axis,value,model,f,lambda,p,hr_at_" << base.k << ",ndcg_at_" << base.k
        << ",upload_bytes_total,download_bytes_total,storage_bytes\n"
        << std::setprecision(17);
    for (double v : values) {
        ExperimentConfig c = base;
        if (axis == "f") c.hp.f = static_cast<std::uint32_t>(v);
        else if (axis == "lambda") c.hp.lambda = v;
        else c.hp.client_fraction = v;
        c.hp.validate();
        log << "sweep " << axis << '=' << v << '\n';
        const Trained t = train_model(c, split, workers, nullptr, log);
        const auto m = evaluate_trained(t, split, c, workers);
        csv << axis << ',' << v << ',' << c.model << ',' << c.hp.f << ',' << c.hp.lambda << ',' << c.hp.client_fraction
            << ',' << m.hr_at_k << ',' << m.ndcg_at_k << ',' << t.upload_total << ',' << t.download_total << ','
            << storage_bytes(t) << '\n';
    }
    write_text(outs.path("sweep_" + axis + ".csv"), csv.str());
    outs.finish();
    out << csv.str();
    return 0;
}

int cmd_bench(const ExperimentConfig& c, InferenceBenchOptions o, const CostModel& cm, std::ostream& out) {
    o.seed = *c.seed;
    const auto rows = bench_inference(o);
    Outputs outs(c, "bench");
    {
        std::ofstream csv(outs.path("bench_inference.csv"), std::ios::trunc);
        write_bench_csv(csv, rows);
        write_bench_csv(out, rows);
    }
    ojson costs = ojson::array();
    std::ostringstream ccsv;
    ccsv << "model,f,storage_bytes,communication_bytes\n" << std::setprecision(17);
    for (const auto& name : cost_model_names()) {
        CostModel m = cm;
        m.f = name == "LightFR" ? c.hp.f : static_cast<double>(c.real_f);
        const auto r = cost_report(name, m);
        costs.push_back({{"model", r.model}, {"f", m.f}, {"storage_bytes", r.storage_bytes},
                         {"communication_bytes", r.communication_bytes}});
        ccsv << r.model << ',' << m.f << ',' << r.storage_bytes << ',' << r.communication_bytes << '\n';
    }
    write_text(outs.path("cost.csv"), ccsv.str());
    write_json(outs.path("cost.json"), ojson{{"m", cm.m}, {"avg_profile", cm.avg_profile}, {"models", costs}});
    outs.finish();
    out << ccsv.str();
    return 0;
}

ojson feasible_json(const FeasibleSet& fs) {
    ojson arr = ojson::array();
    for (const auto& cand : fs.candidates) arr.push_back({{"code", cand.code.to_string()}, {"rating", cand.rating}});
    return arr;
}

int cmd_privacy(const ExperimentConfig& c, std::size_t trials, std::uint32_t f, const std::vector<double>& grid,
                bool restrict_grid, unsigned workers, std::ostream& out) {
    const auto real = real_recovery_trials(trials, c.real_f, *c.seed);
    const auto amb = ambiguity_rate(trials, f, grid, *c.seed, restrict_grid, 3, workers);
    ojson j;
    j["protocol"] = "binary_gradient";
    j["trials"] = amb.trials;
    j["f"] = f;
    j["rating_grid"] = grid;
    j["restrict_to_grid"] = restrict_grid;
    j["ambiguity_rate"] = amb.rate;
    j["truth_missing"] = amb.truth_missing;
    ojson examples = ojson::array();
    for (const auto& ex : amb.examples)
        examples.push_back({{"true_code", ex.true_code.to_string()},
                            {"item_code", ex.item_code.to_string()},
                            {"true_rating", ex.true_rating},
                            {"distinct_ratings", ex.feasible.distinct_ratings()},
                            {"feasible", feasible_json(ex.feasible)}});
    j["example_feasible_sets"] = examples;
    ojson rv;
    rv["protocol"] = "real_valued";
    rv["trials"] = real.trials;
    rv["f"] = c.real_f;
    rv["max_recovery_error"] = real.max_error;
    ojson samples = ojson::array();
    for (const auto& s : real.samples) samples.push_back({{"true_rating", s.true_rating}, {"recovered", s.recovered}});
    rv["samples"] = samples;
    j["real_valued"] = rv;

    Outputs outs(c, "privacy");
    write_json(outs.path("privacy.json"), j);
    outs.finish();
    out << "real-valued protocol: max recovery error " << real.max_error << " over " << real.trials << " uploads\n";
    for (const auto& s : real.samples) out << "  true " << s.true_rating << " recovered " << s.recovered << '\n';
    out << "binary protocol: ambiguity_rate " << amb.rate << " over " << amb.trials << " trials (f=" << f << ")\n";
    return 0;
}

template <typename T>
void take(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!seed) throw Error("a seed is required (set \"seed\" in the config or pass --seed)");
    if (std::find(kModels.begin(), kModels.end(), model) == kModels.end())
        throw Error("unknown model '" + model + "'; expected lightfr, lightfr_para, lightfr_init, random or fedmf_real");
    if (k < 1) throw Error("k must be >= 1");
    if (real_f < 1) throw Error("real_f must be >= 1");
}

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig c) {
    static const std::unordered_set<std::string> known{
        "data_path", "data_format", "dataset_name", "model", "f", "lambda", "rounds", "local_epochs",
        "client_fraction", "sweeps", "weighted_aggregation", "real_f", "eta", "mf_lambda", "mf_epochs",
        "negatives", "k", "seed", "out", "eval_every", "patience", "checkpoints"};
    if (!j.is_object()) throw Error("config must be a JSON object");
    for (const auto& [key, _] : j.items())
        if (!known.count(key)) throw Error("unknown config key '" + key + "'");
    try {
        take(j, "data_path", c.data_path);
        take(j, "data_format", c.data_format);
        take(j, "dataset_name", c.dataset_name);
        take(j, "model", c.model);
        take(j, "f", c.hp.f);
        take(j, "lambda", c.hp.lambda);
        take(j, "rounds", c.hp.rounds);
        take(j, "local_epochs", c.hp.local_epochs);
        take(j, "client_fraction", c.hp.client_fraction);
        take(j, "sweeps", c.hp.sweeps);
        take(j, "weighted_aggregation", c.hp.weighted_aggregation);
        take(j, "real_f", c.real_f);
        take(j, "eta", c.eta);
        take(j, "mf_lambda", c.mf_lambda);
        take(j, "mf_epochs", c.mf_epochs);
        take(j, "negatives", c.negatives);
        take(j, "k", c.k);
        if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out")) c.out = j.at("out").get<std::string>();
        take(j, "eval_every", c.eval_every);
        take(j, "patience", c.patience);
        take(j, "checkpoints", c.checkpoints);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("bad config value: ") + e.what());
    }
    return c;
}

nlohmann::ordered_json config_to_json(const ExperimentConfig& c) {
    ojson j;
    j["data_path"] = c.data_path;
    j["data_format"] = c.data_format;
    j["dataset_name"] = c.dataset_name;
    j["model"] = c.model;
    j["f"] = c.hp.f;
    j["lambda"] = c.hp.lambda;
    j["rounds"] = c.hp.rounds;
    j["local_epochs"] = c.hp.local_epochs;
    j["client_fraction"] = c.hp.client_fraction;
    j["sweeps"] = c.hp.sweeps;
    j["weighted_aggregation"] = c.hp.weighted_aggregation;
    j["real_f"] = c.real_f;
    j["eta"] = c.eta;
    j["mf_lambda"] = c.mf_lambda;
    j["mf_epochs"] = c.mf_epochs;
    j["negatives"] = c.negatives;
    j["k"] = c.k;
    j["seed"] = c.seed ? ojson(*c.seed) : ojson(nullptr);
    j["out"] = c.out.string();
    j["eval_every"] = c.eval_every;
    j["patience"] = c.patience;
    j["checkpoints"] = c.checkpoints;
    return j;
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& c) {
    auto j = config_to_json(c);
    j.erase("out");
    const std::string text = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return hex64(h);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Federated discrete matrix factorization lab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lightfr 0.1.0");

    std::string config_path;
    nlohmann::json overrides = nlohmann::json::object();
    unsigned workers = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        auto str = [&](const char* flag, const char* key, const char* help) {
            sub->add_option_function<std::string>(flag, [&, key](const std::string& v) { overrides[key] = v; }, help);
        };
        auto num = [&](const char* flag, const char* key, const char* help) {
            sub->add_option_function<double>(flag, [&, key](double v) { overrides[key] = v; }, help);
        };
        auto uint = [&](const char* flag, const char* key, const char* help) {
            sub->add_option_function<std::uint64_t>(flag, [&, key](std::uint64_t v) { overrides[key] = v; }, help);
        };
        str("--data", "data_path", "ratings file");
        str("--format", "data_format", "movielens | csv | tsv | whitespace | literal separator");
        str("--dataset-name", "dataset_name", "label used in summaries");
        str("--model", "model", "lightfr | lightfr_para | lightfr_init | random | fedmf_real");
        str("--out", "out", "output directory");
        uint("--f", "f", "code length for binary models");
        num("--lambda", "lambda", "balance trade-off");
        uint("--rounds", "rounds", "global rounds T");
        uint("--epochs", "local_epochs", "local epochs E");
        num("--fraction", "client_fraction", "client fraction p");
        uint("--sweeps", "sweeps", "coordinate-descent passes per local epoch");
        uint("--real-f", "real_f", "dimension for real-valued models");
        num("--eta", "eta", "learning rate for real-valued models");
        num("--mf-lambda", "mf_lambda", "L2 weight for real-valued models");
        uint("--mf-epochs", "mf_epochs", "centralized MF epochs");
        uint("--negatives", "negatives", "negatives per test positive");
        uint("--k", "k", "ranking cutoff");
        uint("--seed", "seed", "master seed");
        uint("--eval-every", "eval_every", "validation cadence in rounds (0 = never)");
        uint("--patience", "patience", "early-stop patience in evaluations (0 = off)");
        sub->add_option("--workers", workers, "worker threads (default: LIGHTFR_WORKERS or CPU count)");
    };

    auto* prepare = app.add_subcommand("prepare", "split a dataset and write train/validation/test CSVs");
    auto* trainc = app.add_subcommand("train", "train a model and write metrics, checkpoints and a summary");
    auto* evalc = app.add_subcommand("evaluate", "evaluate a checkpoint on the test split");
    auto* sweep = app.add_subcommand("sweep", "train across values of f, lambda or p");
    auto* bench = app.add_subcommand("bench", "inference timing and cost table");
    auto* privacy = app.add_subcommand("privacy", "rating-recovery and ambiguity probes");
    for (auto* s : {prepare, trainc, evalc, sweep, bench, privacy}) add_common(s);
    trainc->add_flag_function("--checkpoints", [&](std::int64_t) { overrides["checkpoints"] = true; },
                              "write a checkpoint per round");

    std::string checkpoint, scorer = "model";
    evalc->add_option("--checkpoint", checkpoint, "model.lfrc file, or a directory with real-valued factors");
    evalc->add_option("--scorer", scorer, "model | oracle")->check(CLI::IsMember({"model", "oracle"}));

    std::string axis;
    std::vector<double> values;
    sweep->add_option("--axis", axis, "f | lambda | p")->required()->check(CLI::IsMember({"f", "lambda", "p"}));
    sweep->add_option("--values", values, "values to sweep")->required();

    InferenceBenchOptions bo;
    CostModel cm;
    bench->add_option("--m", bo.item_counts, "item counts");
    bench->add_option("--f-bin", bo.f_bin, "binary code length");
    bench->add_option("--f-real-bench", bo.f_real, "real dimension for timing");
    bench->add_option("--repetitions", bo.repetitions, "timed repetitions");
    bench->add_option("--queries", bo.queries, "queries per repetition");
    bench->add_option("--cost-m", cm.m, "item count for the cost table");
    bench->add_option("--avg-profile", cm.avg_profile, "mean items per user for the cost table");

    std::size_t trials = 1000;
    std::uint32_t privacy_f = 12;
    std::vector<double> grid{0.2, 0.4, 0.6, 0.8, 1.0};
    bool restrict_grid = false;
    privacy->add_option("--trials", trials, "Monte Carlo trials");
    privacy->add_option("--code-length", privacy_f, "binary code length (<= 16)");
    privacy->add_option("--grid", grid, "true-rating grid");
    privacy->add_flag("--restrict-grid", restrict_grid, "only accept feasible ratings on the grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        ExperimentConfig c;
        if (!config_path.empty()) c = load_config(config_path);
        c = config_from_json(overrides, c);
        c.validate();
        if (workers == 0) workers = default_workers();
        if (prepare->parsed()) return cmd_prepare(c, out);
        if (trainc->parsed()) return cmd_train(c, workers, out, err);
        if (evalc->parsed()) return cmd_evaluate(c, checkpoint, scorer, workers, out);
        if (sweep->parsed()) return cmd_sweep(c, axis, values, workers, out, err);
        if (bench->parsed()) return cmd_bench(c, bo, cm, out);
        if (privacy->parsed()) return cmd_privacy(c, trials, privacy_f, grid, restrict_grid, workers, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

}  // namespace lightfr::app
