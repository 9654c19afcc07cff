#include "lightfr/corpus.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

#include "lightfr/error.hpp"

namespace lightfr {

namespace {

std::string read_maybe_gzipped(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw Error("ratings file not found: " + path.string());
    // gzread passes uncompressed files through unchanged.
    gzFile file = gzopen(path.c_str(), "rb");
    if (file == nullptr) throw Error("cannot open ratings file: " + path.string());
    std::string out;
    char buf[1 << 16];
    for (;;) {
        const int got = gzread(file, buf, sizeof buf);
        if (got < 0) {
            int code = 0;
            std::string msg = gzerror(file, &code);
            gzclose(file);
            throw Error("cannot read " + path.string() + ": " + msg);
        }
        if (got == 0) break;
        out.append(buf, static_cast<std::size_t>(got));
    }
    gzclose(file);
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line, const std::string& sep) {
    std::vector<std::string_view> fields;
    if (sep.empty()) {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i == line.size()) break;
            const std::size_t start = i;
            while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
            fields.push_back(line.substr(start, i - start));
        }
        return fields;
    }
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + sep.size();
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
    const char* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

std::uint32_t intern(std::unordered_map<std::string, std::uint32_t>& index, std::vector<std::string>& keys,
                     std::string_view key) {
    auto [it, inserted] = index.try_emplace(std::string(key), static_cast<std::uint32_t>(keys.size()));
    if (inserted) keys.emplace_back(key);
    return it->second;
}

}  // namespace

RatingFormat RatingFormat::parse(const std::string& name) {
    if (name == "movielens" || name == "ml") return movielens();
    if (name == "csv") return csv();
    if (name == "tsv") return {"\t", std::nullopt, std::nullopt};
    if (name == "whitespace" || name == "ws" || name.empty()) return whitespace();
    return {name, std::nullopt, std::nullopt};
}

namespace {

Dataset parse_source(const std::string& text, const RatingFormat& format, const std::string& source) {
    const std::string where = source.empty() ? std::string() : source + ": ";
    Dataset ds;
    std::unordered_map<std::string, std::uint32_t> user_index;
    std::unordered_map<std::string, std::uint32_t> item_index;
    std::unordered_map<std::uint64_t, std::size_t> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string_view line = trim(std::string_view(text).substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;

        auto fields = split_fields(line, format.separator);
        for (auto& f : fields) f = trim(f);
        if (fields.size() < 3 || fields.size() > 4)
            throw ParseError(line_no, where + "expected user, item, rating[, timestamp] but found " +
                                          std::to_string(fields.size()) + " field(s)");
        if (fields[0].empty() || fields[1].empty()) throw ParseError(line_no, where + "empty user or item field");

        double rating = 0.0;
        if (!parse_number(fields[2], rating) || !std::isfinite(rating))
            throw ParseError(line_no, where + "rating is not a number: '" + std::string(fields[2]) + "'");
        std::int64_t timestamp = static_cast<std::int64_t>(line_no - 1);
        if (fields.size() == 4 && !parse_number(fields[3], timestamp))
            throw ParseError(line_no, where + "timestamp is not an integer: '" + std::string(fields[3]) + "'");
        if (format.rating_max && rating > *format.rating_max)
            throw ParseError(line_no, where + "rating " + std::string(fields[2]) + " exceeds declared maximum");
        if (format.rating_min && rating < *format.rating_min)
            throw ParseError(line_no, where + "rating " + std::string(fields[2]) + " below declared minimum");

        const UserId u = intern(user_index, ds.user_keys, fields[0]);
        const ItemId i = intern(item_index, ds.item_keys, fields[1]);
        const std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) | i;
        RatingTriple t{u, i, rating, 0.0, timestamp};
        if (auto [it, inserted] = seen.try_emplace(key, ds.ratings.size()); inserted) {
            ds.ratings.push_back(t);
        } else {
            ds.ratings[it->second] = t;
            ++ds.duplicates_dropped;
        }
    }

    if (ds.ratings.empty()) throw ParseError(0, where + "no ratings found");

    ds.n = ds.user_keys.size();
    ds.m = ds.item_keys.size();
    auto [lo, hi] = std::minmax_element(ds.ratings.begin(), ds.ratings.end(),
                                        [](const auto& a, const auto& b) { return a.rating < b.rating; });
    ds.rating_min = format.rating_min.value_or(lo->rating);
    ds.rating_max = format.rating_max.value_or(hi->rating);
    if (!(ds.rating_max > 0.0)) throw ParseError(0, where + "rating maximum must be positive");
    for (auto& t : ds.ratings) t.unit = normalize_rating(t.rating, ds.rating_max);
    return ds;
}

}  // namespace

Dataset parse_ratings(const std::string& text, const RatingFormat& format) { return parse_source(text, format, {}); }

Dataset load_ratings(const std::filesystem::path& path, const RatingFormat& format) {
    return parse_source(read_maybe_gzipped(path), format, path.string());
}

const char* to_string(Part p) noexcept {
    switch (p) {
        case Part::train: return "train";
        case Part::validation: return "validation";
        case Part::test: return "test";
    }
    return "?";
}

SplitCounts split_counts(std::size_t total, const SplitFractions& fractions) {
    if (total < 3) return {total, 0, 0};
    const auto t = static_cast<double>(total);
    auto train = static_cast<std::size_t>(std::llround(fractions.train * t));
    train = std::clamp<std::size_t>(train, 1, total - 1);
    auto val = static_cast<std::size_t>(std::floor(fractions.validation * t));
    val = std::min(val, total - train - 1);
    return {train, val, total - train - val};
}

const std::vector<LocalRating>& UserSplit::part(Part p) const noexcept {
    switch (p) {
        case Part::train: return train;
        case Part::validation: return validation;
        case Part::test: return test;
    }
    return train;
}

std::size_t SplitDataset::count(Part p) const noexcept {
    std::size_t c = 0;
    for (const auto& u : users) c += u.part(p).size();
    return c;
}

std::size_t SplitDataset::evaluable_users() const noexcept {
    return static_cast<std::size_t>(std::count_if(users.begin(), users.end(), [](const auto& u) { return u.evaluable; }));
}

std::vector<RatingTriple> SplitDataset::triples(Part p) const {
    std::vector<RatingTriple> out;
    out.reserve(count(p));
    for (UserId u = 0; u < users.size(); ++u)
        for (const auto& r : users[u].part(p)) out.push_back({u, r.item, r.rating, r.rating, r.timestamp});
    return out;
}

bool SplitDataset::has_interacted(UserId u, ItemId i) const {
    const auto& items = interacted.at(u);
    return std::binary_search(items.begin(), items.end(), i);
}

SplitDataset chronological_split(const Dataset& ds, const SplitFractions& fractions) {
    SplitDataset out;
    out.n = ds.n;
    out.m = ds.m;
    out.users.resize(ds.n);
    out.item_users.resize(ds.m);
    out.interacted.resize(ds.n);

    std::vector<std::vector<LocalRating>> per_user(ds.n);
    for (const auto& t : ds.ratings) per_user[t.user].push_back({t.item, t.unit, t.timestamp});

    for (UserId u = 0; u < ds.n; ++u) {
        auto& rows = per_user[u];
        std::sort(rows.begin(), rows.end(), [](const LocalRating& a, const LocalRating& b) {
            return a.timestamp != b.timestamp ? a.timestamp < b.timestamp : a.item < b.item;
        });
        const SplitCounts c = split_counts(rows.size(), fractions);
        auto& us = out.users[u];
        us.train.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(c.train));
        us.validation.assign(rows.begin() + static_cast<std::ptrdiff_t>(c.train),
                             rows.begin() + static_cast<std::ptrdiff_t>(c.train + c.validation));
        us.test.assign(rows.begin() + static_cast<std::ptrdiff_t>(c.train + c.validation), rows.end());
        us.evaluable = !us.test.empty();

        for (const auto& r : us.train) out.item_users[r.item].push_back(u);
        auto& seen = out.interacted[u];
        for (const auto& r : rows) seen.push_back(r.item);
        std::sort(seen.begin(), seen.end());
    }
    return out;
}

std::vector<ItemId> sample_negatives(UserId user, std::size_t count, const SplitDataset& split, Rng& rng) {
    const auto& taken = split.interacted.at(user);
    const std::size_t candidates = split.m - taken.size();
    if (count > candidates)
        throw Error("user " + std::to_string(user) + " has only " + std::to_string(candidates) +
                    " non-interacted items, cannot sample " + std::to_string(count) + " negatives");

    std::vector<ItemId> out;
    out.reserve(count);
    if (count * 2 <= candidates) {
        // Sparse case: rejection sampling against the interaction list.
        std::unordered_set<ItemId> chosen;
        while (out.size() < count) {
            const auto item = static_cast<ItemId>(rng.below(split.m));
            if (std::binary_search(taken.begin(), taken.end(), item)) continue;
            if (chosen.insert(item).second) out.push_back(item);
        }
        return out;
    }
    std::vector<ItemId> pool;
    pool.reserve(candidates);
    for (ItemId i = 0, t = 0; i < split.m; ++i) {
        if (t < taken.size() && taken[t] == i) {
            ++t;
            continue;
        }
        pool.push_back(i);
    }
    for (std::size_t j = 0; j < count; ++j) {
        const std::size_t pick = j + rng.below(pool.size() - j);
        std::swap(pool[j], pool[pick]);
        out.push_back(pool[j]);
    }
    return out;
}

std::vector<EvalInstance> build_eval_instances(const SplitDataset& split, Part part, std::size_t negatives,
                                               std::uint64_t seed) {
    std::vector<EvalInstance> out;
    for (UserId u = 0; u < split.users.size(); ++u) {
        const auto& us = split.users[u];
        if (!us.evaluable) continue;
        for (const auto& r : us.part(part)) {
            Rng rng(derive_seed(seed, {kTagNegatives, u, r.item}));
            out.push_back({u, r.item, sample_negatives(u, negatives, split, rng)});
        }
    }
    return out;
}

void write_split_manifest(const SplitDataset& split, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << "user_id,item_id,unit_rating,timestamp,split\n";
    char buf[64];
    for (UserId u = 0; u < split.users.size(); ++u) {
        for (Part p : {Part::train, Part::validation, Part::test}) {
            for (const auto& r : split.users[u].part(p)) {
                auto [end, ec] = std::to_chars(buf, buf + sizeof buf, r.rating);
                out << u << ',' << r.item << ',' << std::string_view(buf, static_cast<std::size_t>(end - buf)) << ','
                    << r.timestamp << ',' << to_string(p) << '\n';
            }
        }
    }
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace lightfr
