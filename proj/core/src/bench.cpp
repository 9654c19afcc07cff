#include "lightfr/bench.hpp"

#include <chrono>
#include <iomanip>
#include <ostream>

#include "lightfr/binary_code.hpp"
#include "lightfr/error.hpp"
#include "lightfr/random.hpp"
#include "lightfr/real_matrix.hpp"
#include "lightfr/topk.hpp"

namespace lightfr {

namespace {

template <typename Fn>
double mean_seconds(std::size_t queries, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t q = 0; q < queries; ++q) fn(q);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    return elapsed.count() / static_cast<double>(queries);
}

}  // namespace

std::vector<InferenceBenchRow> bench_inference(const InferenceBenchOptions& o) {
    if (o.repetitions == 0 || o.queries == 0) throw Error("benchmark needs repetitions and queries > 0");
    std::vector<InferenceBenchRow> rows;
    for (std::size_t m : o.item_counts) {
        if (m < o.k) throw Error("benchmark item count must be at least k");
        Rng rng(derive_seed(o.seed, {m}));
        ItemCodeMatrix codes(m, o.f_bin);
        for (std::size_t i = 0; i < m; ++i) codes.set_code(i, random_code(o.f_bin, rng));
        RealMatrix vecs(m, o.f_real);
        for (double& x : vecs.data()) x = rng.uniform(-1.0, 1.0);
        std::vector<BinaryCode> qcodes;
        RealMatrix qvecs(o.queries, o.f_real);
        for (std::size_t q = 0; q < o.queries; ++q) qcodes.push_back(random_code(o.f_bin, rng));
        for (double& x : qvecs.data()) x = rng.uniform(-1.0, 1.0);

        InferenceBenchRow row;
        row.m = m;
        row.repetitions = o.repetitions;
        row.binary_bytes = codes.pack_rows().size();
        row.real_bytes = m * o.f_real * sizeof(double);
        std::size_t sink = 0;
        for (std::size_t rep = 0; rep < o.repetitions; ++rep) {
            row.hamming_seconds += mean_seconds(o.queries, [&](std::size_t q) {
                sink += top_k_hamming(qcodes[q], codes, o.k).front().item;
            });
            row.inner_seconds += mean_seconds(o.queries, [&](std::size_t q) {
                sink += top_k_inner(qvecs.row(q), vecs, o.k).front().item;
            });
        }
        row.hamming_seconds /= static_cast<double>(o.repetitions);
        row.inner_seconds /= static_cast<double>(o.repetitions);
        if (sink == static_cast<std::size_t>(-1)) row.m = 0;  // keeps the results observable
        rows.push_back(row);
    }
    return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<InferenceBenchRow>& rows) {
    out << "m,repetitions,hamming_seconds,inner_seconds,speedup,binary_bytes,real_bytes\n";
    out << std::setprecision(9);
    for (const auto& r : rows)
        out << r.m << ',' << r.repetitions << ',' << r.hamming_seconds << ',' << r.inner_seconds << ','
            << (r.hamming_seconds > 0 ? r.inner_seconds / r.hamming_seconds : 0.0) << ',' << r.binary_bytes << ','
            << r.real_bytes << '\n';
}

}  // namespace lightfr
