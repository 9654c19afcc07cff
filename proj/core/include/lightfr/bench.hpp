#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace lightfr {

struct InferenceBenchOptions {
    std::vector<std::size_t> item_counts{1000, 10000, 100000};
    std::uint32_t f_bin = 64;
    std::size_t f_real = 32;
    std::size_t k = 10;
    std::size_t repetitions = 5;
    /// Queries timed per repetition; a repetition's time is their mean.
    std::size_t queries = 20;
    std::uint64_t seed = 1;
};

struct InferenceBenchRow {
    std::size_t m = 0;
    std::size_t repetitions = 0;
    /// Mean wall time of one top-k query, seconds.
    double hamming_seconds = 0.0;
    double inner_seconds = 0.0;
    /// Size of the packed item codes and of the raw double matrix.
    std::size_t binary_bytes = 0;
    std::size_t real_bytes = 0;
};

/// Times top_k_hamming against top_k_inner on random codes and vectors.
std::vector<InferenceBenchRow> bench_inference(const InferenceBenchOptions& options);

void write_bench_csv(std::ostream& out, const std::vector<InferenceBenchRow>& rows);

}  // namespace lightfr
