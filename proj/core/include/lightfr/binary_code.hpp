#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lightfr {

/// A vector in {-1,+1}^f packed into 64-bit words. Bit k set means component +1.
/// Padding bits above f are always zero.
class BinaryCode {
public:
    static constexpr std::uint32_t kMaxBits = 128;
    static constexpr std::size_t kWords = kMaxBits / 64;

    BinaryCode() = default;
    /// All components -1.
    explicit BinaryCode(std::uint32_t f);

    /// From +1/-1 components (any positive value counts as +1).
    static BinaryCode from_signs(std::span<const int> signs);
    /// From a string of '+' and '-' characters.
    static BinaryCode parse(const std::string& text);
    /// From ceil(f/64) words; padding bits are cleared.
    static BinaryCode from_words(std::uint32_t f, std::span<const std::uint64_t> words);
    /// From ceil(f/8) little-endian bytes.
    static BinaryCode from_bytes(std::uint32_t f, std::span<const std::uint8_t> bytes);

    std::uint32_t size() const noexcept { return f_; }
    std::size_t word_count() const noexcept { return (f_ + 63) / 64; }
    const std::uint64_t* words() const noexcept { return w_.data(); }

    int sign(std::uint32_t k) const noexcept { return ((w_[k >> 6] >> (k & 63)) & 1u) ? 1 : -1; }
    bool bit(std::uint32_t k) const noexcept { return ((w_[k >> 6] >> (k & 63)) & 1u) != 0; }
    void set(std::uint32_t k, int s) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (k & 63);
        if (s > 0) w_[k >> 6] |= mask; else w_[k >> 6] &= ~mask;
    }
    void flip(std::uint32_t k) noexcept { w_[k >> 6] ^= std::uint64_t{1} << (k & 63); }

    /// Number of +1 components.
    std::uint32_t ones() const noexcept {
        return static_cast<std::uint32_t>(std::popcount(w_[0]) + std::popcount(w_[1]));
    }
    /// Sum of the +-1 components, in [-f, f].
    int sum() const noexcept { return 2 * static_cast<int>(ones()) - static_cast<int>(f_); }

    BinaryCode complement() const;
    std::vector<int> to_signs() const;
    std::string to_string() const;
    void to_bytes(std::span<std::uint8_t> out) const;
    std::size_t byte_count() const noexcept { return (f_ + 7) / 8; }

    friend bool operator==(const BinaryCode&, const BinaryCode&) = default;

private:
    std::uint32_t f_ = 0;
    std::array<std::uint64_t, kWords> w_{};
};

std::size_t hamming_distance(const BinaryCode& a, const BinaryCode& b);

/// Sum_k a_k * b_k computed as f - 2 * hamming distance. Throws on length mismatch.
int dot_pm1(const BinaryCode& a, const BinaryCode& b);

/// 1/2 + dot/(2f), in [0, 1].
double hamming_similarity(const BinaryCode& a, const BinaryCode& b);

/// m codes of a shared length f, stored row-major in 64-bit words.
class ItemCodeMatrix {
public:
    ItemCodeMatrix() = default;
    /// m rows of all -1 codes.
    ItemCodeMatrix(std::size_t m, std::uint32_t f);

    std::size_t rows() const noexcept { return m_; }
    std::uint32_t bits() const noexcept { return f_; }
    std::size_t words_per_row() const noexcept { return wpr_; }
    std::span<const std::uint64_t> data() const noexcept { return data_; }

    BinaryCode code(std::size_t i) const;
    void set_code(std::size_t i, const BinaryCode& c);
    int sign(std::size_t i, std::uint32_t k) const noexcept {
        return ((data_[i * wpr_ + (k >> 6)] >> (k & 63)) & 1u) ? 1 : -1;
    }
    void set(std::size_t i, std::uint32_t k, int s) noexcept {
        const std::uint64_t mask = std::uint64_t{1} << (k & 63);
        auto& w = data_[i * wpr_ + (k >> 6)];
        if (s > 0) w |= mask; else w &= ~mask;
    }

    /// Rows packed to ceil(f/8) little-endian bytes each, no header. This is the
    /// wire form a client downloads: m * f / 8 bytes when 8 divides f.
    std::vector<std::uint8_t> pack_rows() const;
    static ItemCodeMatrix unpack_rows(std::size_t m, std::uint32_t f, std::span<const std::uint8_t> bytes);

    /// Binary form: "LFRD" magic, u32 f, u64 m, then pack_rows(). Little-endian.
    void write(std::ostream& out) const;
    static ItemCodeMatrix read(std::istream& in);
    void save(const std::filesystem::path& path) const;
    static ItemCodeMatrix load(const std::filesystem::path& path);

    /// One row of '+'/'-' per item.
    std::string to_text() const;
    static ItemCodeMatrix from_text(const std::string& text);

    friend bool operator==(const ItemCodeMatrix&, const ItemCodeMatrix&) = default;

private:
    std::size_t m_ = 0;
    std::uint32_t f_ = 0;
    std::size_t wpr_ = 0;
    std::vector<std::uint64_t> data_;
};

/// Uniform i.i.d. +-1 code from the given generator.
class Rng;
BinaryCode random_code(std::uint32_t f, Rng& rng);

}  // namespace lightfr
