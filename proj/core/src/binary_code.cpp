#include "lightfr/binary_code.hpp"

#include <fstream>
#include <sstream>

#include "le_io.hpp"
#include "lightfr/error.hpp"
#include "lightfr/random.hpp"

namespace lightfr {

namespace {

void check_length(std::uint32_t f) {
    if (f == 0 || f > BinaryCode::kMaxBits)
        throw Error("code length must be in [1, " + std::to_string(BinaryCode::kMaxBits) + "], got " +
                    std::to_string(f));
}

void check_same(const BinaryCode& a, const BinaryCode& b) {
    if (a.size() != b.size())
        throw Error("code length mismatch: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

}  // namespace

BinaryCode::BinaryCode(std::uint32_t f) : f_(f) { check_length(f); }

BinaryCode BinaryCode::from_signs(std::span<const int> signs) {
    BinaryCode c(static_cast<std::uint32_t>(signs.size()));
    for (std::uint32_t k = 0; k < signs.size(); ++k) c.set(k, signs[k] > 0 ? 1 : -1);
    return c;
}

BinaryCode BinaryCode::parse(const std::string& text) {
    BinaryCode c(static_cast<std::uint32_t>(text.size()));
    for (std::uint32_t k = 0; k < text.size(); ++k) {
        if (text[k] != '+' && text[k] != '-') throw Error("code text must contain only '+' and '-'");
        c.set(k, text[k] == '+' ? 1 : -1);
    }
    return c;
}

BinaryCode BinaryCode::from_words(std::uint32_t f, std::span<const std::uint64_t> words) {
    BinaryCode c(f);
    if (words.size() != c.word_count()) throw Error("packed code has wrong word count");
    for (std::size_t w = 0; w < words.size(); ++w) c.w_[w] = words[w];
    if (f % 64 != 0) c.w_[(f - 1) / 64] &= (std::uint64_t{1} << (f % 64)) - 1;
    return c;
}

BinaryCode BinaryCode::from_bytes(std::uint32_t f, std::span<const std::uint8_t> bytes) {
    BinaryCode c(f);
    if (bytes.size() != c.byte_count()) throw Error("packed code has wrong byte count");
    for (std::size_t b = 0; b < bytes.size(); ++b)
        c.w_[b / 8] |= static_cast<std::uint64_t>(bytes[b]) << (8 * (b % 8));
    // Drop padding so equality stays meaningful.
    if (f % 64 != 0) c.w_[(f - 1) / 64] &= (std::uint64_t{1} << (f % 64)) - 1;
    for (std::size_t w = c.word_count(); w < kWords; ++w) c.w_[w] = 0;
    return c;
}

BinaryCode BinaryCode::complement() const {
    BinaryCode c = *this;
    for (std::size_t w = 0; w < word_count(); ++w) c.w_[w] = ~c.w_[w];
    if (f_ % 64 != 0) c.w_[(f_ - 1) / 64] &= (std::uint64_t{1} << (f_ % 64)) - 1;
    return c;
}

std::vector<int> BinaryCode::to_signs() const {
    std::vector<int> out(f_);
    for (std::uint32_t k = 0; k < f_; ++k) out[k] = sign(k);
    return out;
}

std::string BinaryCode::to_string() const {
    std::string s(f_, '-');
    for (std::uint32_t k = 0; k < f_; ++k)
        if (bit(k)) s[k] = '+';
    return s;
}

void BinaryCode::to_bytes(std::span<std::uint8_t> out) const {
    if (out.size() != byte_count()) throw Error("output span has wrong byte count");
    for (std::size_t b = 0; b < out.size(); ++b) out[b] = static_cast<std::uint8_t>(w_[b / 8] >> (8 * (b % 8)));
}

std::size_t hamming_distance(const BinaryCode& a, const BinaryCode& b) {
    check_same(a, b);
    std::size_t h = 0;
    for (std::size_t w = 0; w < a.word_count(); ++w) h += static_cast<std::size_t>(std::popcount(a.words()[w] ^ b.words()[w]));
    return h;
}

int dot_pm1(const BinaryCode& a, const BinaryCode& b) {
    return static_cast<int>(a.size()) - 2 * static_cast<int>(hamming_distance(a, b));
}

double hamming_similarity(const BinaryCode& a, const BinaryCode& b) {
    return 0.5 + static_cast<double>(dot_pm1(a, b)) / (2.0 * a.size());
}

BinaryCode random_code(std::uint32_t f, Rng& rng) {
    BinaryCode c(f);
    for (std::uint32_t k = 0; k < f; ++k) c.set(k, rng.coin() ? 1 : -1);
    return c;
}

// --- ItemCodeMatrix -----------------------------------------------------------

ItemCodeMatrix::ItemCodeMatrix(std::size_t m, std::uint32_t f) : m_(m), f_(f), wpr_((f + 63) / 64) {
    check_length(f);
    data_.assign(m_ * wpr_, 0);
}

BinaryCode ItemCodeMatrix::code(std::size_t i) const {
    if (i >= m_) throw Error("item index out of range: " + std::to_string(i));
    return BinaryCode::from_words(f_, std::span(data_).subspan(i * wpr_, wpr_));
}

void ItemCodeMatrix::set_code(std::size_t i, const BinaryCode& c) {
    if (i >= m_) throw Error("item index out of range: " + std::to_string(i));
    if (c.size() != f_) throw Error("code length mismatch when storing item " + std::to_string(i));
    for (std::size_t w = 0; w < wpr_; ++w) data_[i * wpr_ + w] = c.words()[w];
}

std::vector<std::uint8_t> ItemCodeMatrix::pack_rows() const {
    const std::size_t bpr = (f_ + 7) / 8;
    std::vector<std::uint8_t> out(m_ * bpr);
    for (std::size_t i = 0; i < m_; ++i)
        for (std::size_t b = 0; b < bpr; ++b)
            out[i * bpr + b] = static_cast<std::uint8_t>(data_[i * wpr_ + b / 8] >> (8 * (b % 8)));
    return out;
}

ItemCodeMatrix ItemCodeMatrix::unpack_rows(std::size_t m, std::uint32_t f, std::span<const std::uint8_t> bytes) {
    ItemCodeMatrix mat(m, f);
    const std::size_t bpr = (f + 7) / 8;
    if (bytes.size() != m * bpr) throw Error("packed matrix has wrong byte count");
    for (std::size_t i = 0; i < m; ++i)
        mat.set_code(i, BinaryCode::from_bytes(f, bytes.subspan(i * bpr, bpr)));
    return mat;
}

void ItemCodeMatrix::write(std::ostream& out) const {
    out.write("LFRD", 4);
    le::write<std::uint32_t>(out, f_);
    le::write<std::uint64_t>(out, m_);
    const auto rows = pack_rows();
    out.write(reinterpret_cast<const char*>(rows.data()), static_cast<std::streamsize>(rows.size()));
}

ItemCodeMatrix ItemCodeMatrix::read(std::istream& in) {
    le::expect_magic(in, "LFRD", "item code matrix");
    const auto f = le::read<std::uint32_t>(in);
    const auto m = le::read<std::uint64_t>(in);
    check_length(f);
    std::vector<std::uint8_t> rows(m * ((f + 7) / 8));
    if (!in.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size())))
        throw Error("truncated item code matrix");
    return unpack_rows(m, f, rows);
}

void ItemCodeMatrix::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    write(out);
    if (!out) throw Error("failed writing " + path.string());
}

ItemCodeMatrix ItemCodeMatrix::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    return read(in);
}

std::string ItemCodeMatrix::to_text() const {
    std::string out;
    out.reserve(m_ * (f_ + 1));
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::uint32_t k = 0; k < f_; ++k) out.push_back(sign(i, k) > 0 ? '+' : '-');
        out.push_back('\n');
    }
    return out;
}

ItemCodeMatrix ItemCodeMatrix::from_text(const std::string& text) {
    std::istringstream in(text);
    std::vector<BinaryCode> rows;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(BinaryCode::parse(line));
        if (rows.back().size() != rows.front().size()) throw Error("rows of differing length in code text");
    }
    if (rows.empty()) throw Error("empty code text");
    ItemCodeMatrix mat(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) mat.set_code(i, rows[i]);
    return mat;
}

}  // namespace lightfr
