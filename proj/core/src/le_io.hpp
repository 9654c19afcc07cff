#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lightfr/error.hpp"

namespace lightfr::le {

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
    static_assert(std::is_integral_v<T>);
    using U = std::make_unsigned_t<T>;
    auto v = static_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(T); ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

inline void put_f64(std::vector<std::uint8_t>& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    put(out, bits);
}

template <typename T>
void write(std::ostream& out, T value) {
    std::vector<std::uint8_t> buf;
    put(buf, value);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

inline void write_f64(std::ostream& out, double value) {
    std::uint64_t bits;
    std::memcpy(&bits, &value, sizeof bits);
    write(out, bits);
}

template <typename T>
T read(std::istream& in) {
    std::uint8_t buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof buf)) throw Error("unexpected end of binary input");
    std::make_unsigned_t<T> v = 0;
    for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<std::make_unsigned_t<T>>(buf[b]) << (8 * b);
    return static_cast<T>(v);
}

inline double read_f64(std::istream& in) {
    const auto bits = read<std::uint64_t>(in);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline void expect_magic(std::istream& in, const char (&magic)[5], const std::string& what) {
    char buf[4];
    if (!in.read(buf, 4) || std::memcmp(buf, magic, 4) != 0) throw Error("not a " + what + " file (bad magic)");
}

}  // namespace lightfr::le
