#include "lightfr/payload.hpp"

#include <cstring>
#include <string>

#include "le_io.hpp"
#include "lightfr/error.hpp"

namespace lightfr {

namespace {

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes_[pos_++]) << (8 * b);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t v = 0;
        for (int b = 0; b < 8; ++b) v |= static_cast<std::uint64_t>(bytes_[pos_++]) << (8 * b);
        double d;
        std::memcpy(&d, &v, sizeof d);
        return d;
    }
    std::span<const std::uint8_t> take(std::size_t n) {
        need(n);
        auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    void finish() const {
        if (pos_ != bytes_.size()) throw Error("trailing bytes in payload");
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > bytes_.size()) throw Error("truncated payload");
    }
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize(const GradientUpdate& update) {
    std::vector<std::uint8_t> out;
    out.reserve(gradient_payload_bytes(update.size(), update.f));
    le::put<std::uint32_t>(out, update.client_id);
    le::put<std::uint32_t>(out, static_cast<std::uint32_t>(update.size()));
    for (std::size_t e = 0; e < update.size(); ++e) {
        le::put<std::uint32_t>(out, update.items[e]);
        for (double g : update.row(e)) le::put_f64(out, g);
    }
    return out;
}

GradientUpdate deserialize_gradient(std::span<const std::uint8_t> bytes, std::uint32_t f) {
    Reader in(bytes);
    GradientUpdate up;
    up.f = f;
    up.client_id = in.u32();
    const std::uint32_t count = in.u32();
    if (bytes.size() != gradient_payload_bytes(count, f)) throw Error("gradient payload size does not match its count");
    up.items.reserve(count);
    up.grads.reserve(static_cast<std::size_t>(count) * f);
    for (std::uint32_t e = 0; e < count; ++e) {
        up.items.push_back(in.u32());
        for (std::uint32_t k = 0; k < f; ++k) up.grads.push_back(in.f64());
    }
    in.finish();
    return up;
}

std::vector<std::uint8_t> serialize(const ItemCodeUpload& upload, std::uint32_t f) {
    std::vector<std::uint8_t> out;
    out.reserve(code_payload_bytes(upload.items.size(), f));
    le::put<std::uint32_t>(out, upload.client_id);
    le::put<std::uint32_t>(out, static_cast<std::uint32_t>(upload.items.size()));
    std::vector<std::uint8_t> row((f + 7) / 8);
    for (std::size_t e = 0; e < upload.items.size(); ++e) {
        if (upload.codes[e].size() != f) throw Error("uploaded code length does not match f");
        le::put<std::uint32_t>(out, upload.items[e]);
        upload.codes[e].to_bytes(row);
        out.insert(out.end(), row.begin(), row.end());
    }
    return out;
}

ItemCodeUpload deserialize_codes(std::span<const std::uint8_t> bytes, std::uint32_t f) {
    Reader in(bytes);
    ItemCodeUpload up;
    up.client_id = in.u32();
    const std::uint32_t count = in.u32();
    if (bytes.size() != code_payload_bytes(count, f)) throw Error("code payload size does not match its count");
    for (std::uint32_t e = 0; e < count; ++e) {
        up.items.push_back(in.u32());
        up.codes.push_back(BinaryCode::from_bytes(f, in.take((f + 7) / 8)));
    }
    in.finish();
    return up;
}

}  // namespace lightfr
