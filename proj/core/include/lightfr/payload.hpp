#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lightfr/discrete.hpp"

namespace lightfr {

// Wire forms of client uploads. All integers are little-endian u32; gradients
// are IEEE-754 doubles, little-endian. The code length f is global to a run
// and therefore not repeated in each payload.

/// client_id, count, then per item: item_id followed by f doubles.
std::vector<std::uint8_t> serialize(const GradientUpdate& update);
GradientUpdate deserialize_gradient(std::span<const std::uint8_t> bytes, std::uint32_t f);

/// client_id, count, then per item: item_id followed by ceil(f/8) code bytes.
std::vector<std::uint8_t> serialize(const ItemCodeUpload& upload, std::uint32_t f);
ItemCodeUpload deserialize_codes(std::span<const std::uint8_t> bytes, std::uint32_t f);

/// Byte sizes of the above without materializing them.
constexpr std::size_t gradient_payload_bytes(std::size_t entries, std::uint32_t f) noexcept {
    return 8 + entries * (4 + 8 * static_cast<std::size_t>(f));
}
constexpr std::size_t code_payload_bytes(std::size_t entries, std::uint32_t f) noexcept {
    return 8 + entries * (4 + (static_cast<std::size_t>(f) + 7) / 8);
}

}  // namespace lightfr
