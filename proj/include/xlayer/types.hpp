#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <string>
#include <vector>

namespace xlayer {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

template <std::size_t N>
using Block = std::array<std::uint8_t, N>;

using Key128 = Block<16>;
using Rand128 = Block<16>;
using Identity128 = Block<16>;
using Res64 = Block<8>;
using Mac64 = Block<8>;
using Ak48 = Block<6>;
using Amf16 = Block<2>;
using Autn128 = Block<16>;
using Nonce96 = Block<12>;

// 48-bit sequence number held in the low bits.
using Sqn = std::uint64_t;
inline constexpr Sqn kSqnMask = (Sqn{1} << 48) - 1;

struct Position {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Position&, const Position&) = default;
};

double distance(Position a, Position b);

std::string to_hex(ByteView bytes);
Bytes from_hex(std::string_view hex);

template <std::size_t N>
Block<N> block_from_hex(std::string_view hex)
{
    Bytes raw = from_hex(hex);
    Block<N> out{};
    if (raw.size() != N) {
        throw std::invalid_argument("hex string has wrong length for block");
    }
    std::copy(raw.begin(), raw.end(), out.begin());
    return out;
}

template <std::size_t N>
Block<N> xor_blocks(const Block<N>& a, const Block<N>& b)
{
    Block<N> out{};
    for (std::size_t i = 0; i < N; ++i) {
        out[i] = a[i] ^ b[i];
    }
    return out;
}

// Constant-time equality for secret material.
bool equal_ct(ByteView a, ByteView b);

Block<6> sqn_to_bytes(Sqn sqn);
Sqn sqn_from_bytes(const Block<6>& bytes);

} // namespace xlayer
