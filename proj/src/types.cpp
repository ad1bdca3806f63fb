#include "xlayer/types.hpp"

#include <cmath>
#include <stdexcept>

namespace xlayer {

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

std::string to_hex(ByteView bytes)
{
    static constexpr char kDigits[] = "0123456789abcdef";
    std::string out;
    out.reserve(bytes.size() * 2);
    for (std::uint8_t b : bytes) {
        out.push_back(kDigits[b >> 4]);
        out.push_back(kDigits[b & 0x0f]);
    }
    return out;
}

namespace {

int hex_value(char c)
{
    if (c >= '0' && c <= '9') {
        return c - '0';
    }
    if (c >= 'a' && c <= 'f') {
        return c - 'a' + 10;
    }
    if (c >= 'A' && c <= 'F') {
        return c - 'A' + 10;
    }
    throw std::invalid_argument("invalid hex digit");
}

} // namespace

Bytes from_hex(std::string_view hex)
{
    if (hex.size() % 2 != 0) {
        throw std::invalid_argument("odd-length hex string");
    }
    Bytes out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(hex_value(hex[2 * i]) << 4 | hex_value(hex[2 * i + 1]));
    }
    return out;
}

bool equal_ct(ByteView a, ByteView b)
{
    if (a.size() != b.size()) {
        return false;
    }
    volatile std::uint8_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = diff | static_cast<std::uint8_t>(a[i] ^ b[i]);
    }
    return diff == 0;
}

Block<6> sqn_to_bytes(Sqn sqn)
{
    Block<6> out{};
    for (int i = 5; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(sqn & 0xff);
        sqn >>= 8;
    }
    return out;
}

Sqn sqn_from_bytes(const Block<6>& bytes)
{
    Sqn out = 0;
    for (std::uint8_t b : bytes) {
        out = (out << 8) | b;
    }
    return out;
}

} // namespace xlayer
