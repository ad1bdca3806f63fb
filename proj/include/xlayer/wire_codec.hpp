#pragma once

#include "xlayer/types.hpp"

#include <cstdint>
#include <stdexcept>
#include <variant>
#include <vector>

namespace xlayer {

inline constexpr std::int32_t kRssMinCdbm = -15000;
inline constexpr std::int32_t kRssMaxCdbm = 0;

struct RssReading {
    std::uint32_t ap_id = 0;
    std::int32_t rss_cdbm = 0;  // centi-dBm
    std::uint64_t toa_ns = 0;   // arrival time, ns since epoch

    friend bool operator==(const RssReading&, const RssReading&) = default;
};

// Readings sorted ascending by unique ap_id.
struct RssVector {
    std::vector<RssReading> readings;

    std::size_t size() const { return readings.size(); }
    bool empty() const { return readings.empty(); }
    friend bool operator==(const RssVector&, const RssVector&) = default;
};

class CodecError : public std::runtime_error {
public:
    enum class Kind {
        EmptyVector,
        Unsorted,
        ReadingOutOfRange,
        Truncated,
        CountMismatch,
        TrailingBytes,
        UnknownTag,
        FieldWidth,
    };

    CodecError(Kind kind, const std::string& what)
        : std::runtime_error(what)
        , kind_(kind)
    {
    }

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Throws CodecError if the vector violates the RssVector invariants.
void validate_rss_vector(const RssVector& v);

// 4-byte BE count, then per reading: ap_id u32 BE, rss_cdbm i32 BE, toa_ns u64 BE.
Bytes encode_rss_vector(const RssVector& v);
RssVector decode_rss_vector(ByteView bytes);

enum class MessageTag : std::uint8_t {
    AuthRequest = 0x01,
    AvToNs = 0x02,
    Challenge = 0x03,
    ResResponse = 0x04,
    Verdict = 0x05,
};

struct AuthRequest {
    Bytes tim_ciphertext;  // u16 BE length prefix on the wire
    Nonce96 nonce{};
    RssVector rss;

    friend bool operator==(const AuthRequest&, const AuthRequest&) = default;
};

struct AvToNs {
    Rand128 rand{};
    Autn128 autn{};
    Res64 xres{};

    friend bool operator==(const AvToNs&, const AvToNs&) = default;
};

struct Challenge {
    Rand128 rand{};
    Autn128 autn{};

    friend bool operator==(const Challenge&, const Challenge&) = default;
};

struct ResResponse {
    Res64 res{};

    friend bool operator==(const ResResponse&, const ResResponse&) = default;
};

struct Verdict {
    bool accept = false;
    std::uint8_t reason = 0;

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

using ProtocolMessage = std::variant<AuthRequest, AvToNs, Challenge, ResResponse, Verdict>;

MessageTag tag_of(const ProtocolMessage& m);
const char* tag_name(MessageTag tag);

Bytes encode_message(const ProtocolMessage& m);
ProtocolMessage decode_message(ByteView bytes);

} // namespace xlayer
