#pragma once

#include "xlayer/types.hpp"
#include "xlayer/wire_codec.hpp"

#include <cstdint>
#include <string_view>

namespace xlayer {

inline constexpr std::string_view kFingerprintContext = "xlayer-k";

struct FingerprintKey {
    std::int32_t mean_cdbm = 0;
    Key128 key{};

    friend bool operator==(const FingerprintKey&, const FingerprintKey&) = default;
};

// Mean of the rss_cdbm values, rounded half-to-even. toa_ns does not
// participate. Throws CodecError on an empty vector.
std::int32_t mean_rss(const RssVector& v);

// First 128 bits of HMAC-SHA256 under an all-zero key over
// (mean_cdbm as 4-byte big-endian || context).
Key128 derive_key(std::int32_t mean_cdbm, std::string_view context = kFingerprintContext);

FingerprintKey fingerprint(const RssVector& v, std::string_view context = kFingerprintContext);

// Decode, average, expand. Used by the authentication slice on the received bytes.
FingerprintKey fingerprint_from_wire(ByteView rss_bytes, std::string_view context = kFingerprintContext);

} // namespace xlayer
