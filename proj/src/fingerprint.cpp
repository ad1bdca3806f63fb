#include "xlayer/fingerprint.hpp"

#include "xlayer/crypto.hpp"

namespace xlayer {

std::int32_t mean_rss(const RssVector& v)
{
    if (v.empty()) {
        throw CodecError(CodecError::Kind::EmptyVector, "mean of an empty RSS vector");
    }
    std::int64_t sum = 0;
    for (const RssReading& r : v.readings) {
        sum += r.rss_cdbm;
    }
    const auto n = static_cast<std::int64_t>(v.size());
    // Floor division, then round the remainder half-to-even.
    std::int64_t q = sum / n;
    std::int64_t rem = sum % n;
    if (rem < 0) {
        rem += n;
        q -= 1;
    }
    const std::int64_t twice = 2 * rem;
    if (twice > n || (twice == n && (q & 1) != 0)) {
        q += 1;
    }
    return static_cast<std::int32_t>(q);
}

Key128 derive_key(std::int32_t mean_cdbm, std::string_view context)
{
    Bytes msg;
    msg.reserve(4 + context.size());
    const auto bits = static_cast<std::uint32_t>(mean_cdbm);
    for (int shift = 24; shift >= 0; shift -= 8) {
        msg.push_back(static_cast<std::uint8_t>(bits >> shift));
    }
    msg.insert(msg.end(), context.begin(), context.end());
    static constexpr Key128 kZeroKey{};
    return crypto::prf128(ByteView(kZeroKey), msg);
}

FingerprintKey fingerprint(const RssVector& v, std::string_view context)
{
    FingerprintKey fp;
    fp.mean_cdbm = mean_rss(v);
    fp.key = derive_key(fp.mean_cdbm, context);
    return fp;
}

FingerprintKey fingerprint_from_wire(ByteView rss_bytes, std::string_view context)
{
    return fingerprint(decode_rss_vector(rss_bytes), context);
}

} // namespace xlayer
