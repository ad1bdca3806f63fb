#include "generators.hpp"

#include "xlayer/fingerprint.hpp"

#include <gtest/gtest.h>

#include <set>

namespace xlayer {
namespace {

RssVector of_values(const std::vector<std::int32_t>& values)
{
    RssVector v;
    std::uint32_t ap = 1;
    for (std::int32_t x : values) {
        v.readings.push_back({ap++, x, 1000});
    }
    return v;
}

TEST(MeanRss, Examples)
{
    EXPECT_EQ(mean_rss(of_values({-6000, -7000, -8000})), -7000);
    EXPECT_EQ(mean_rss(of_values({-6550})), -6550);
    EXPECT_EQ(mean_rss(of_values({-6000, -6001})), -6000);
}

TEST(MeanRss, HalfToEven)
{
    EXPECT_EQ(mean_rss(of_values({-6001, -6002})), -6002);  // -6001.5
    EXPECT_EQ(mean_rss(of_values({-1, -2})), -2);            // -1.5
    EXPECT_EQ(mean_rss(of_values({-2, -3})), -2);            // -2.5
    EXPECT_EQ(mean_rss(of_values({-1, -1, -2})), -1);        // -1.33
    EXPECT_EQ(mean_rss(of_values({-1, -2, -2})), -2);        // -1.67
}

TEST(MeanRss, IgnoresToa)
{
    RssVector a = of_values({-6000, -7000});
    RssVector b = a;
    b.readings[0].toa_ns = 999999;
    EXPECT_EQ(mean_rss(a), mean_rss(b));
    EXPECT_EQ(fingerprint(a), fingerprint(b));
}

TEST(MeanRss, Empty)
{
    EXPECT_THROW(mean_rss(RssVector{}), CodecError);
}

// Golden values from tests/oracle/crypto_oracle.py.
TEST(DeriveKey, Golden)
{
    EXPECT_EQ(to_hex(derive_key(-7000)), "eeb9aab599c0007c13ea787e06d70e45");
    EXPECT_EQ(to_hex(derive_key(-6999)), "11a89415d3ca4aa4b75170f64b14c767");
}

TEST(DeriveKey, ContextSeparates)
{
    EXPECT_NE(derive_key(-7000, "xlayer-k"), derive_key(-7000, "other"));
}

TEST(DeriveKey, SensitiveOverSweep)
{
    std::set<Key128> keys;
    for (std::int32_t m = -7500; m <= -6500; ++m) {
        keys.insert(derive_key(m));
    }
    EXPECT_EQ(keys.size(), 1001u);
}

TEST(FromWire, Composition)
{
    const RssVector v = of_values({-6000, -7000, -8000});
    const FingerprintKey fk = fingerprint_from_wire(encode_rss_vector(v));
    EXPECT_EQ(fk.mean_cdbm, -7000);
    EXPECT_EQ(to_hex(fk.key), "eeb9aab599c0007c13ea787e06d70e45");
}

TEST(FromWire, Malformed)
{
    EXPECT_THROW(fingerprint_from_wire(from_hex("0000")), CodecError);
    EXPECT_THROW(fingerprint_from_wire(from_hex("00000000")), CodecError);
}

TEST(FingerprintProperty, MtAndAsAgree)
{
    Rng rng(303);
    for (int i = 0; i < 300; ++i) {
        const RssVector v = testgen::rss_vector(rng);
        EXPECT_EQ(fingerprint(v), fingerprint_from_wire(encode_rss_vector(v))) << "case " << i;
    }
}

TEST(FingerprintProperty, SingleReadingNudgeMovesMeanByAtMostOne)
{
    Rng rng(304);
    for (int i = 0; i < 300; ++i) {
        RssVector v = testgen::rss_vector(rng);
        const std::int32_t before = mean_rss(v);
        const std::size_t j = rng.below(v.size());
        auto& r = v.readings[j].rss_cdbm;
        r = r == kRssMaxCdbm ? r - 1 : r + 1;
        EXPECT_LE(std::abs(mean_rss(v) - before), 1) << "case " << i;
    }
}

TEST(FingerprintProperty, MeanWithinReadingBounds)
{
    Rng rng(305);
    for (int i = 0; i < 300; ++i) {
        const RssVector v = testgen::rss_vector(rng);
        std::int32_t lo = 0, hi = kRssMinCdbm;
        for (const auto& r : v.readings) {
            lo = std::min(lo, r.rss_cdbm);
            hi = std::max(hi, r.rss_cdbm);
        }
        const std::int32_t m = mean_rss(v);
        EXPECT_GE(m, lo);
        EXPECT_LE(m, hi);
    }
}

} // namespace
} // namespace xlayer
