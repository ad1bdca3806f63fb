#include "generators.hpp"

#include "xlayer/wire_codec.hpp"

#include <gtest/gtest.h>

namespace xlayer {
namespace {

CodecError::Kind codec_kind(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const CodecError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no CodecError thrown";
    return CodecError::Kind::UnknownTag;
}

RssVector single_reading()
{
    return RssVector{{{1, -7000, 1000}}};
}

TEST(RssCodec, SingleReadingLayout)
{
    const Bytes b = encode_rss_vector(single_reading());
    EXPECT_EQ(to_hex(b), "00000001" "00000001" "ffffe4a8" "00000000000003e8");
}

TEST(RssCodec, DecodeSingleReading)
{
    const RssVector v = decode_rss_vector(from_hex("0000000100000001ffffe4a800000000000003e8"));
    ASSERT_EQ(v.size(), 1u);
    EXPECT_EQ(v.readings[0].ap_id, 1u);
    EXPECT_EQ(v.readings[0].rss_cdbm, -7000);
    EXPECT_EQ(v.readings[0].toa_ns, 1000u);
}

TEST(RssCodec, RejectsUnsortedAndDuplicateIds)
{
    RssVector v{{{2, -7000, 5}, {1, -7000, 5}}};
    EXPECT_EQ(codec_kind([&] { encode_rss_vector(v); }), CodecError::Kind::Unsorted);
    v.readings[1].ap_id = 2;
    EXPECT_EQ(codec_kind([&] { encode_rss_vector(v); }), CodecError::Kind::Unsorted);
}

TEST(RssCodec, RejectsEmptyAndOutOfRange)
{
    EXPECT_EQ(codec_kind([] { encode_rss_vector(RssVector{}); }), CodecError::Kind::EmptyVector);
    EXPECT_EQ(codec_kind([] { encode_rss_vector(RssVector{{{1, 10, 5}}}); }), CodecError::Kind::ReadingOutOfRange);
    EXPECT_EQ(codec_kind([] { encode_rss_vector(RssVector{{{1, -15001, 5}}}); }),
              CodecError::Kind::ReadingOutOfRange);
}

TEST(RssCodec, DecodeErrors)
{
    EXPECT_EQ(codec_kind([] { decode_rss_vector(from_hex("000000")); }), CodecError::Kind::Truncated);
    // count says 2, one reading present
    EXPECT_EQ(codec_kind([] { decode_rss_vector(from_hex("0000000200000001ffffe4a800000000000003e8")); }),
              CodecError::Kind::CountMismatch);
    // one extra byte after the reading
    EXPECT_EQ(codec_kind([] { decode_rss_vector(from_hex("0000000100000001ffffe4a800000000000003e800")); }),
              CodecError::Kind::CountMismatch);
    // decoded ids out of order
    EXPECT_EQ(codec_kind([] {
                  decode_rss_vector(from_hex("00000002"
                                             "00000002ffffe4a800000000000003e8"
                                             "00000001ffffe4a800000000000003e8"));
              }),
              CodecError::Kind::Unsorted);
}

TEST(RssCodec, RoundTripRandomized)
{
    Rng rng(101);
    for (int i = 0; i < 100; ++i) {
        const RssVector v = testgen::rss_vector(rng);
        const Bytes b = encode_rss_vector(v);
        EXPECT_EQ(b.size(), 4 + 16 * v.size());
        EXPECT_EQ(decode_rss_vector(b), v) << "case " << i;
        EXPECT_EQ(encode_rss_vector(v), b);
    }
}

TEST(MessageCodec, VerdictLayout)
{
    EXPECT_EQ(to_hex(encode_message(Verdict{true, 0})), "050100");
    EXPECT_EQ(to_hex(encode_message(Verdict{false, 4})), "050004");
}

TEST(MessageCodec, FixedWidths)
{
    EXPECT_EQ(encode_message(AvToNs{}).size(), 1u + 16 + 16 + 8);
    EXPECT_EQ(encode_message(Challenge{}).size(), 1u + 16 + 16);
    EXPECT_EQ(encode_message(ResResponse{}).size(), 1u + 8);
    AuthRequest r;
    r.tim_ciphertext = Bytes(32, 0xAA);
    r.rss = single_reading();
    EXPECT_EQ(encode_message(r).size(), 1u + 2 + 32 + 12 + 20);
}

TEST(MessageCodec, AuthRequestLayout)
{
    AuthRequest r;
    r.tim_ciphertext = {0xde, 0xad};
    r.nonce = block_from_hex<12>("0102030405060708090a0b0c");
    r.rss = single_reading();
    EXPECT_EQ(to_hex(encode_message(r)),
              "01" "0002" "dead" "0102030405060708090a0b0c" "0000000100000001ffffe4a800000000000003e8");
}

TEST(MessageCodec, UnknownTag)
{
    EXPECT_EQ(codec_kind([] { decode_message(from_hex("ff0100")); }), CodecError::Kind::UnknownTag);
    EXPECT_EQ(codec_kind([] { decode_message(from_hex("00")); }), CodecError::Kind::UnknownTag);
}

TEST(MessageCodec, TruncationAndTrailing)
{
    EXPECT_EQ(codec_kind([] { decode_message(Bytes{}); }), CodecError::Kind::Truncated);
    EXPECT_EQ(codec_kind([] { decode_message(from_hex("0501")); }), CodecError::Kind::Truncated);
    EXPECT_EQ(codec_kind([] { decode_message(from_hex("05010000")); }), CodecError::Kind::TrailingBytes);
    EXPECT_EQ(codec_kind([] { decode_message(from_hex("050200")); }), CodecError::Kind::FieldWidth);
    const Bytes ch = encode_message(Challenge{});
    EXPECT_EQ(codec_kind([&] { decode_message(ByteView(ch).first(ch.size() - 1)); }), CodecError::Kind::Truncated);
}

TEST(MessageCodec, RoundTripAllTags)
{
    Rng rng(202);
    std::array<int, 5> seen{};
    for (int i = 0; i < 500; ++i) {
        const ProtocolMessage m = testgen::message(rng);
        ++seen[m.index()];
        const Bytes b = encode_message(m);
        EXPECT_EQ(b[0], static_cast<std::uint8_t>(tag_of(m)));
        EXPECT_EQ(decode_message(b), m) << "case " << i;
        EXPECT_EQ(encode_message(decode_message(b)), b);
    }
    for (int n : seen) {
        EXPECT_GT(n, 0);
    }
}

} // namespace
} // namespace xlayer
