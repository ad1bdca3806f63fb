#include "xlayer/wire_codec.hpp"

#include <string>

namespace xlayer {

namespace {

constexpr std::size_t kReadingSize = 16;
constexpr std::size_t kMaxTimBytes = 0xffff;

class Writer {
public:
    explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

    void u8(std::uint8_t v) { out_.push_back(v); }

    void u16(std::uint16_t v)
    {
        u8(static_cast<std::uint8_t>(v >> 8));
        u8(static_cast<std::uint8_t>(v));
    }

    void u32(std::uint32_t v)
    {
        for (int shift = 24; shift >= 0; shift -= 8) {
            u8(static_cast<std::uint8_t>(v >> shift));
        }
    }

    void u64(std::uint64_t v)
    {
        for (int shift = 56; shift >= 0; shift -= 8) {
            u8(static_cast<std::uint8_t>(v >> shift));
        }
    }

    void raw(ByteView bytes) { out_.insert(out_.end(), bytes.begin(), bytes.end()); }

    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader {
public:
    explicit Reader(ByteView in)
        : in_(in)
    {
    }

    std::size_t remaining() const { return in_.size() - pos_; }

    std::uint8_t u8()
    {
        need(1);
        return in_[pos_++];
    }

    std::uint16_t u16()
    {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(in_[pos_] << 8 | in_[pos_ + 1]);
        pos_ += 2;
        return v;
    }

    std::uint32_t u32()
    {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
            v = (v << 8) | in_[pos_++];
        }
        return v;
    }

    std::uint64_t u64()
    {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) {
            v = (v << 8) | in_[pos_++];
        }
        return v;
    }

    template <std::size_t N>
    Block<N> block()
    {
        need(N);
        Block<N> out{};
        std::copy_n(in_.begin() + static_cast<std::ptrdiff_t>(pos_), N, out.begin());
        pos_ += N;
        return out;
    }

    Bytes bytes(std::size_t n)
    {
        need(n);
        auto first = in_.begin() + static_cast<std::ptrdiff_t>(pos_);
        Bytes out(first, first + static_cast<std::ptrdiff_t>(n));
        pos_ += n;
        return out;
    }

    void finish() const
    {
        if (remaining() != 0) {
            throw CodecError(CodecError::Kind::TrailingBytes,
                             std::to_string(remaining()) + " trailing bytes after message");
        }
    }

private:
    void need(std::size_t n) const
    {
        if (remaining() < n) {
            throw CodecError(CodecError::Kind::Truncated,
                             "truncated buffer: need " + std::to_string(n) + " bytes, have "
                                 + std::to_string(remaining()));
        }
    }

    ByteView in_;
    std::size_t pos_ = 0;
};

void write_rss(Writer& w, const RssVector& v)
{
    validate_rss_vector(v);
    w.u32(static_cast<std::uint32_t>(v.readings.size()));
    for (const RssReading& r : v.readings) {
        w.u32(r.ap_id);
        w.u32(static_cast<std::uint32_t>(r.rss_cdbm));
        w.u64(r.toa_ns);
    }
}

RssVector read_rss(Reader& r)
{
    const std::uint32_t count = r.u32();
    if (static_cast<std::uint64_t>(count) * kReadingSize > r.remaining()) {
        throw CodecError(CodecError::Kind::CountMismatch,
                         "count " + std::to_string(count) + " exceeds buffer ("
                             + std::to_string(r.remaining()) + " bytes left)");
    }
    RssVector v;
    v.readings.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        RssReading reading;
        reading.ap_id = r.u32();
        reading.rss_cdbm = static_cast<std::int32_t>(r.u32());
        reading.toa_ns = r.u64();
        v.readings.push_back(reading);
    }
    validate_rss_vector(v);
    return v;
}

} // namespace

void validate_rss_vector(const RssVector& v)
{
    if (v.readings.empty()) {
        throw CodecError(CodecError::Kind::EmptyVector, "RSS vector is empty");
    }
    for (std::size_t i = 0; i < v.readings.size(); ++i) {
        const RssReading& r = v.readings[i];
        if (r.rss_cdbm < kRssMinCdbm || r.rss_cdbm > kRssMaxCdbm) {
            throw CodecError(CodecError::Kind::ReadingOutOfRange,
                             "rss_cdbm " + std::to_string(r.rss_cdbm) + " out of range for ap "
                                 + std::to_string(r.ap_id));
        }
        if (r.toa_ns == 0) {
            throw CodecError(CodecError::Kind::ReadingOutOfRange,
                             "toa_ns must be positive for ap " + std::to_string(r.ap_id));
        }
        if (i > 0 && v.readings[i - 1].ap_id >= r.ap_id) {
            throw CodecError(CodecError::Kind::Unsorted,
                             "ap_id " + std::to_string(r.ap_id) + " not strictly ascending");
        }
    }
}

Bytes encode_rss_vector(const RssVector& v)
{
    Writer w(4 + kReadingSize * v.readings.size());
    write_rss(w, v);
    return w.take();
}

RssVector decode_rss_vector(ByteView bytes)
{
    Reader r(bytes);
    RssVector v = read_rss(r);
    if (r.remaining() != 0) {
        throw CodecError(CodecError::Kind::CountMismatch,
                         "count field disagrees with buffer length");
    }
    return v;
}

MessageTag tag_of(const ProtocolMessage& m)
{
    return static_cast<MessageTag>(m.index() + 1);
}

const char* tag_name(MessageTag tag)
{
    switch (tag) {
    case MessageTag::AuthRequest:
        return "AuthRequest";
    case MessageTag::AvToNs:
        return "AvToNs";
    case MessageTag::Challenge:
        return "Challenge";
    case MessageTag::ResResponse:
        return "ResResponse";
    case MessageTag::Verdict:
        return "Verdict";
    }
    return "Unknown";
}

Bytes encode_message(const ProtocolMessage& m)
{
    Writer w(64);
    w.u8(static_cast<std::uint8_t>(tag_of(m)));
    std::visit(
        [&w](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, AuthRequest>) {
                if (msg.tim_ciphertext.size() > kMaxTimBytes) {
                    throw CodecError(CodecError::Kind::FieldWidth, "tim ciphertext too long");
                }
                w.u16(static_cast<std::uint16_t>(msg.tim_ciphertext.size()));
                w.raw(msg.tim_ciphertext);
                w.raw(msg.nonce);
                write_rss(w, msg.rss);
            } else if constexpr (std::is_same_v<T, AvToNs>) {
                w.raw(msg.rand);
                w.raw(msg.autn);
                w.raw(msg.xres);
            } else if constexpr (std::is_same_v<T, Challenge>) {
                w.raw(msg.rand);
                w.raw(msg.autn);
            } else if constexpr (std::is_same_v<T, ResResponse>) {
                w.raw(msg.res);
            } else {
                w.u8(msg.accept ? 1 : 0);
                w.u8(msg.reason);
            }
        },
        m);
    return w.take();
}

ProtocolMessage decode_message(ByteView bytes)
{
    Reader r(bytes);
    const std::uint8_t tag = r.u8();
    ProtocolMessage out;
    switch (static_cast<MessageTag>(tag)) {
    case MessageTag::AuthRequest: {
        AuthRequest m;
        const std::uint16_t len = r.u16();
        m.tim_ciphertext = r.bytes(len);
        m.nonce = r.block<12>();
        m.rss = read_rss(r);
        out = std::move(m);
        break;
    }
    case MessageTag::AvToNs: {
        AvToNs m;
        m.rand = r.block<16>();
        m.autn = r.block<16>();
        m.xres = r.block<8>();
        out = m;
        break;
    }
    case MessageTag::Challenge: {
        Challenge m;
        m.rand = r.block<16>();
        m.autn = r.block<16>();
        out = m;
        break;
    }
    case MessageTag::ResResponse: {
        ResResponse m;
        m.res = r.block<8>();
        out = m;
        break;
    }
    case MessageTag::Verdict: {
        Verdict m;
        const std::uint8_t flag = r.u8();
        if (flag > 1) {
            throw CodecError(CodecError::Kind::FieldWidth, "verdict flag must be 0 or 1");
        }
        m.accept = flag == 1;
        m.reason = r.u8();
        out = m;
        break;
    }
    default:
        throw CodecError(CodecError::Kind::UnknownTag, "unknown message tag " + std::to_string(tag));
    }
    r.finish();
    return out;
}

} // namespace xlayer
