#include "xlayer/aka.hpp"

#include "xlayer/crypto.hpp"

#include <stdexcept>
#include <string>

namespace xlayer {

namespace {

// Rotation (in bits, a multiple of 8) and constant c_i for each output block.
constexpr int kRotation[6] = {0, 64, 0, 32, 64, 96};
constexpr std::uint8_t kConstLastByte[6] = {0, 0, 1, 2, 4, 8};

Block<16> rotate_left(const Block<16>& in, int bits)
{
    const int shift = bits / 8;
    Block<16> out{};
    for (int i = 0; i < 16; ++i) {
        out[static_cast<std::size_t>(i)] = in[static_cast<std::size_t>((i + shift) % 16)];
    }
    return out;
}

} // namespace

Milenage::Milenage(const Key128& k, const OperatorConstant& op)
    : k_(k)
    , opc_(xor_blocks(crypto::aes128_encrypt(k, op), op))
{
}

Block<16> Milenage::temp(const Rand128& rand) const
{
    return crypto::aes128_encrypt(k_, xor_blocks(rand, opc_));
}

Block<16> Milenage::out_block(const Block<16>& temp, int index) const
{
    Block<16> in = rotate_left(xor_blocks(temp, opc_), kRotation[index]);
    in[15] ^= kConstLastByte[index];
    return xor_blocks(crypto::aes128_encrypt(k_, in), opc_);
}

Block<16> Milenage::out1(const Block<16>& temp, Sqn sqn, const Amf16& amf) const
{
    const Block<6> sqn_bytes = sqn_to_bytes(sqn & kSqnMask);
    Block<16> in1{};
    for (std::size_t i = 0; i < 6; ++i) {
        in1[i] = sqn_bytes[i];
        in1[i + 8] = sqn_bytes[i];
    }
    in1[6] = in1[14] = amf[0];
    in1[7] = in1[15] = amf[1];
    Block<16> in = xor_blocks(temp, rotate_left(xor_blocks(in1, opc_), kRotation[1]));
    in[15] ^= kConstLastByte[1];
    return xor_blocks(crypto::aes128_encrypt(k_, in), opc_);
}

Mac64 Milenage::f1(const Rand128& rand, Sqn sqn, const Amf16& amf) const
{
    const Block<16> o = out1(temp(rand), sqn, amf);
    Mac64 mac{};
    std::copy_n(o.begin(), 8, mac.begin());
    return mac;
}

Res64 Milenage::f2(const Rand128& rand) const
{
    const Block<16> o = out_block(temp(rand), 2);
    Res64 res{};
    std::copy_n(o.begin() + 8, 8, res.begin());
    return res;
}

Key128 Milenage::f3(const Rand128& rand) const
{
    return out_block(temp(rand), 3);
}

Key128 Milenage::f4(const Rand128& rand) const
{
    return out_block(temp(rand), 4);
}

Ak48 Milenage::f5(const Rand128& rand) const
{
    const Block<16> o = out_block(temp(rand), 2);
    Ak48 ak{};
    std::copy_n(o.begin(), 6, ak.begin());
    return ak;
}

Milenage::Outputs Milenage::all(const Rand128& rand, Sqn sqn, const Amf16& amf) const
{
    const Block<16> t = temp(rand);
    Outputs out;
    const Block<16> o1 = out1(t, sqn, amf);
    std::copy_n(o1.begin(), 8, out.mac.begin());
    const Block<16> o2 = out_block(t, 2);
    std::copy_n(o2.begin() + 8, 8, out.res.begin());
    std::copy_n(o2.begin(), 6, out.ak.begin());
    out.ck = out_block(t, 3);
    out.ik = out_block(t, 4);
    return out;
}

Bytes milenage_f(int index, const Key128& k, const Rand128& rand, Sqn sqn, const Amf16& amf,
                 const OperatorConstant& op)
{
    const Milenage m(k, op);
    switch (index) {
    case 1: {
        const Mac64 v = m.f1(rand, sqn, amf);
        return Bytes(v.begin(), v.end());
    }
    case 2: {
        const Res64 v = m.f2(rand);
        return Bytes(v.begin(), v.end());
    }
    case 3: {
        const Key128 v = m.f3(rand);
        return Bytes(v.begin(), v.end());
    }
    case 4: {
        const Key128 v = m.f4(rand);
        return Bytes(v.begin(), v.end());
    }
    case 5: {
        const Ak48 v = m.f5(rand);
        return Bytes(v.begin(), v.end());
    }
    default:
        throw std::invalid_argument("MILENAGE function index must be 1..5, got " + std::to_string(index));
    }
}

Autn128 make_autn(Sqn sqn, const Ak48& ak, const Amf16& amf, const Mac64& mac)
{
    const Block<6> concealed = xor_blocks(sqn_to_bytes(sqn & kSqnMask), ak);
    Autn128 autn{};
    std::copy(concealed.begin(), concealed.end(), autn.begin());
    std::copy(amf.begin(), amf.end(), autn.begin() + 6);
    std::copy(mac.begin(), mac.end(), autn.begin() + 8);
    return autn;
}

AutnParts split_autn(const Autn128& autn)
{
    AutnParts p;
    std::copy_n(autn.begin(), 6, p.concealed_sqn.begin());
    std::copy_n(autn.begin() + 6, 2, p.amf.begin());
    std::copy_n(autn.begin() + 8, 8, p.mac.begin());
    return p;
}

AuthVector build_av(const Key128& k, Sqn sqn, const Amf16& amf, const Rand128& rand, SqnIssuer& issuer,
                    const OperatorConstant& op)
{
    if (sqn > kSqnMask) {
        throw std::invalid_argument("SQN exceeds 48 bits");
    }
    if (issuer.last_issued && sqn <= *issuer.last_issued) {
        throw SqnReuseError("SQN " + std::to_string(sqn) + " not fresh (last issued "
                            + std::to_string(*issuer.last_issued) + ")");
    }
    const Milenage m(k, op);
    const Milenage::Outputs o = m.all(rand, sqn, amf);
    issuer.last_issued = sqn;

    AuthVector av;
    av.rand = rand;
    av.xres = o.res;
    av.ck = o.ck;
    av.ik = o.ik;
    av.autn = make_autn(sqn, o.ak, amf, o.mac);
    return av;
}

const char* to_string(AkaError e)
{
    switch (e) {
    case AkaError::MacMismatch:
        return "MacMismatch";
    case AkaError::SqnOutOfRange:
        return "SqnOutOfRange";
    case AkaError::AuthTagInvalid:
        return "AuthTagInvalid";
    }
    return "Unknown";
}

std::variant<ChallengeAccepted, AkaError> mt_process_challenge(const Key128& k, const Rand128& rand,
                                                               const Autn128& autn, const SqnState& state,
                                                               const OperatorConstant& op)
{
    const Milenage m(k, op);
    const AutnParts parts = split_autn(autn);
    const Ak48 ak = m.f5(rand);
    const Sqn sqn = sqn_from_bytes(xor_blocks(parts.concealed_sqn, ak));
    const Milenage::Outputs o = m.all(rand, sqn, parts.amf);
    if (!equal_ct(o.mac, parts.mac)) {
        return AkaError::MacMismatch;
    }
    if (!state.in_window(sqn)) {
        return AkaError::SqnOutOfRange;
    }
    ChallengeAccepted acc;
    acc.res = o.res;
    acc.ck = o.ck;
    acc.ik = o.ik;
    acc.new_state = state;
    acc.new_state.last_accepted = sqn;
    return acc;
}

bool verify_res(const Res64& res, const Res64& xres)
{
    return equal_ct(res, xres);
}

Identity128 mask_im(const Identity128& im, const Key128& k)
{
    return xor_blocks(im, crypto::prf128(k, "tim-mask"));
}

Identity128 unmask_tim(const Identity128& tim, const Key128& k)
{
    return mask_im(tim, k);
}

Bytes encrypt_tim(const Identity128& tim, const Key128& k, const Nonce96& nonce)
{
    return crypto::aead_seal(crypto::prf128(k, "tim-enc"), nonce, tim);
}

std::variant<Identity128, AkaError> decrypt_tim(ByteView sealed, const Key128& k, const Nonce96& nonce)
{
    if (sealed.size() != 16 + crypto::kGcmTagBytes) {
        return AkaError::AuthTagInvalid;
    }
    std::optional<Bytes> plain = crypto::aead_open(crypto::prf128(k, "tim-enc"), nonce, sealed);
    if (!plain) {
        return AkaError::AuthTagInvalid;
    }
    Identity128 tim{};
    std::copy(plain->begin(), plain->end(), tim.begin());
    return tim;
}

} // namespace xlayer
