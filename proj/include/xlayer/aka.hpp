#pragma once

// AKA key lists: MILENAGE f1-f5, authentication-vector construction on the
// network side, challenge processing on the mobile side, identity masking
// and TIM encryption.

#include "xlayer/types.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <variant>

namespace xlayer {

using OperatorConstant = Block<16>;

/// MILENAGE keyed by one subscriber key. OPc is derived once at construction
/// from the operator constant (all-zero by default).
class Milenage {
public:
    explicit Milenage(const Key128& k, const OperatorConstant& op = {});

    const Block<16>& opc() const { return opc_; }

    Mac64 f1(const Rand128& rand, Sqn sqn, const Amf16& amf) const;
    Res64 f2(const Rand128& rand) const;
    Key128 f3(const Rand128& rand) const;
    Key128 f4(const Rand128& rand) const;
    Ak48 f5(const Rand128& rand) const;

    struct Outputs {
        Mac64 mac{};
        Res64 res{};
        Key128 ck{};
        Key128 ik{};
        Ak48 ak{};
    };

    // All five functions sharing one TEMP block.
    Outputs all(const Rand128& rand, Sqn sqn, const Amf16& amf) const;

private:
    Block<16> temp(const Rand128& rand) const;
    Block<16> out_block(const Block<16>& temp, int index) const;
    Block<16> out1(const Block<16>& temp, Sqn sqn, const Amf16& amf) const;

    Key128 k_;
    Block<16> opc_{};
};

// f_i for i in 1..5; the result is 8, 8, 16, 16 or 6 bytes.
Bytes milenage_f(int index, const Key128& k, const Rand128& rand, Sqn sqn, const Amf16& amf,
                 const OperatorConstant& op = {});

struct AuthVector {
    Rand128 rand{};
    Res64 xres{};
    Key128 ck{};
    Key128 ik{};
    Autn128 autn{};

    friend bool operator==(const AuthVector&, const AuthVector&) = default;
};

Autn128 make_autn(Sqn sqn, const Ak48& ak, const Amf16& amf, const Mac64& mac);

struct AutnParts {
    Block<6> concealed_sqn{};
    Amf16 amf{};
    Mac64 mac{};
};
AutnParts split_autn(const Autn128& autn);

class SqnReuseError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Highest SQN issued for one identity on the network side.
struct SqnIssuer {
    std::optional<Sqn> last_issued;

    Sqn next() const { return last_issued ? *last_issued + 1 : 1; }
};

// Builds the AV and records the SQN as issued. Throws SqnReuseError unless
// sqn is strictly greater than every SQN previously issued through `issuer`.
AuthVector build_av(const Key128& k, Sqn sqn, const Amf16& amf, const Rand128& rand, SqnIssuer& issuer,
                    const OperatorConstant& op = {});

inline constexpr std::uint32_t kDefaultSqnWindow = 32;

struct SqnState {
    Sqn last_accepted = 0;
    std::uint32_t window = kDefaultSqnWindow;

    bool in_window(Sqn sqn) const { return sqn > last_accepted && sqn - last_accepted <= window; }
};

enum class AkaError : std::uint8_t {
    MacMismatch = 1,
    SqnOutOfRange = 2,
    AuthTagInvalid = 3,
};

const char* to_string(AkaError e);

struct ChallengeAccepted {
    Res64 res{};
    Key128 ck{};
    Key128 ik{};
    SqnState new_state;
};

std::variant<ChallengeAccepted, AkaError> mt_process_challenge(const Key128& k, const Rand128& rand,
                                                               const Autn128& autn, const SqnState& state,
                                                               const OperatorConstant& op = {});

bool verify_res(const Res64& res, const Res64& xres);

// tim = im XOR PRF(k, "tim-mask"); the operation is its own inverse.
Identity128 mask_im(const Identity128& im, const Key128& k);
Identity128 unmask_tim(const Identity128& tim, const Key128& k);

// AES-128-GCM under PRF(k, "tim-enc"). Output is 16 bytes of ciphertext
// followed by the 16-byte tag.
Bytes encrypt_tim(const Identity128& tim, const Key128& k, const Nonce96& nonce);
std::variant<Identity128, AkaError> decrypt_tim(ByteView sealed, const Key128& k, const Nonce96& nonce);

} // namespace xlayer
