#pragma once

// Block cipher, PRF and AEAD primitives. Each call reports its cost to the
// active CounterScope.

#include "xlayer/types.hpp"

#include <optional>
#include <string_view>

namespace xlayer::crypto {

// AES-128 single-block encryption.
Block<16> aes128_encrypt(const Key128& key, const Block<16>& block);

// HMAC-SHA256 truncated to 128 bits.
Block<16> prf128(ByteView key, ByteView message);
Block<16> prf128(const Key128& key, std::string_view label);

// Plain SHA-256, used for transcript digests only; not counted.
Block<32> sha256(ByteView data);

inline constexpr std::size_t kGcmTagBytes = 16;

// AES-128-GCM, no associated data. Returns ciphertext || tag.
Bytes aead_seal(const Key128& key, const Nonce96& nonce, ByteView plaintext);
// Empty optional when the tag does not verify.
std::optional<Bytes> aead_open(const Key128& key, const Nonce96& nonce, ByteView sealed);

} // namespace xlayer::crypto
