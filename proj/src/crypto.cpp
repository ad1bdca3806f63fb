#include "xlayer/crypto.hpp"

#include "xlayer/counters.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <memory>
#include <stdexcept>

namespace xlayer::crypto {

namespace {

struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_ctx()
{
    CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx) {
        throw std::runtime_error("EVP_CIPHER_CTX_new failed");
    }
    return ctx;
}

void check(int ok, const char* what)
{
    if (ok != 1) {
        throw std::runtime_error(what);
    }
}

int as_int(std::size_t n)
{
    return static_cast<int>(n);
}

} // namespace

Block<16> aes128_encrypt(const Key128& key, const Block<16>& block)
{
    count::cipher_blocks(1);
    CipherCtx ctx = new_ctx();
    check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.data(), nullptr),
          "AES init failed");
    EVP_CIPHER_CTX_set_padding(ctx.get(), 0);
    Block<16> out{};
    int len = 0;
    check(EVP_EncryptUpdate(ctx.get(), out.data(), &len, block.data(), 16), "AES update failed");
    return out;
}

Block<16> prf128(ByteView key, ByteView message)
{
    count::prf_call();
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (HMAC(EVP_sha256(), key.data(), as_int(key.size()), message.data(), message.size(), digest, &len)
        == nullptr) {
        throw std::runtime_error("HMAC failed");
    }
    Block<16> out{};
    std::copy_n(digest, 16, out.begin());
    return out;
}

Block<16> prf128(const Key128& key, std::string_view label)
{
    ByteView msg(reinterpret_cast<const std::uint8_t*>(label.data()), label.size());
    return prf128(ByteView(key), msg);
}

Block<32> sha256(ByteView data)
{
    Block<32> out{};
    unsigned int len = 0;
    check(EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr), "SHA-256 failed");
    return out;
}

namespace {

// Block-cipher invocations of one GCM call: hash subkey, tag mask, one per data block.
std::uint64_t gcm_blocks(std::size_t data_len)
{
    return 2 + (data_len + 15) / 16;
}

} // namespace

Bytes aead_seal(const Key128& key, const Nonce96& nonce, ByteView plaintext)
{
    count::cipher_blocks(gcm_blocks(plaintext.size()));
    CipherCtx ctx = new_ctx();
    check(EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr), "GCM init failed");
    check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr), "GCM ivlen failed");
    check(EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "GCM key failed");

    Bytes out(plaintext.size() + kGcmTagBytes);
    int len = 0;
    if (!plaintext.empty()) {
        check(EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), as_int(plaintext.size())),
              "GCM update failed");
    }
    int tail = 0;
    check(EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &tail), "GCM final failed");
    check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, as_int(kGcmTagBytes),
                              out.data() + plaintext.size()),
          "GCM tag failed");
    return out;
}

std::optional<Bytes> aead_open(const Key128& key, const Nonce96& nonce, ByteView sealed)
{
    if (sealed.size() < kGcmTagBytes) {
        return std::nullopt;
    }
    const std::size_t body = sealed.size() - kGcmTagBytes;
    count::cipher_blocks(gcm_blocks(body));
    CipherCtx ctx = new_ctx();
    check(EVP_DecryptInit_ex(ctx.get(), EVP_aes_128_gcm(), nullptr, nullptr, nullptr), "GCM init failed");
    check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, 12, nullptr), "GCM ivlen failed");
    check(EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()), "GCM key failed");

    Bytes out(body);
    int len = 0;
    if (body > 0) {
        check(EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), as_int(body)),
              "GCM update failed");
    }
    Block<16> tag{};
    std::copy_n(sealed.begin() + static_cast<std::ptrdiff_t>(body), kGcmTagBytes, tag.begin());
    check(EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, as_int(kGcmTagBytes), tag.data()),
          "GCM set tag failed");
    int tail = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &tail) != 1) {
        return std::nullopt;
    }
    return out;
}

} // namespace xlayer::crypto
