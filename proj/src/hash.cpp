#include "detaps/hash.hpp"

#include <memory>

#include <openssl/evp.h>
#include <openssl/hmac.h>

#include "detaps/errors.hpp"

namespace detaps {

Digest sha256(ByteView data) {
  Digest out{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
  return out;
}

Digest hmac_sha256(ByteView key, ByteView data) {
  Digest out{};
  unsigned int len = 0;
  // OpenSSL rejects a null key pointer even for zero length.
  static const std::uint8_t kEmpty = 0;
  HMAC(EVP_sha256(), key.empty() ? &kEmpty : key.data(), static_cast<int>(key.size()),
       data.data(), data.size(), out.data(), &len);
  return out;
}

Bytes hmac_expand(ByteView key, ByteView data, std::size_t len) {
  Bytes out;
  out.reserve(len + 32);
  Bytes block(data.begin(), data.end());
  block.push_back(0);
  for (std::uint8_t i = 1; out.size() < len; ++i) {
    block.back() = i;
    auto d = hmac_sha256(key, block);
    out.insert(out.end(), d.begin(), d.end());
  }
  out.resize(len);
  return out;
}

Digest tagged_digest(std::string_view tag, ByteView data) {
  return hmac_sha256(as_bytes(tag), data);
}

namespace {

struct CtxFree {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxFree>;

void check_params(ByteView key, ByteView nonce) {
  if (key.size() != 32 || nonce.size() != kAeadNonceBytes)
    throw Error(Errc::DecodeError, "bad AEAD key or nonce length");
}

}  // namespace

Bytes aead_seal(ByteView key, ByteView nonce, ByteView aad, ByteView plaintext) {
  check_params(key, nonce);
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  Bytes out(plaintext.size() + kAeadTagBytes);
  EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data());
  if (!aad.empty()) EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size()));
  if (!plaintext.empty())
    EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), static_cast<int>(plaintext.size()));
  EVP_EncryptFinal_ex(ctx.get(), out.data() + plaintext.size(), &len);
  EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kAeadTagBytes, out.data() + plaintext.size());
  return out;
}

Bytes aead_open(ByteView key, ByteView nonce, ByteView aad, ByteView sealed) {
  check_params(key, nonce);
  if (sealed.size() < kAeadTagBytes) throw Error(Errc::AuthFailure, "ciphertext too short");
  const std::size_t body = sealed.size() - kAeadTagBytes;
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  int len = 0;
  Bytes out(body);
  EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data());
  if (!aad.empty()) EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size()));
  if (body != 0) EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(body));
  Bytes tag(sealed.begin() + static_cast<std::ptrdiff_t>(body), sealed.end());
  EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kAeadTagBytes, tag.data());
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + body, &len) != 1)
    throw Error(Errc::AuthFailure, "AEAD tag mismatch");
  return out;
}

}  // namespace detaps
