#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "detaps/bytes.hpp"

namespace detaps {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

// HMAC-based expansion to `len` bytes: block i = HMAC(key, data || i).
Bytes hmac_expand(ByteView key, ByteView data, std::size_t len);

// Tagged digest used for transcript and object fingerprints.
Digest tagged_digest(std::string_view tag, ByteView data);

// AES-256-GCM with a 16-byte tag appended to the ciphertext.
// Throws Error(AuthFailure) when the tag does not verify.
Bytes aead_seal(ByteView key32, ByteView nonce12, ByteView aad, ByteView plaintext);
Bytes aead_open(ByteView key32, ByteView nonce12, ByteView aad, ByteView sealed);

inline constexpr std::size_t kAeadTagBytes = 16;
inline constexpr std::size_t kAeadNonceBytes = 12;

}  // namespace detaps
