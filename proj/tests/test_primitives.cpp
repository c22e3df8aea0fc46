#include <doctest.h>

#include "detaps/errors.hpp"
#include "detaps/primitives.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::prim;
using group::Scalar;

TEST_CASE("keygen is deterministic under a seed") {
  const auto a = keygen(SchemeId::Sig, as_bytes("seed-1"));
  const auto b = keygen(SchemeId::Sig, as_bytes("seed-1"));
  CHECK(a.pub == b.pub);
  CHECK(a.secret == b.secret);
  CHECK(a.pub == group::G1::generator() * a.secret);
  const auto c = keygen(SchemeId::Sig, as_bytes("seed-2"));
  CHECK_FALSE(a.pub == c.pub);
  // Same seed under a different scheme id yields an unrelated key.
  CHECK_FALSE(keygen(SchemeId::Pke, as_bytes("seed-1")).pub == a.pub);
  const auto fresh = keygen(SchemeId::Sig, ByteView{});
  CHECK(sig_verify(fresh.pub, as_bytes("probe"), sig_sign(fresh.secret, as_bytes("probe"))));
}

TEST_CASE("pedersen commitment opens only with its own (x, r)") {
  auto rng = Rng::from_seed(21);
  for (int i = 0; i < 100; ++i) {
    const auto x = rng.bytes(1 + rng.below(64));
    const auto r = Scalar::random(rng);
    const auto com = com_commit(x, r);
    CHECK(com_verify(x, r, com));
    auto x2 = x;
    x2[0] ^= 1;
    CHECK_FALSE(com_verify(x2, r, com));
    CHECK_FALSE(com_verify(x, r + Scalar::one(), com));
    CHECK_FALSE(com_commit(x, Scalar::random(rng)) == com);
  }
}

TEST_CASE("pedersen binding smoke test") {
  auto rng = Rng::from_seed(22);
  const Bytes x = to_bytes("committed value");
  const auto r = Scalar::random(rng);
  const auto com = com_commit(x, r);
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto x2 = rng.bytes(16);
    const auto r2 = Scalar::random(rng);
    if (com_verify(x2, r2, com)) ++hits;
  }
  CHECK(hits == 0);
}

TEST_CASE("schnorr signatures round trip and reject any bit flip") {
  auto rng = Rng::from_seed(23);
  for (int i = 0; i < 100; ++i) {
    const auto kp = keygen(SchemeId::Sig, rng);
    const auto msg = rng.bytes(1 + rng.below(128));
    const auto sig = sig_sign(kp.secret, msg);
    REQUIRE(sig_verify(kp.pub, msg, sig));

    auto m2 = msg;
    const auto bit = rng.below(m2.size() * 8);
    m2[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    CHECK_FALSE(sig_verify(kp.pub, m2, sig));

    auto enc = encode(sig);
    const auto sbit = rng.below(enc.size() * 8);
    enc[sbit / 8] ^= static_cast<std::uint8_t>(1u << (sbit % 8));
    CHECK_FALSE(sig_verify(kp.pub, msg, ByteView(enc)));

    const auto other = keygen(SchemeId::Sig, rng);
    CHECK_FALSE(sig_verify(other.pub, msg, sig));
  }
  CHECK_FALSE(sig_verify(group::G1::generator(), as_bytes("m"), ByteView(Bytes(10, 0))));
}

TEST_CASE("hybrid encryption round trips, authenticates, and hides length only up to |m|") {
  auto rng = Rng::from_seed(24);
  for (int i = 0; i < 100; ++i) {
    const auto kp = keygen(SchemeId::Pke, rng);
    const auto msg = rng.bytes(rng.below(300));
    const auto ct = pke_encrypt(kp.pub, msg, rng);
    CHECK(pke_decrypt(kp.secret, ct) == msg);
    CHECK(encode(ct).size() == msg.size() + HybridCiphertext::kOverhead);

    const auto wrong = keygen(SchemeId::Pke, rng);
    CHECK_THROWS_AS(pke_decrypt(wrong.secret, ct), Error);
    if (!msg.empty()) {
      auto bad = ct;
      bad.body[rng.below(bad.body.size())] ^= 0x40;
      try {
        (void)pke_decrypt(kp.secret, bad);
        FAIL("mutated ciphertext decrypted");
      } catch (const Error& e) {
        CHECK(e.code() == Errc::AuthFailure);
      }
    }
  }
}

TEST_CASE("hybrid encryption handles a 10 KB message") {
  auto rng = Rng::from_seed(25);
  const auto kp = keygen(SchemeId::Pke, rng);
  const auto msg = rng.bytes(10 * 1024);
  CHECK(pke_decrypt(kp.secret, pke_encrypt(kp.pub, msg, rng)) == msg);
  const auto a = pke_encrypt(kp.pub, rng.bytes(1024), rng);
  const auto b = pke_encrypt(kp.pub, rng.bytes(1024), rng);
  CHECK(encode(a).size() == encode(b).size());
}

TEST_CASE("primitive golden encodings") {
  const auto kp = keygen(SchemeId::Sig, as_bytes("golden"));
  golden::check("primitives.txt", "schnorr_sig", encode(sig_sign(kp.secret, as_bytes("msg"))));
  auto rng = Rng::from_seed(99);
  golden::check("primitives.txt", "pke_ct", encode(pke_encrypt(kp.pub, as_bytes("hello"), rng)));
  golden::check("primitives.txt", "commitment", encode(com_commit(as_bytes("x"), Scalar::from_u64(7))));
}
