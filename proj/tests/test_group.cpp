#include <set>

#include <doctest.h>

#include "detaps/errors.hpp"
#include "detaps/group.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::group;

namespace {

// Group order of BLS12-381.
constexpr std::string_view kOrderHex =
    "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

template <typename T>
void check_decode_fails(ByteView b) {
  try {
    (void)T::from_bytes(b);
    FAIL("decode accepted invalid bytes");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DecodeError);
  }
}

}  // namespace

TEST_CASE("hash_to_scalar matches an HMAC-SHA256 reference") {
  // Reference values: int(HMAC(tag, data||01) || HMAC(tag, data||02)) mod q,
  // computed with Python's hmac module.
  CHECK(to_hex(hash_to_scalar("FS", {}).to_bytes()) ==
        "11682d2e3541c4735aeef880480f8b05634c9d4e0063f5dc70558d5f53860f2e");
  CHECK(to_hex(hash_to_scalar("GID", as_bytes("abc")).to_bytes()) ==
        "61ae5173f1c9629a8fc0208f3ebc9e85071bc3833c165fa478133ea009a00ce1");
  CHECK(to_hex(hash_to_scalar("FS", as_bytes("abc")).to_bytes()) ==
        "35bac99e9d2fea7fdede06fab8afa8240f0720e381aab09b2f7ecceef8bda90c");
}

TEST_CASE("hash_to_scalar is deterministic and domain separated") {
  const auto s0 = hash_to_scalar("FS", {});
  CHECK(hash_to_scalar("FS", {}) == s0);
  const auto x = as_bytes("same input");
  CHECK_FALSE(hash_to_scalar("FS", x) == hash_to_scalar("GID", x));
  CHECK_THROWS_AS(hash_to_scalar("", x), Error);
}

TEST_CASE("generator encodings match the BLS12-381 standard") {
  CHECK(to_hex(G1::generator().to_bytes()) ==
        "97f1d3a73197d7942695638c4fa9ac0fc3688c4f9774b905a14e3a3f171bac586c55e83ff97a1aeffb3af00adb22c6bb");
  CHECK(to_hex(G2::generator().to_bytes()) ==
        "93e02b6052719f607dacd3a088274f65596bd0d09920b61ab5da61bbdc7f5049334cf11213945d57e5ac7d055d042b7e"
        "024aa2b2f08f0a91260805272dc51051c6e47ad4fa403b02b4510b647ae3d1770bac0326a805bbefd48056c8c121bdb8");
}

TEST_CASE("scalar encoding rejects values at or above the group order") {
  auto q = from_hex(kOrderHex);
  check_decode_fails<Scalar>(q);
  Bytes q_minus_1 = q;
  q_minus_1.back() = 0x00;
  const auto s = Scalar::from_bytes(q_minus_1);
  CHECK((s + Scalar::one()).is_zero());
  CHECK(s == -Scalar::one());
  check_decode_fails<Scalar>(Bytes(32, 0xff));
  check_decode_fails<Scalar>(Bytes(31, 0x00));
}

TEST_CASE("scalar field axioms on random triples") {
  auto rng = Rng::from_seed(11);
  for (int i = 0; i < 200; ++i) {
    auto a = Scalar::random(rng), b = Scalar::random(rng), c = Scalar::random(rng);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a + b == b + a);
    CHECK(a - a == Scalar::zero());
    if (!a.is_zero()) CHECK(a * a.inverse() == Scalar::one());
  }
  CHECK_THROWS_AS(Scalar::zero().inverse(), Error);
  CHECK(Scalar::from_u64(3).pow(5) == Scalar::from_u64(243));
}

TEST_CASE("pairing is bilinear and non-degenerate") {
  auto rng = Rng::from_seed(12);
  const auto base = pairing(G1::generator(), G2::generator());
  CHECK_FALSE(base.is_one());
  for (int i = 0; i < 8; ++i) {
    auto a = Scalar::random(rng), b = Scalar::random(rng);
    CHECK(pairing(G1::generator() * a, G2::generator() * b) == base.pow(a * b));
    CHECK(pairing(G1::generator() * a, G2::generator()) ==
          pairing(G1::generator(), G2::generator() * a));
  }
  const G1 p = G1::generator() * Scalar::random(rng);
  const G2 q = G2::generator() * Scalar::random(rng);
  std::vector<G1> ps{p, -p};
  std::vector<G2> qs{q, q};
  CHECK(multi_pairing(ps, qs).is_one());
  CHECK(pairing(G1::identity(), q).is_one());
}

TEST_CASE("group element encodings round trip and are canonical") {
  auto rng = Rng::from_seed(13);
  std::set<std::string> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto s = Scalar::random(rng);
    const auto p = G1::generator() * s;
    const auto bytes = p.to_bytes();
    CHECK(G1::from_bytes(bytes) == p);
    CHECK(G1::from_bytes(bytes).to_bytes() == bytes);
    seen.insert(to_hex(bytes));
    CHECK(Scalar::from_bytes(s.to_bytes()) == s);
  }
  CHECK(seen.size() == 1000);

  const auto q = G2::generator() * Scalar::random(rng);
  CHECK(G2::from_bytes(q.to_bytes()) == q);
  const auto e = pairing(G1::generator(), q);
  CHECK(GT::from_bytes(e.to_bytes()) == e);
  CHECK(G1::from_bytes(G1::identity().to_bytes()).is_identity());
}

TEST_CASE("decoders reject malformed input") {
  check_decode_fails<G1>(Bytes(48, 0xff));
  check_decode_fails<G2>(Bytes(96, 0xff));
  check_decode_fails<GT>(Bytes(576, 0xff));
  check_decode_fails<G1>(Bytes(47, 0x00));
  // Off-curve: flip the last byte of a valid compressed point until the
  // x-coordinate has no square root.
  auto bytes = G1::generator().to_bytes();
  int rejected = 0;
  for (int d = 1; d < 16; ++d) {
    auto b = bytes;
    b.back() ^= static_cast<std::uint8_t>(d);
    try {
      (void)G1::from_bytes(b);
    } catch (const Error&) {
      ++rejected;
    }
  }
  CHECK(rejected > 0);
  // A GT-sized buffer holding a non-group element.
  auto one = GT::one().to_bytes();
  one[575] ^= 0x02;
  check_decode_fails<GT>(one);
}

TEST_CASE("golden encodings") {
  auto rng = Rng::from_seed(2024);
  const auto s = Scalar::random(rng);
  golden::check("group.txt", "scalar", s.to_bytes());
  golden::check("group.txt", "g1", (G1::generator() * s).to_bytes());
  golden::check("group.txt", "g2", (G2::generator() * s).to_bytes());
  golden::check("group.txt", "g1_hash", G1::hash("DETAPS-TEST", as_bytes("abc")).to_bytes());
  golden::check("group.txt", "gt_prefix",
                ByteView(pairing(G1::generator() * s, G2::generator()).to_bytes()).first(64));
}

TEST_CASE("rng streams are deterministic and forks are independent") {
  auto a = Rng::from_seed(5), b = Rng::from_seed(5);
  CHECK(a.bytes(64) == b.bytes(64));
  auto f1 = a.fork("x"), f2 = a.fork("y");
  CHECK(f1.bytes(32) != f2.bytes(32));
  CHECK(a.bytes(16) == b.bytes(16));
  for (int i = 0; i < 100; ++i) CHECK(a.below(7) < 7);
}
