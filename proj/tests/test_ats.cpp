#include <algorithm>

#include <doctest.h>

#include "detaps/ats.hpp"
#include "detaps/errors.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::ats;

namespace {

std::vector<Share> sign_all(const KeyMaterial& km, ByteView m, const Quorum& q) {
  std::vector<Share> out;
  for (auto i : q) out.push_back(sign(km.signers[i - 1], m, q));
  return out;
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ConfigError;
}

}  // namespace

TEST_CASE("keygen validates the threshold") {
  auto rng = Rng::from_seed(31);
  const auto km = keygen(10, 5, rng);
  CHECK(km.pk.keys.size() == 10);
  CHECK(km.pk.t == 5);
  CHECK(keygen(1, 1, rng).pk.keys.size() == 1);
  CHECK(code_of([&] { keygen(3, 4, rng); }) == Errc::BadThreshold);
  CHECK(code_of([&] { keygen(3, 0, rng); }) == Errc::BadThreshold);
}

TEST_CASE("sign enforces quorum membership and size") {
  auto rng = Rng::from_seed(32);
  const auto km = keygen(7, 3, rng);
  const auto q = make_quorum({1, 4, 7});
  CHECK_NOTHROW(sign(km.signers[0], as_bytes("m"), q));
  CHECK(code_of([&] { sign(km.signers[1], as_bytes("m"), q); }) == Errc::NotInQuorum);
  CHECK(code_of([&] { sign(km.signers[0], as_bytes("m"), make_quorum({1, 2})); }) ==
        Errc::WrongQuorumSize);
}

TEST_CASE("combine, verify and trace recover the quorum") {
  auto rng = Rng::from_seed(33);
  const auto km = keygen(7, 3, rng);
  const auto q = make_quorum({7, 1, 4});
  const Bytes m = to_bytes("transfer 10 units");
  const auto sig = combine(km.pk, m, q, sign_all(km, m, q));
  CHECK(verify(km.pk, m, sig));
  REQUIRE(trace(km.pk, m, sig).has_value());
  CHECK(*trace(km.pk, m, sig) == Quorum{1, 4, 7});
  CHECK_FALSE(verify(km.pk, as_bytes("another message"), sig));
  CHECK_FALSE(trace(km.pk, as_bytes("another message"), sig).has_value());
  CHECK(encode(sig).size() == Signature::encoded_size(3));
}

TEST_CASE("degenerate single-signer scheme") {
  auto rng = Rng::from_seed(34);
  const auto km = keygen(1, 1, rng);
  const auto q = make_quorum({1});
  const auto sig = combine(km.pk, as_bytes("m"), q, sign_all(km, as_bytes("m"), q));
  CHECK(trace(km.pk, as_bytes("m"), sig) == q);
}

TEST_CASE("combine error paths") {
  auto rng = Rng::from_seed(35);
  const auto km = keygen(7, 3, rng);
  const auto q = make_quorum({2, 3, 5});
  const Bytes m = to_bytes("m");
  auto shares = sign_all(km, m, q);

  auto partial = shares;
  partial.pop_back();
  CHECK(code_of([&] { combine(km.pk, m, q, partial); }) == Errc::InsufficientShares);

  // Same message, different quorum: shares cannot be mixed.
  const auto q2 = make_quorum({2, 3, 6});
  auto mixed = shares;
  mixed[2] = sign(km.signers[5], m, q2);
  CHECK(code_of([&] { combine(km.pk, m, q, mixed); }) == Errc::QuorumMismatch);

  // Bit-flipped share: the per-share Schnorr check names the culprit.
  for (std::size_t victim = 0; victim < shares.size(); ++victim) {
    auto bad = shares;
    auto enc = encode(bad[victim].inner);
    enc[40] ^= 0x01;
    bad[victim].inner = decode_all<prim::SchnorrSig>(enc);
    // Independent oracle: which shares verify on their own?
    const auto payload = signing_payload(m, q);
    std::uint32_t expected = 0;
    for (const auto& s : bad)
      if (!prim::sig_verify(km.pk.keys[s.signer - 1], payload, s.inner)) {
        expected = s.signer;
        break;
      }
    REQUIRE(expected == q[victim]);
    try {
      combine(km.pk, m, q, bad);
      FAIL("combine accepted a bad share");
    } catch (const ShareInvalidError& e) {
      CHECK(e.culprit() == expected);
      CHECK(e.code() == Errc::ShareInvalid);
    }
  }
}

TEST_CASE("every two-share subset fails at t = 3") {
  auto rng = Rng::from_seed(36);
  const auto km = keygen(5, 3, rng);
  const auto q = make_quorum({1, 3, 5});
  const auto shares = sign_all(km, as_bytes("m"), q);
  for (std::size_t a = 0; a < shares.size(); ++a)
    for (std::size_t b = a + 1; b < shares.size(); ++b)
      CHECK(code_of([&] { combine(km.pk, as_bytes("m"), q, {shares[a], shares[b]}); }) ==
            Errc::InsufficientShares);
}

TEST_CASE("serial and parallel share verification agree") {
  auto rng = Rng::from_seed(37);
  const auto km = keygen(12, 6, rng);
  const auto q = make_quorum({1, 2, 5, 8, 11, 12});
  auto shares = sign_all(km, as_bytes("m"), q);
  shares[3].inner.response += group::Scalar::one();
  const auto serial = verify_shares(km.pk, as_bytes("m"), shares, Exec::Serial);
  const auto par = verify_shares(km.pk, as_bytes("m"), shares, Exec::Parallel);
  CHECK(serial == par);
  CHECK(std::count(serial.begin(), serial.end(), 0) == 1);
}

TEST_CASE("accountability holds across many random quorums") {
  auto rng = Rng::from_seed(38);
  for (std::uint32_t n = 1; n <= 8; ++n)
    for (std::uint32_t t = 1; t <= n; ++t) {
      const auto km = keygen(n, t, rng);
      std::vector<std::uint32_t> all(n);
      for (std::uint32_t i = 0; i < n; ++i) all[i] = i + 1;
      for (std::uint32_t i = n; i > 1; --i) std::swap(all[i - 1], all[rng.below(i)]);
      const auto q = make_quorum({all.begin(), all.begin() + t});
      const auto m = rng.bytes(32);
      const auto sig = combine(km.pk, m, q, sign_all(km, m, q));
      CHECK(verify(km.pk, m, sig));
      CHECK(trace(km.pk, m, sig) == q);
    }
}

TEST_CASE("forged share never completes a signature") {
  auto rng = Rng::from_seed(39);
  const auto km = keygen(6, 3, rng);
  int accepted = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto q = make_quorum({1, 2, 3 + static_cast<std::uint32_t>(rng.below(4))});
    const auto m = rng.bytes(16);
    auto shares = sign_all(km, m, q);
    // The last signer is honest-but-absent; its share is forged.
    shares.back().inner = {group::Scalar::random(rng), group::Scalar::random(rng)};
    Signature forged{q, {}};
    for (const auto& s : shares) forged.sigs.push_back(s.inner);
    if (verify(km.pk, m, forged)) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("ats golden encoding") {
  auto rng = Rng::from_seed(40);
  const auto km = keygen(4, 2, rng);
  const auto q = make_quorum({2, 4});
  const auto sig = combine(km.pk, as_bytes("golden"), q, sign_all(km, as_bytes("golden"), q));
  golden::check("ats.txt", "signature", encode(sig));
  CHECK(decode_all<Signature>(encode(sig)) == sig);
}
