#include <algorithm>
#include <bit>
#include <set>

#include <doctest.h>

#include "detaps/dtpke.hpp"
#include "detaps/errors.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::dtpke;

namespace {

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::ConfigError;
}

struct Fixture {
  Authority auth;
  std::vector<NotaryKeys> notaries;

  Fixture(std::uint32_t n3, std::uint32_t t_max, std::uint64_t seed, std::uint32_t joins) {
    auto rng = Rng::from_seed(seed);
    auth = setup(n3, t_max, rng);
    for (std::uint32_t i = 0; i < joins; ++i)
      notaries.push_back(join(auth.mk, "notary-" + std::to_string(i)));
  }

  std::vector<NotaryPublic> members(std::initializer_list<std::size_t> idx) const {
    std::vector<NotaryPublic> out;
    for (auto i : idx) out.push_back(notaries[i].public_part());
    return out;
  }

  std::vector<NotaryPublic> first(std::size_t k) const {
    std::vector<NotaryPublic> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(notaries[i].public_part());
    return out;
  }

  DecryptionShare share(std::size_t i, const Ciphertext& c) const {
    return share_decrypt(auth.dk, notaries[i].pid, notaries[i].usk, c);
  }
};

}  // namespace

TEST_CASE("setup bounds and join pseudo-identities") {
  auto rng = Rng::from_seed(41);
  auto a = setup(10, 10, rng);
  std::set<Pid> pids;
  for (int i = 0; i < 10; ++i) pids.insert(join(a.mk, "n" + std::to_string(i)).pid);
  CHECK(pids.size() == 10);
  CHECK_FALSE(join(a.mk, "same").pid == join(a.mk, "same").pid);
  CHECK(code_of([&] { setup(10, 0, rng); }) == Errc::BadBound);
  CHECK(code_of([&] { setup(4, 5, rng); }) == Errc::BadBound);

  const auto k = join(a.mk, "x");
  CHECK(k.upk == secret_base() * k.usk);
  CHECK(certificate_valid(a.vk, k.public_part()));
  auto forged = k.public_part();
  forged.pid.epoch += 1;
  CHECK_FALSE(certificate_valid(a.vk, forged));
}

TEST_CASE("setup is deterministic under a seed") {
  auto r1 = Rng::from_seed(42), r2 = Rng::from_seed(42);
  auto a = setup(5, 3, r1), b = setup(5, 3, r2);
  CHECK(a.ek == b.ek);
  CHECK(join(a.mk, "n").uvk == join(b.mk, "n").uvk);
}

TEST_CASE("encrypt rejects bad thresholds and unknown members") {
  Fixture f(5, 5, 43, 6);
  auto rng = Rng::from_seed(1);
  const auto m = as_bytes("m");
  CHECK(code_of([&] { encrypt(f.auth.ek, f.first(3), 4, m, rng); }) == Errc::ThresholdTooLarge);
  CHECK(code_of([&] { encrypt(f.auth.ek, f.first(3), 0, m, rng); }) == Errc::ThresholdTooLarge);
  CHECK(code_of([&] { encrypt(f.auth.ek, f.first(6), 2, m, rng); }) == Errc::TooManyPids);

  Fixture other(5, 5, 44, 1);
  auto mixed = f.first(2);
  mixed.push_back(other.notaries[0].public_part());
  CHECK(code_of([&] { encrypt(f.auth.ek, mixed, 2, m, rng); }) == Errc::UnknownPid);
}

TEST_CASE("member shares verify and recover the plaintext") {
  Fixture f(5, 5, 45, 6);
  auto rng = Rng::from_seed(2);
  const auto members = f.first(5);
  const Bytes m = to_bytes("sigma^m under test");
  const auto c = encrypt(f.auth.ek, members, 3, m, rng);
  CHECK(validate(f.auth.ek, members, 3, c));

  std::vector<DecryptionShare> shares;
  for (std::size_t i = 0; i < 3; ++i) {
    shares.push_back(f.share(i, c));
    CHECK(share_verify(f.auth.vk, f.notaries[i].pid, f.notaries[i].uvk, c, shares.back()));
  }
  CHECK(combine(f.auth.ck, members, 3, c, shares) == m);

  // Notary 5 was joined but is outside N.
  const auto outsider = f.share(5, c);
  CHECK(outsider.slot == kNoSlot);
  CHECK_FALSE(share_verify(f.auth.vk, f.notaries[5].pid, f.notaries[5].uvk, c, outsider));

  const auto meta = open_meta(f.auth.ck, c);
  REQUIRE(meta.has_value());
  CHECK(meta->threshold == 3);
  CHECK(meta->members.size() == 5);
}

TEST_CASE("single member with t' = 1") {
  Fixture f(3, 2, 46, 1);
  auto rng = Rng::from_seed(3);
  const auto c = encrypt(f.auth.ek, f.first(1), 1, as_bytes("solo"), rng);
  CHECK(combine(f.auth.ck, f.first(1), 1, c, {f.share(0, c)}) == to_bytes("solo"));
}

TEST_CASE("ciphertext size depends only on (n3, t'_max)") {
  Fixture f(10, 5, 47, 10);
  auto rng = Rng::from_seed(4);
  const Bytes m(200, 0x5a);
  const auto a = encode(encrypt(f.auth.ek, f.first(3), 2, m, rng));
  const auto b = encode(encrypt(f.auth.ek, f.first(8), 5, m, rng));
  CHECK(a.size() == b.size());
  CHECK(a.size() == ciphertext_size(10, 5, m.size()));
  CHECK(decode_all<Ciphertext>(a).slots.size() == 10);
}

TEST_CASE("exhaustive subsets: n3 = 5, t' = 3") {
  Fixture f(5, 5, 48, 5);
  auto rng = Rng::from_seed(5);
  const auto members = f.first(5);
  const Bytes m = to_bytes("exhaustive");
  const auto c = encrypt(f.auth.ek, members, 3, m, rng);
  std::vector<DecryptionShare> all;
  for (std::size_t i = 0; i < 5; ++i) all.push_back(f.share(i, c));

  int ok = 0, failed = 0;
  for (unsigned mask = 0; mask < 32; ++mask) {
    const int k = std::popcount(mask);
    if (k != 2 && k != 3) continue;
    std::vector<DecryptionShare> subset;
    for (unsigned i = 0; i < 5; ++i)
      if (mask & (1u << i)) subset.push_back(all[i]);
    if (k == 3) {
      CHECK(combine(f.auth.ck, members, 3, c, subset) == m);
      ++ok;
    } else {
      CHECK(code_of([&] { combine(f.auth.ck, members, 3, c, subset); }) ==
            Errc::InsufficientShares);
      ++failed;
    }
  }
  CHECK(ok == 10);
  CHECK(failed == 10);
}

TEST_CASE("subset oracle: success iff enough member shares (n3 = 6)") {
  Fixture f(6, 4, 49, 6);
  auto rng = Rng::from_seed(6);
  const auto members = f.members({0, 2, 3, 4, 5});  // notary 1 is outside N
  for (std::uint32_t t = 1; t <= 4; ++t) {
    const Bytes m = rng.bytes(40);
    const auto c = encrypt(f.auth.ek, members, t, m, rng);
    std::vector<DecryptionShare> all;
    for (std::size_t i = 0; i < 6; ++i) all.push_back(f.share(i, c));
    for (unsigned mask = 0; mask < 64; ++mask) {
      std::vector<DecryptionShare> subset;
      std::uint32_t in_n = 0;
      for (unsigned i = 0; i < 6; ++i)
        if (mask & (1u << i)) {
          subset.push_back(all[i]);
          if (i != 1) ++in_n;
        }
      if (in_n >= t) {
        CHECK(combine(f.auth.ck, members, t, c, subset, Exec::Serial) == m);
      } else {
        CHECK(code_of([&] { combine(f.auth.ck, members, t, c, subset, Exec::Serial); }) ==
              Errc::InsufficientShares);
      }
    }
  }
}

TEST_CASE("invalid shares are filtered, tampered bodies fail") {
  Fixture f(5, 5, 50, 5);
  auto rng = Rng::from_seed(7);
  const auto members = f.first(5);
  const Bytes m = to_bytes("filtered");
  auto c = encrypt(f.auth.ek, members, 3, m, rng);
  std::vector<DecryptionShare> shares{f.share(0, c), f.share(1, c), f.share(2, c), f.share(3, c)};
  shares[1].proof_z += group::Scalar::one();
  CHECK_FALSE(share_verify(f.auth.vk, f.notaries[1].pid, f.notaries[1].uvk, c, shares[1]));
  CHECK(combine(f.auth.ck, members, 3, c, shares) == m);

  const auto serial = verify_shares(f.auth.vk, members, c, shares, Exec::Serial);
  CHECK(serial == verify_shares(f.auth.vk, members, c, shares, Exec::Parallel));
  CHECK(serial == std::vector<std::uint8_t>{1, 0, 1, 1});

  // A share claiming another point fails its decryption proof.
  auto moved = f.share(0, c);
  moved.share_point += group::G1::generator();
  CHECK_FALSE(share_verify(f.auth.vk, f.notaries[0].pid, f.notaries[0].uvk, c, moved));

  c.body[0] ^= 0x01;
  CHECK(code_of([&] { combine(f.auth.ck, members, 3, c, shares); }) == Errc::AuthFailure);
}

TEST_CASE("combine rejects a mismatched (N, t')") {
  Fixture f(5, 5, 51, 5);
  auto rng = Rng::from_seed(8);
  const auto members = f.first(4);
  const auto c = encrypt(f.auth.ek, members, 2, as_bytes("m"), rng);
  std::vector<DecryptionShare> shares{f.share(0, c), f.share(1, c)};
  CHECK(code_of([&] { combine(f.auth.ck, members, 3, c, shares); }) == Errc::ValidationFailed);
  CHECK(code_of([&] { combine(f.auth.ck, f.first(3), 2, c, shares); }) ==
        Errc::ValidationFailed);
}

TEST_CASE("validate rejects a wrong N and every header mutation") {
  Fixture f(4, 3, 52, 5);
  auto rng = Rng::from_seed(9);
  const auto members = f.first(3);
  const auto c = encrypt(f.auth.ek, members, 2, as_bytes("validate"), rng);
  CHECK(validate(f.auth.ek, members, 2, c));
  CHECK_FALSE(validate(f.auth.ek, f.members({0, 1, 4}), 2, c));
  CHECK_FALSE(validate(f.auth.ek, members, 4, c));

  // Flip one bit in each byte of the encoding; decoding failures count as rejection.
  const auto enc = encode(c);
  int accepted = 0;
  for (std::size_t pos = 0; pos < enc.size(); pos += 7) {
    auto bad = enc;
    bad[pos] ^= static_cast<std::uint8_t>(1u << (pos % 8));
    try {
      if (validate(f.auth.ek, members, 2, decode_all<Ciphertext>(bad))) ++accepted;
    } catch (const Error&) {
    }
  }
  CHECK(accepted == 0);
}

TEST_CASE("dtpke golden encoding") {
  Fixture f(3, 2, 53, 3);
  auto rng = Rng::from_seed(10);
  const auto c = encrypt(f.auth.ek, f.first(2), 2, as_bytes("golden"), rng);
  golden::check("dtpke.txt", "ciphertext_digest", sha256(encode(c)));
  golden::check("dtpke.txt", "share", encode(f.share(0, c)));
  golden::check("dtpke.txt", "ek", encode(f.auth.ek));
}
