#include <array>
#include <cmath>

#include <doctest.h>

#include "detaps/errors.hpp"
#include "detaps/kase.hpp"
#include "detaps/nizk.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::nizk;

namespace {

// A complete honest combiner output for one small system.
struct Instance {
  CombineStatement st;
  CombineWitness wit;
  Scalar att_sk;
};

Instance make_instance(std::uint64_t seed, std::string_view msg = "pay 5") {
  auto rng = Rng::from_seed(seed);
  Instance in;
  const auto km = ats::keygen(5, 3, rng);
  const auto q = ats::make_quorum({1, 2, 4});
  const Bytes m = to_bytes(msg);
  std::vector<ats::Share> shares;
  for (auto i : q) shares.push_back(ats::sign(km.signers[i - 1], m, q));
  in.wit.pk = km.pk;
  in.wit.sig_m = ats::combine(km.pk, m, q, shares);
  in.wit.r_pk = Scalar::random(rng);

  auto auth = dtpke::setup(4, 4, rng);
  std::vector<dtpke::NotaryPublic> members;
  for (int i = 0; i < 3; ++i) {
    const auto k = dtpke::join(auth.mk, "n" + std::to_string(i));
    members.push_back(k.public_part());
    in.wit.members.push_back(k.pid);
  }
  dtpke::EncryptionSecrets secrets;
  const auto sigma_bar = dtpke::encrypt(auth.ek, members, 3, encode(in.wit.sig_m), rng, &secrets);
  in.wit.enc_secrets = secrets.flatten();

  const auto params = kase::setup(4, rng);
  const auto mk = kase::keygen(rng);
  in.wit.gid_slot = 3;
  const auto ix = kase::encrypt(params, mk.mpk, 3, in.wit.members, 4, rng, &in.wit.index_randomness);

  in.att_sk = Scalar::random_nonzero(rng);
  in.st.t_bound = 4;
  in.st.com_pk = prim::com_commit(ats_key_bytes(km.pk), in.wit.r_pk);
  in.st.ek_digest = sha256(encode(auth.ek));
  in.st.mpk = mk.mpk.v;
  in.st.gid_bases.assign(params.pk.begin() + 1, params.pk.end());
  in.st.m = m;
  in.st.sigma_bar_digest = sha256(encode(sigma_bar));
  in.st.enc_points = dtpke::randomness_points(sigma_bar);
  in.st.c1 = ix.c1;
  in.st.c2 = ix.c2;
  in.st.entries_digest = entries_digest(ix.entries);
  in.st.attestation_pub = G1::generator() * in.att_sk;
  return in;
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

TEST_CASE("honest proofs verify and are deterministic") {
  const auto in = make_instance(71);
  auto r1 = Rng::from_seed(1), r2 = Rng::from_seed(1);
  const auto p1 = prove_combine(in.st, in.wit, in.att_sk, r1);
  const auto p2 = prove_combine(in.st, in.wit, in.att_sk, r2);
  CHECK(verify_combine(in.st, p1));
  CHECK(encode(p1) == encode(p2));
  CHECK(decode_all<CombineProof>(encode(p1)) == p1);
  CHECK(check_equations(in.st, transcript_of(in.st, p1)));
  auto r3 = Rng::from_seed(2);
  CHECK_FALSE(encode(prove_combine(in.st, in.wit, in.att_sk, r3)) == encode(p1));
}

TEST_CASE("witness mismatches are refused before proving") {
  const auto in = make_instance(72);
  auto rng = Rng::from_seed(3);
  auto w = in.wit;
  w.r_pk += Scalar::one();
  CHECK(code_of([&] { prove_combine(in.st, w, in.att_sk, rng); }) == Errc::WitnessMismatch);
  w = in.wit;
  w.gid_slot = 2;
  CHECK(code_of([&] { prove_combine(in.st, w, in.att_sk, rng); }) == Errc::WitnessMismatch);
  w = in.wit;
  w.enc_secrets[0] += Scalar::one();
  CHECK(code_of([&] { prove_combine(in.st, w, in.att_sk, rng); }) == Errc::WitnessMismatch);
  w = in.wit;
  w.members.resize(5, w.members[0]);
  CHECK(code_of([&] { prove_combine(in.st, w, in.att_sk, rng); }) == Errc::WitnessMismatch);
  auto st = in.st;
  st.m = to_bytes("other");
  CHECK(code_of([&] { prove_combine(st, in.wit, in.att_sk, rng); }) == Errc::WitnessMismatch);
  CHECK(code_of([&] { prove_combine(in.st, in.wit, in.att_sk + Scalar::one(), rng); }) ==
        Errc::WitnessMismatch);
}

TEST_CASE("every gid slot can be the hidden one") {
  for (std::uint32_t slot = 1; slot <= 4; ++slot) {
    auto in = make_instance(73);
    auto rng = Rng::from_seed(slot);
    const auto t = Scalar::random_nonzero(rng);
    in.wit.gid_slot = slot;
    in.wit.index_randomness = t;
    in.st.c1 = G2::generator() * t;
    in.st.c2 = (in.st.mpk + in.st.gid_bases[slot - 1]) * t;
    CHECK(verify_combine(in.st, prove_combine(in.st, in.wit, in.att_sk, rng)));
  }
}

TEST_CASE("single-bit mutations of proof or statement are rejected") {
  const auto in = make_instance(74);
  auto rng = Rng::from_seed(4);
  const auto proof = prove_combine(in.st, in.wit, in.att_sk, rng);
  const auto pbytes = encode(proof);
  const auto sbytes = encode(in.st);
  int accepted = 0;
  for (int trial = 0; trial < 256; ++trial) {
    const bool on_proof = trial % 2 == 0;
    auto p = pbytes, s = sbytes;
    auto& target = on_proof ? p : s;
    const auto bit = rng.below(target.size() * 8);
    target[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      if (verify_combine(decode_all<CombineStatement>(s), decode_all<CombineProof>(p))) ++accepted;
    } catch (const Error&) {
    }
  }
  CHECK(accepted == 0);
}

TEST_CASE("transplanted and forged proofs never verify") {
  const auto a = make_instance(75, "message a");
  const auto b = make_instance(76, "message b");
  auto rng = Rng::from_seed(5);
  const auto pa = prove_combine(a.st, a.wit, a.att_sk, rng);
  CHECK_FALSE(verify_combine(b.st, pa));
  auto moved = a.st;
  moved.m = to_bytes("message b");
  CHECK_FALSE(verify_combine(moved, pa));

  int accepted = 0;
  for (int i = 0; i < 10000; ++i) {
    CombineProof forged;
    forged.open_x = Scalar::random(rng);
    forged.open_r = Scalar::random(rng);
    for (std::size_t k = 0; k < a.st.enc_points.size(); ++k)
      forged.enc_responses.push_back(Scalar::random(rng));
    for (std::size_t k = 0; k < a.st.gid_bases.size(); ++k) {
      forged.or_challenges.push_back(Scalar::random(rng));
      forged.or_responses.push_back(Scalar::random(rng));
      forged.challenge += forged.or_challenges.back();
    }
    forged.attestation = {Scalar::random(rng), Scalar::random(rng)};
    if (verify_combine(a.st, forged)) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("simulated transcripts satisfy the equations and look like honest ones") {
  const auto in = make_instance(77);
  auto rng = Rng::from_seed(6);
  std::array<double, 256> honest{}, simulated{};
  for (int i = 0; i < 40; ++i) {
    auto h = transcript_of(in.st, prove_combine(in.st, in.wit, in.att_sk, rng));
    const auto s = simulate(in.st, Scalar::random(rng), rng);
    REQUIRE(check_equations(in.st, h));
    REQUIRE(check_equations(in.st, s));
    // The simulator cannot produce the Fiat-Shamir challenge.
    CHECK_FALSE(verify_combine(in.st, s.proof));
    // The simulator has no attestation; compare the sigma part only.
    h.proof.attestation = {};
    for (auto b : h.bytes()) ++honest[b];
    for (auto b : s.bytes()) ++simulated[b];
  }
  // Two-sample chi-square over byte values; 255 degrees of freedom.
  double n1 = 0, n2 = 0;
  for (int b = 0; b < 256; ++b) n1 += honest[b], n2 += simulated[b];
  double chi = 0;
  for (int b = 0; b < 256; ++b) {
    const double tot = honest[b] + simulated[b];
    if (tot == 0) continue;
    const double e1 = tot * n1 / (n1 + n2), e2 = tot * n2 / (n1 + n2);
    chi += (honest[b] - e1) * (honest[b] - e1) / e1 + (simulated[b] - e2) * (simulated[b] - e2) / e2;
  }
  CHECK(chi < 400.0);

  auto bad = simulate(in.st, Scalar::random(rng), rng);
  bad.proof.open_x += Scalar::one();
  CHECK_FALSE(check_equations(in.st, bad));
}

TEST_CASE("nizk golden encoding") {
  const auto in = make_instance(78);
  auto rng = Rng::from_seed(7);
  golden::check("nizk.txt", "proof", encode(prove_combine(in.st, in.wit, in.att_sk, rng)));
  golden::check("nizk.txt", "statement_digest", sha256(encode(in.st)));
}
