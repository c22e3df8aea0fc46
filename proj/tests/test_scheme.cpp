#include <algorithm>
#include <map>
#include <set>

#include <doctest.h>

#include "detaps/enclave.hpp"
#include "detaps/errors.hpp"
#include "detaps/rng.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::scheme;

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

SystemParams small(std::uint32_t n, std::uint32_t t, std::uint32_t n3 = 10) {
  SystemParams p;
  p.n = n;
  p.t = t;
  p.n1 = 2;
  p.n2 = 2;
  p.n3 = n3;
  return p;
}

struct World {
  SystemKeys sys;
  Gid gid;
  GidRegistry registry;

  World(const SystemParams& p, std::uint64_t seed) : sys(setup(p, seed)) {
    gid = derive_gid(sys.pk, "default", 1);
    registry = {{gid, 1}};
  }

  std::vector<Pid> pids(std::initializer_list<std::size_t> idx) const {
    std::vector<Pid> out;
    for (auto i : idx) out.push_back(sys.notaries[i].keys.pid);
    return out;
  }

  std::vector<Pid> first_pids(std::size_t k) const {
    std::vector<Pid> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back(sys.notaries[i].keys.pid);
    return out;
  }

  ats::Quorum first_quorum() const {
    std::vector<std::uint32_t> q;
    for (std::uint32_t i = 1; i <= sys.params.t; ++i) q.push_back(i);
    return ats::make_quorum(q);
  }

  std::vector<EncryptedShare> shares(ByteView m, const ats::Quorum& q, const std::vector<Pid>& n,
                                     Rng& rng, std::size_t combiner = 0) const {
    std::vector<EncryptedShare> out;
    for (auto i : q)
      out.push_back(sign(sys.pk, sys.signers[i - 1], m, q, n, gid, sys.pk.combiner_enc[combiner], rng));
    return out;
  }

  std::vector<CombineOutput> run_combine(const std::vector<EncryptedShare>& batch,
                                         std::uint64_t epoch = 1, std::size_t j = 0) {
    return combine(sys.combiners[j], sys.combiner_sig_secrets[j], epoch, registry, batch);
  }

  Signature one_signature(ByteView m, const ats::Quorum& q, const std::vector<Pid>& n,
                          std::uint64_t seed) {
    auto rng = Rng::from_seed(seed);
    auto out = run_combine(shares(m, q, n, rng));
    REQUIRE(out.size() == 1);
    return out[0].sigma;
  }

  std::vector<NotaryResponse> responses(ByteView m, const Signature& sigma,
                                        const std::vector<std::size_t>& who, Rng& rng) const {
    std::vector<NotaryResponse> out;
    for (auto i : who)
      out.push_back(notary_respond(sys.pk, sys.notaries[i], m, sigma, sys.pk.tracer_enc[0], rng));
    return out;
  }
};

const Scalar& target_sk() {
  static const Scalar sk = prim::keygen(prim::SchemeId::Pke, to_bytes("trace target")).secret;
  return sk;
}

G1 target_pub() { return G1::generator() * target_sk(); }

}  // namespace

TEST_CASE("setup is deterministic and checks its bounds") {
  SystemParams p;
  const auto a = setup(p, 1);
  const auto b = setup(p, 1);
  const auto c = setup(p, 2);
  CHECK(encode(a.pk) == encode(b.pk));
  CHECK_FALSE(encode(a.pk) == encode(c.pk));
  CHECK(decode_all<PublicKey>(encode(a.pk)).n3 == 10);
  CHECK(a.signers.size() == 10);
  CHECK(a.combiners.size() == 5);
  CHECK(a.tracers.size() == 5);
  CHECK(a.notaries.size() == 10);
  CHECK(a.pk.combiner_enc[2] == a.combiners[2].enc_pub());
  CHECK(a.pk.tracer_att[4] == a.tracers[4].attestation_pub());
  for (const auto& nt : a.pk.notaries) CHECK(dtpke::certificate_valid(a.pk.vk, nt));

  auto bad = p;
  bad.t = 11;
  CHECK(code_of([&] { setup(bad, 1); }) == Errc::BadThreshold);
  bad.t = 0;
  CHECK(code_of([&] { setup(bad, 1); }) == Errc::BadThreshold);
  bad = p;
  bad.n2 = 0;
  CHECK(code_of([&] { setup(bad, 1); }) == Errc::BadBound);
  bad = p;
  bad.n3 = 0;
  CHECK(code_of([&] { setup(bad, 1); }) == Errc::BadBound);
}

TEST_CASE("gid derivation") {
  const auto sys = setup(small(5, 3, 5), 3);
  CHECK(derive_gid(sys.pk, "default", 7) == derive_gid(sys.pk, "default", 7));
  CHECK_FALSE(derive_gid(sys.pk, "default", 7) == derive_gid(sys.pk, "default", 8));
  Writer w;
  w.str("default").u64(7);
  CHECK(derive_gid(sys.pk, "default", 7).value == tagged_digest("DETAPS-GID", w.bytes()));
  CHECK(code_of([&] { derive_gid(sys.pk, "other", 7); }) == Errc::UnknownGroup);
}

TEST_CASE("sign wraps the share for the enclave") {
  World w(small(5, 3, 5), 4);
  const auto test_key = prim::keygen(prim::SchemeId::Pke, to_bytes("test enclave"));
  auto rng = Rng::from_seed(5);
  const auto m = to_bytes("transfer 10");
  const auto q = ats::make_quorum({1, 2, 4});
  const auto n = w.pids({0, 2});
  const auto s1 = sign(w.sys.pk, w.sys.signers[0], m, q, n, w.gid, test_key.pub, rng);
  const auto s2 = sign(w.sys.pk, w.sys.signers[1], m, q, n, w.gid, test_key.pub, rng);
  CHECK_FALSE(s1 == s2);
  const auto p1 = open_share(test_key.secret, s1, 5, 5);
  const auto p2 = open_share(test_key.secret, s2, 5, 5);
  CHECK(p1.m == m);
  CHECK(p1.members == n);
  CHECK(p1.gid == w.gid);
  CHECK(p1.m == p2.m);
  CHECK(p1.members == p2.members);
  CHECK(p1.share.signer == 1);
  CHECK(p2.share.quorum == q);

  // Length depends on |m| only.
  const auto s3 = sign(w.sys.pk, w.sys.signers[0], m, q, w.pids({0, 1, 2, 3, 4}), w.gid,
                       test_key.pub, rng);
  const auto s4 = sign(w.sys.pk, w.sys.signers[0], m, q, {}, w.gid, test_key.pub, rng);
  CHECK(encode(s1).size() == encode(s3).size());
  CHECK(encode(s1).size() == encode(s4).size());

  CHECK(code_of([&] {
          sign(w.sys.pk, w.sys.signers[0], m, ats::make_quorum({1, 2}), n, w.gid, test_key.pub, rng);
        }) == Errc::WrongQuorumSize);
  CHECK(code_of([&] {
          sign(w.sys.pk, w.sys.signers[4], m, q, n, w.gid, test_key.pub, rng);
        }) == Errc::NotInQuorum);
  auto stranger = n;
  stranger.push_back(Pid{});
  CHECK(code_of([&] {
          sign(w.sys.pk, w.sys.signers[0], m, q, stranger, w.gid, test_key.pub, rng);
        }) == Errc::UnknownNotary);
  auto too_many = w.pids({0, 1, 2, 3, 4});
  too_many.push_back(too_many[0]);
  CHECK(code_of([&] {
          sign(w.sys.pk, w.sys.signers[0], m, q, too_many, w.gid, test_key.pub, rng);
        }) == Errc::TooManyPids);
}

TEST_CASE("batch signing matches across execution policies") {
  World w(small(5, 3, 5), 6);
  std::vector<SignRequest> reqs;
  for (int i = 0; i < 12; ++i)
    reqs.push_back({to_bytes("msg " + std::to_string(i)), ats::make_quorum({1, 3, 5}),
                    w.pids({static_cast<std::size_t>(i % 5)}), w.gid});
  const auto rng = Rng::from_seed(7);
  const auto serial = sign_batch(w.sys.pk, w.sys.signers[2], reqs, w.sys.pk.combiner_enc[0], rng,
                                 Exec::Serial);
  const auto parallel = sign_batch(w.sys.pk, w.sys.signers[2], reqs, w.sys.pk.combiner_enc[0],
                                   rng, Exec::Parallel);
  CHECK(serial == parallel);
  reqs[3].quorum = ats::make_quorum({1, 2, 4});
  CHECK(code_of([&] {
          sign_batch(w.sys.pk, w.sys.signers[2], reqs, w.sys.pk.combiner_enc[0], rng);
        }) == Errc::NotInQuorum);
}

TEST_CASE("sign, combine, verify and trace end to end") {
  World w(SystemParams{}, 8);
  const auto m = to_bytes("release funds");
  const auto q = ats::make_quorum({1, 3, 5, 7, 9});
  const auto n = w.pids({1, 4, 6});
  const auto sigma = w.one_signature(m, q, n, 9);
  CHECK(verify(w.sys.pk, m, sigma));
  CHECK_FALSE(verify(w.sys.pk, to_bytes("release fund"), sigma));
  CHECK(decode_all<Signature>(encode(sigma)) == sigma);

  // Members find the signature through the index; outsiders do not.
  const kase::Index index{sigma.body.c1, sigma.body.c2, sigma.body.entries};
  for (std::size_t i = 0; i < 10; ++i) {
    const auto td = kase::adjust(w.sys.pk.kase, 1, notary_trapdoor(w.sys.notaries[i]));
    const bool member = i == 1 || i == 4 || i == 6;
    CHECK(kase::match(td, index).has_value() == member);
  }

  auto rng = Rng::from_seed(10);
  CHECK(code_of([&] {
          notary_respond(w.sys.pk, w.sys.notaries[0], m, sigma, w.sys.pk.tracer_enc[0], rng);
        }) == Errc::NoMatch);
  const auto responses = w.responses(m, sigma, {1, 4, 6}, rng);
  const auto sealed = trace(w.sys.tracers[0], m, sigma, responses, target_pub());
  CHECK(open_trace_result(target_sk(), sealed) == q);

  // A tracer whose key the responses were not sealed to gets nothing usable.
  CHECK(code_of([&] { trace(w.sys.tracers[1], m, sigma, responses, target_pub()); }) ==
        Errc::InsufficientShares);
}

TEST_CASE("incomplete quorums are retained across epochs") {
  auto p = small(5, 5, 5);
  p.retention_epochs = 2;
  World w(p, 11);
  auto rng = Rng::from_seed(12);
  const auto m = to_bytes("late share");
  const auto q = w.first_quorum();
  auto batch = w.shares(m, q, w.pids({0, 1}), rng);
  const auto last = batch.back();
  batch.pop_back();
  CHECK(w.run_combine(batch, 1).empty());
  const auto out = w.run_combine({last}, 2);
  REQUIRE(out.size() == 1);
  CHECK(verify(w.sys.pk, m, out[0].sigma));
  // The bucket was flushed on completion.
  CHECK(w.run_combine({last}, 2).empty());

  // Past the retention window the partial quorum is gone.
  const auto m2 = to_bytes("too late");
  auto batch2 = w.shares(m2, q, w.pids({0}), rng);
  const auto last2 = batch2.back();
  batch2.pop_back();
  CHECK(w.run_combine(batch2, 3).empty());
  CHECK(w.run_combine({last2}, 5).empty());
}

TEST_CASE("conflicting notary sets for one message produce nothing") {
  World w(small(5, 3, 5), 13);
  auto rng = Rng::from_seed(14);
  const auto m = to_bytes("contested");
  const auto q = ats::make_quorum({1, 2, 3});
  auto batch = w.shares(m, q, w.pids({0, 1}), rng);
  const auto other = w.shares(m, q, w.pids({2}), rng);
  batch.insert(batch.begin() + 1, other[1]);
  CHECK(w.run_combine(batch).empty());
}

TEST_CASE("unregistered gids wait for the registry and junk shares are dropped") {
  World w(small(5, 3, 5), 15);
  auto rng = Rng::from_seed(16);
  const auto m = to_bytes("new group");
  const auto q = ats::make_quorum({2, 3, 4});
  const auto registry = w.registry;
  w.registry.clear();
  auto batch = w.shares(m, q, w.pids({3}), rng);
  CHECK(w.run_combine(batch).empty());
  w.registry = registry;

  // Garbage, a share sealed to another combiner, and one signed for a different message.
  std::vector<EncryptedShare> junk;
  auto garbage = batch[0];
  garbage.ct.body[0] ^= 1;
  junk.push_back(garbage);
  junk.push_back(w.shares(m, q, w.pids({3}), rng, 1)[0]);
  const auto out = w.run_combine(junk);
  REQUIRE(out.size() == 1);
  CHECK(verify(w.sys.pk, m, out[0].sigma));
}

TEST_CASE("single-bit mutations of (m, sigma) never verify") {
  World w(small(5, 3, 5), 17);
  const auto m = to_bytes("mutate me");
  const auto sigma = w.one_signature(m, ats::make_quorum({1, 4, 5}), w.pids({0, 3}), 18);
  const auto sbytes = encode(sigma);
  auto rng = Rng::from_seed(19);
  int accepted = 0;
  for (int trial = 0; trial < 256; ++trial) {
    auto mm = m;
    auto sb = sbytes;
    const auto total = (mm.size() + sb.size()) * 8;
    const auto bit = rng.below(total);
    auto& target = bit < mm.size() * 8 ? mm : sb;
    const auto off = bit < mm.size() * 8 ? bit : bit - mm.size() * 8;
    target[off / 8] ^= static_cast<std::uint8_t>(1u << (off % 8));
    try {
      if (verify(w.sys.pk, mm, decode_all<Signature>(sb))) ++accepted;
    } catch (const Error&) {
    }
  }
  CHECK(accepted == 0);
}

TEST_CASE("a tampered eta makes notaries and tracers abort") {
  World w(small(5, 3, 5), 20);
  const auto m = to_bytes("eta");
  const auto sigma = w.one_signature(m, ats::make_quorum({1, 2, 3}), w.pids({0, 1}), 21);
  auto rng = Rng::from_seed(22);
  for (int trial = 0; trial < 32; ++trial) {
    auto bad = sigma;
    auto eb = encode(bad.eta);
    const auto bit = rng.below(eb.size() * 8);
    eb[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      bad.eta = decode_all<prim::SchnorrSig>(eb);
    } catch (const Error&) {
      continue;  // non-canonical scalar: rejected even earlier
    }
    CHECK(code_of([&] {
            notary_respond(w.sys.pk, w.sys.notaries[0], m, bad, w.sys.pk.tracer_enc[0], rng);
          }) == Errc::SigInvalid);
  }
  auto bad = sigma;
  bad.eta.response += Scalar::one();
  const auto responses = w.responses(m, sigma, {0, 1}, rng);
  CHECK(code_of([&] { trace(w.sys.tracers[0], m, bad, responses, target_pub()); }) ==
        Errc::SigInvalid);
}

TEST_CASE("trace needs every notary share and filters bad responses") {
  World w(small(5, 3, 5), 23);
  const auto m = to_bytes("audit");
  const auto q = ats::make_quorum({2, 3, 5});
  const auto sigma = w.one_signature(m, q, w.pids({0, 2, 4}), 24);
  auto rng = Rng::from_seed(25);
  const auto good = w.responses(m, sigma, {0, 2, 4}, rng);

  std::vector<NotaryResponse> two(good.begin(), good.begin() + 2);
  std::string message;
  try {
    trace(w.sys.tracers[0], m, sigma, two, target_pub());
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InsufficientShares);
    message = e.what();
  }
  CHECK(message.find('2') == std::string::npos);
  CHECK(message.find('3') == std::string::npos);

  // Bit-flipped ciphertext, a forged share sealed properly, and a response for another sigma.
  auto flipped = good[1];
  flipped.ct.body[5] ^= 0x10;
  auto plain = decode_all<ResponsePlain>(
      [&] {
        Writer wr;
        wr.put(ResponsePlain{w.sys.notaries[2].keys.public_part(),
                             dtpke::share_decrypt(w.sys.pk.dk, w.sys.notaries[2].keys.pid,
                                                  w.sys.notaries[2].keys.usk,
                                                  sigma.body.sigma_bar)});
        return std::move(wr).bytes();
      }());
  plain.share.share_point = plain.share.share_point + G1::generator();
  NotaryResponse forged{good[1].sigma_digest,
                        prim::pke_encrypt(w.sys.pk.tracer_enc[0], encode(plain), rng)};
  auto stray = good[0];
  stray.sigma_digest[0] ^= 1;

  CHECK(code_of([&] {
          trace(w.sys.tracers[0], m, sigma, {good[0], flipped, forged, good[2]}, target_pub());
        }) == Errc::InsufficientShares);
  const auto sealed =
      trace(w.sys.tracers[0], m, sigma, {forged, stray, good[2], flipped, good[0], good[1]},
            target_pub());
  CHECK(open_trace_result(target_sk(), sealed) == q);
}

TEST_CASE("signature and share sizes do not depend on t or t'") {
  std::set<std::size_t> sig_sizes, share_sizes, trace_sizes;
  const auto m = Bytes(64, 0x5a);
  for (std::uint32_t t : {2u, 3u, 5u}) {
    World w(small(10, t), 30 + t);
    const auto q = w.first_quorum();
    for (std::uint32_t tp : {1u, 2u, 3u}) {
      auto rng = Rng::from_seed(100 * t + tp);
      const auto batch = w.shares(m, q, w.first_pids(tp), rng);
      for (const auto& s : batch) share_sizes.insert(encode(s).size());
      const auto out = w.run_combine(batch, tp);
      REQUIRE(out.size() == 1);
      CHECK(verify(w.sys.pk, m, out[0].sigma));
      sig_sizes.insert(encode(out[0].sigma).size());
      std::vector<std::size_t> who;
      for (std::size_t i = 0; i < tp; ++i) who.push_back(i);
      const auto sealed = trace(w.sys.tracers[0], m, out[0].sigma,
                                w.responses(m, out[0].sigma, who, rng), target_pub());
      CHECK(open_trace_result(target_sk(), sealed) == q);
      trace_sizes.insert(encode(sealed).size());
    }
  }
  CHECK(sig_sizes.size() == 1);
  CHECK(share_sizes.size() == 1);
  CHECK(trace_sizes.size() == 1);
}

namespace {

bool contains(const Bytes& hay, const Bytes& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Bytes u32_bytes(std::uint32_t v) {
  Writer w;
  w.u32(v);
  return std::move(w).bytes();
}

}  // namespace

TEST_CASE("enclave outputs carry no encoding of t, t', S or N") {
  // One transcript per (t, t'); offsets where a transcript spells its own t or t'.
  std::map<std::pair<std::uint32_t, std::uint32_t>, Bytes> transcripts;
  for (std::uint32_t t : {2u, 3u, 5u}) {
    World w(small(10, t), 40 + t);
    const auto q = w.first_quorum();
    for (std::uint32_t tp : {1u, 2u, 3u}) {
      Bytes transcript;
      auto record = [&](std::string_view, ByteView out) {
        transcript.insert(transcript.end(), out.begin(), out.end());
      };
      w.sys.combiners[0].set_recorder(record);
      w.sys.tracers[0].set_recorder(record);
      auto rng = Rng::from_seed(200 * t + tp);
      const auto m = to_bytes("hygiene");
      const auto n = w.first_pids(tp);
      const auto out = w.run_combine(w.shares(m, q, n, rng), tp);
      REQUIRE(out.size() == 1);
      std::vector<std::size_t> who;
      for (std::size_t i = 0; i < tp; ++i) who.push_back(i);
      trace(w.sys.tracers[0], m, out[0].sigma, w.responses(m, out[0].sigma, who, rng),
            target_pub());
      w.sys.combiners[0].set_recorder({});
      w.sys.tracers[0].set_recorder({});

      CHECK_FALSE(contains(transcript, ats::canonical_quorum(q)));
      Writer nw;
      nw.u32(tp);
      for (const auto& pid : n) {
        CHECK_FALSE(contains(transcript, encode(pid)));
        nw.put(pid);
      }
      CHECK_FALSE(contains(transcript, nw.bytes()));
      transcripts[{t, tp}] = std::move(transcript);
    }
  }
  std::set<std::size_t> lengths;
  for (const auto& [_, tr] : transcripts) lengths.insert(tr.size());
  CHECK(lengths.size() == 1);

  // No byte offset tracks t (or t') across configurations.
  auto tracking = [&](auto value_of) {
    const auto len = transcripts.begin()->second.size();
    std::size_t hits = 0;
    for (std::size_t off = 0; off + 4 <= len; ++off) {
      bool all = true;
      for (const auto& [key, tr] : transcripts) {
        const auto v = u32_bytes(value_of(key));
        if (!std::equal(v.begin(), v.end(), tr.begin() + off)) {
          all = false;
          break;
        }
      }
      hits += all;
    }
    return hits;
  };
  CHECK(tracking([](auto k) { return k.first; }) == 0);
  CHECK(tracking([](auto k) { return k.second; }) == 0);
}

TEST_CASE("scheme golden encodings") {
  World w(small(5, 3, 5), 50);
  golden::check("scheme.txt", "pk_digest", sha256(encode(w.sys.pk)));
  golden::check("scheme.txt", "gid", w.gid.value);
  auto rng = Rng::from_seed(51);
  const auto m = to_bytes("golden");
  const auto share = sign(w.sys.pk, w.sys.signers[0], m, ats::make_quorum({1, 2, 3}), w.pids({1}),
                          w.gid, w.sys.pk.combiner_enc[0], rng);
  golden::check("scheme.txt", "share_digest", sha256(encode(share)));
  const auto sigma = w.one_signature(m, ats::make_quorum({1, 2, 3}), w.pids({1}), 52);
  golden::check("scheme.txt", "signature_digest", signature_digest(m, sigma));
}
