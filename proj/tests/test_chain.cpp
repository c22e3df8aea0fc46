#include <algorithm>
#include <array>
#include <map>
#include <set>

#include <doctest.h>

#include "detaps/chain.hpp"
#include "detaps/errors.hpp"
#include "detaps/rng.hpp"
#include "detaps/scenario.hpp"
#include "golden.hpp"

using namespace detaps;
using namespace detaps::chain;

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

struct Net {
  kase::Params params;
  kase::MasterKeys keys;
  prim::KeyPair signer, combiner, auditor, admin, outsider;
  ChainState state;

  static Genesis genesis_for(std::uint64_t seed, std::uint32_t capacity, std::uint32_t tracers,
                             Net& self) {
    auto rng = Rng::from_seed(seed);
    self.params = kase::setup(capacity, rng);
    self.keys = kase::keygen(rng);
    self.signer = prim::keygen(prim::SchemeId::Sig, rng);
    self.combiner = prim::keygen(prim::SchemeId::Sig, rng);
    self.auditor = prim::keygen(prim::SchemeId::Sig, rng);
    self.admin = prim::keygen(prim::SchemeId::Sig, rng);
    self.outsider = prim::keygen(prim::SchemeId::Sig, rng);
    Genesis g;
    g.election_seed = rng.bytes(32);
    g.combiners = 5;
    g.tracers = tracers;
    g.kase = self.params;
    g.members = {{self.signer.pub, kSigner},
                 {self.combiner.pub, kCombiner},
                 {self.auditor.pub, kAuditor},
                 {self.admin.pub, kAdmin}};
    return g;
  }

  explicit Net(std::uint64_t seed, std::uint32_t capacity = 4, std::uint32_t tracers = 5)
      : state(genesis_for(seed, capacity, tracers, *this)) {}

  Receipt sign_tx(std::uint32_t combiner_index, std::uint8_t tag) {
    scheme::EncryptedShare s;
    s.ct.body = Bytes(8, tag);
    return state.submit_tx(make_tx(TxKind::Sign, encode(SignPayload{combiner_index, s}),
                                   signer.secret, state.epoch()));
  }

  Receipt response_tx(const Digest& d, std::uint8_t tag) {
    scheme::NotaryResponse r;
    r.sigma_digest = d;
    r.ct.body = Bytes(4, tag);
    const auto one_time = prim::keygen(prim::SchemeId::Sig, to_bytes("one-time " + std::to_string(tag)));
    return state.submit_tx(make_tx(TxKind::Response, encode(r), one_time.secret, state.epoch()));
  }

  scheme::Gid register_gid(std::uint64_t epoch) {
    scheme::Gid g;
    g.value[0] = static_cast<std::uint8_t>(epoch);
    g.value[1] = static_cast<std::uint8_t>(epoch >> 8);
    state.submit_tx(make_tx(TxKind::RegisterGid, encode(g), admin.secret, state.epoch()));
    return g;
  }

  // A Tx^Comb whose sigma carries a real index; the other fields stay empty.
  Receipt comb_tx(const kase::Index& ix, std::uint32_t tag) {
    CombPayload p;
    p.m = to_bytes("m" + std::to_string(tag));
    p.sigma.body.c1 = ix.c1;
    p.sigma.body.c2 = ix.c2;
    p.sigma.body.entries = ix.entries;
    return state.submit_tx(make_tx(TxKind::Comb, encode(p), combiner.secret, state.epoch()));
  }
};

dtpke::Pid make_pid(std::uint32_t i) {
  dtpke::Pid p;
  p.token[0] = 0x70;
  p.token[31] = static_cast<std::uint8_t>(i);
  p.epoch = 1;
  return p;
}

}  // namespace

TEST_CASE("admission checks signature and consortium role") {
  Net net(1);
  auto& st = net.state;
  const auto r0 = net.sign_tx(0, 1);
  CHECK(r0 == Receipt{0, 0});
  CHECK(st.ssl_size() == 1);

  scheme::EncryptedShare s;
  const auto payload = encode(SignPayload{0, s});
  CHECK(code_of([&] { st.submit_tx(make_tx(TxKind::Sign, payload, net.outsider.secret, 0)); }) ==
        Errc::Unauthorized);
  CHECK(code_of([&] { st.submit_tx(make_tx(TxKind::Sign, payload, net.combiner.secret, 0)); }) ==
        Errc::Unauthorized);
  auto forged = make_tx(TxKind::Sign, payload, net.signer.secret, 0);
  forged.payload.back() ^= 1;
  CHECK(code_of([&] { st.submit_tx(forged); }) == Errc::BadSignature);
  auto wrong_kind = make_tx(TxKind::Sign, payload, net.signer.secret, 0);
  wrong_kind.kind = TxKind::Comb;
  CHECK(code_of([&] { st.submit_tx(wrong_kind); }) == Errc::BadSignature);
  CHECK(code_of([&] {
          st.submit_tx(make_tx(TxKind::Sign, to_bytes("junk"), net.signer.secret, 0));
        }) == Errc::DecodeError);
  CHECK(st.ssl_size() == 1);

  // Signed for epoch 0, submitted in epoch 1.
  const auto stale = make_tx(TxKind::Sign, payload, net.signer.secret, 0);
  st.tick();
  CHECK(code_of([&] { st.submit_tx(stale); }) == Errc::BadSignature);

  // Trapdoors and responses come from one-time keys.
  kase::Trapdoor td{G1::generator(), {1, 2}};
  const auto fresh = prim::keygen(prim::SchemeId::Sig, to_bytes("fresh"));
  CHECK(st.submit_tx(make_tx(TxKind::Trapdoor, encode(td), fresh.secret, 1)).position == 2);
  CHECK(st.trapdoors().size() == 1);
}

TEST_CASE("replayed transactions are appended again") {
  Net net(2);
  scheme::EncryptedShare s;
  const auto tx = make_tx(TxKind::Sign, encode(SignPayload{3, s}), net.signer.secret, 0);
  const auto a = net.state.submit_tx(tx);
  const auto b = net.state.submit_tx(tx);
  CHECK(a.position != b.position);
  CHECK(net.state.ssl_pull(0, 3).size() == 2);
}

TEST_CASE("pool reads and isolation") {
  Net net(3);
  auto& st = net.state;
  CHECK(st.ssl_pull(0, 0).empty());
  CHECK(st.dsl_pull(Digest{}).empty());
  Digest d1{}, d2{};
  d1[0] = 1;
  d2[0] = 2;
  for (std::uint8_t i = 0; i < 5; ++i) {
    net.sign_tx(0, i);
    net.response_tx(i % 2 ? d1 : d2, i);
  }
  net.sign_tx(1, 9);
  CHECK(st.ssl_pull(0, 0).size() == 5);
  CHECK(st.ssl_pull(0, 1).size() == 1);
  st.tick();
  net.sign_tx(0, 10);
  CHECK(st.ssl_pull(1, 0).size() == 6);
  CHECK(st.ssl_pull(1, 0, 1).size() == 1);
  CHECK(st.ssl_pull(0, 0).size() == 5);

  const auto r1 = st.dsl_pull(d1);
  const auto r2 = st.dsl_pull(d2);
  CHECK(r1.size() == 2);
  CHECK(r2.size() == 3);
  for (const auto& r : r1) CHECK(r.sigma_digest == d1);
  for (const auto& r : r2) CHECK(r.sigma_digest == d2);
  CHECK(st.dsl_size() == 5);
  CHECK(st.ssl_size() == 7);
  // Sign payloads never show up as responses and vice versa.
  for (const auto& s : st.ssl_pull(1, 0)) CHECK(s.ct.body.size() == 8);
  for (const auto& r : r1) CHECK(r.ct.body.size() == 4);
}

TEST_CASE("gid registry assigns slots round robin") {
  Net net(4, 3);
  std::vector<scheme::Gid> gids;
  for (std::uint64_t e = 0; e < 7; ++e) gids.push_back(net.register_gid(e));
  net.register_gid(2);  // already known
  const auto& reg = net.state.gid_registry();
  REQUIRE(reg.size() == 7);
  for (std::size_t i = 0; i < reg.size(); ++i) {
    CHECK(reg[i].gid == gids[i]);
    CHECK(reg[i].slot == 1 + i % 3);
  }
  scheme::Gid g;
  CHECK(code_of([&] {
          net.state.submit_tx(make_tx(TxKind::RegisterGid, encode(g), net.signer.secret, 0));
        }) == Errc::Unauthorized);
}

TEST_CASE("search contract equals the membership oracle over 100 indexes") {
  Net net(5, 4);
  for (std::uint64_t e = 0; e < 4; ++e) net.register_gid(e);
  auto rng = Rng::from_seed(6);
  constexpr std::uint32_t kPids = 16;
  std::vector<std::set<std::uint32_t>> members(100);
  std::vector<std::uint32_t> slot_of(100);
  for (std::uint32_t i = 0; i < 100; ++i) {
    slot_of[i] = 1 + static_cast<std::uint32_t>(rng.below(4));
    const auto size = rng.below(11);
    std::vector<dtpke::Pid> n;
    while (members[i].size() < size) members[i].insert(static_cast<std::uint32_t>(rng.below(kPids)));
    for (auto p : members[i]) n.push_back(make_pid(p));
    net.comb_tx(kase::encrypt(net.params, net.keys.mpk, slot_of[i], n, 10, rng), i);
  }
  REQUIRE(net.state.indexes().size() == 100);

  const std::vector<kase::Scope> scopes{{1, 2, 3, 4}, {2, 4}};
  std::size_t mismatches = 0, hits_total = 0;
  for (const auto& scope : scopes) {
    const auto ka = kase::extract(net.params, net.keys.msk, scope);
    for (std::uint32_t p = 0; p < kPids; ++p) {
      const auto hits = net.state.search_contract(kase::trapdoor(ka, make_pid(p)));
      std::set<std::uint64_t> got;
      for (const auto& h : hits) {
        got.insert(h.position);
        hits_total += 1;
        const auto i = std::find_if(net.state.index_rows().begin(), net.state.index_rows().end(),
                                    [&](const IndexRow& r) { return r.position == h.position; }) -
                       net.state.index_rows().begin();
        if (h.slot != slot_of[i]) ++mismatches;
      }
      std::set<std::uint64_t> want;
      for (std::uint32_t i = 0; i < 100; ++i)
        if (members[i].count(p) && std::binary_search(scope.begin(), scope.end(), slot_of[i]))
          want.insert(net.state.index_rows()[i].position);
      if (got != want) ++mismatches;
    }
  }
  CHECK(mismatches == 0);
  CHECK(hits_total > 0);

  const auto ka = kase::extract(net.params, net.keys.msk, {1, 2, 3, 4});
  const auto td = kase::trapdoor(ka, make_pid(3));
  CHECK(net.state.search_contract(td, Exec::Serial) == net.state.search_contract(td, Exec::Parallel));
  CHECK(net.state.search_contract(kase::trapdoor(ka, make_pid(99))).empty());
}

TEST_CASE("worker election is deterministic and uniform") {
  Net net(7);
  const auto& st = net.state;
  CHECK(st.elect_worker(WorkerRole::Combiner, 17) == st.elect_worker(WorkerRole::Combiner, 17));
  std::array<int, 5> wins{};
  for (std::uint64_t e = 0; e < 1000; ++e) ++wins[st.elect_worker(WorkerRole::Combiner, e)];
  double chi = 0;
  for (auto w : wins) {
    CHECK(w >= 140);
    CHECK(w <= 260);
    chi += (w - 200.0) * (w - 200.0) / 200.0;
  }
  CHECK(chi < 13.28);  // 4 degrees of freedom, p = 0.01
  // Every round of five epochs visits each combiner once, in a varying order.
  std::set<std::vector<std::uint32_t>> orders;
  for (std::uint64_t round = 0; round < 20; ++round) {
    std::vector<std::uint32_t> order;
    for (std::uint64_t e = round * 5; e < round * 5 + 5; ++e)
      order.push_back(st.elect_worker(WorkerRole::Combiner, e));
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::uint32_t>{0, 1, 2, 3, 4});
    orders.insert(order);
  }
  CHECK(orders.size() > 1);

  Net empty(8, 4, 0);
  CHECK(code_of([&] { empty.state.elect_worker(WorkerRole::Tracer, 0); }) == Errc::EmptyPool);
}

TEST_CASE("log replay rebuilds identical state") {
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    sim::ScenarioConfig cfg;
    cfg.n = 5;
    cfg.t = 3;
    cfg.n3 = 5;
    cfg.t_prime = 2;
    cfg.n1 = 2;
    cfg.n2 = 2;
    cfg.num_signatures = 4;
    cfg.epochs = 2;
    cfg.message_kb = 0;
    cfg.seed = seed;
    const auto rep = sim::run_scenario(cfg);
    REQUIRE(rep.passed());
    const auto replayed = ChainState::load_log(rep.chain_log);
    CHECK(sha256(replayed.state_bytes()) == rep.chain_digest);
    CHECK(replayed.dump_log() == rep.chain_log);
    CHECK(replayed.signatures().size() == 4);

    auto bad = rep.chain_log;
    bad[bad.size() - 10] ^= 1;
    CHECK_THROWS_AS(ChainState::load_log(bad), Error);
  }
}

TEST_CASE("transaction golden encoding") {
  const auto key = prim::keygen(prim::SchemeId::Sig, to_bytes("golden tx"));
  const auto tx = make_tx(TxKind::TraceCall, encode(TraceCallPayload{Digest{}, G1::generator()}),
                          key.secret, 3);
  golden::check("chain.txt", "trace_call_tx", encode(tx));
  CHECK(decode_all<Transaction>(encode(tx)) == tx);
}
