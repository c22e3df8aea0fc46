// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "detaps/chain.hpp"
#include "detaps/enclave.hpp"
#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/rng.hpp"
#include "detaps/scenario.hpp"

using namespace detaps;
using namespace detaps::scheme;

namespace {

using Clock = std::chrono::steady_clock;

std::optional<Errc> code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

bool contains(const Bytes& hay, const Bytes& needle) {
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

Bytes u32_bytes(std::uint32_t v) {
  Writer w;
  w.u32(v);
  return std::move(w).bytes();
}

SystemParams small(std::uint32_t n, std::uint32_t t, std::uint32_t n3) {
  SystemParams p;
  p.n = n;
  p.t = t;
  p.n1 = 2;
  p.n2 = 2;
  p.n3 = n3;
  return p;
}

const Scalar& target_sk() {
  static const Scalar sk = prim::keygen(prim::SchemeId::Pke, to_bytes("acceptance target")).secret;
  return sk;
}

struct World {
  SystemKeys sys;
  Gid gid;
  GidRegistry registry;

  World(const SystemParams& p, std::uint64_t seed) : sys(setup(p, seed)) {
    gid = derive_gid(sys.pk, "default", 1);
    registry = {{gid, 1}};
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

  std::optional<Signature> signature(ByteView m, const ats::Quorum& q, const std::vector<Pid>& n,
                                     Rng& rng) {
    std::vector<EncryptedShare> batch;
    for (auto i : q)
      batch.push_back(sign(sys.pk, sys.signers[i - 1], m, q, n, gid, sys.pk.combiner_enc[0], rng));
    auto out = combine(sys.combiners[0], sys.combiner_sig_secrets[0], 1, registry, batch);
    if (out.size() != 1) return std::nullopt;
    return out[0].sigma;
  }

  std::vector<NotaryResponse> responses(ByteView m, const Signature& sigma, std::size_t k,
                                        Rng& rng) const {
    std::vector<NotaryResponse> out;
    for (std::size_t i = 0; i < k; ++i)
      out.push_back(notary_respond(sys.pk, sys.notaries[i], m, sigma, sys.pk.tracer_enc[0], rng));
    return out;
  }
};

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s criterion %d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

// Correctness over the parameter grid, all under a minute.
void criterion1() {
  const auto t0 = Clock::now();
  int cells = 0, good = 0;
  for (std::uint32_t n : {5u, 10u})
    for (std::uint32_t t : {2u, 3u, 5u})
      for (std::uint32_t n3 : {5u, 10u})
        for (std::uint32_t tp : {1u, 2u, 3u}) {
          sim::ScenarioConfig c;
          c.n = n;
          c.t = t;
          c.n3 = n3;
          c.t_prime = tp;
          c.n1 = 2;
          c.n2 = 2;
          c.num_signatures = 2;
          c.seed = 1000 + cells;
          ++cells;
          const auto r = sim::run_scenario(c);
          if (r.passed() && r.verified == 2 && r.traced == 2) ++good;
        }
  const double s = std::chrono::duration<double>(Clock::now() - t0).count();
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/%d grid cells verify and trace exactly in %.1f s", good,
                cells, s);
  report(1, good == cells && s < 60.0, buf);
}

// Threshold behaviour of the two threshold layers.
void criterion2() {
  auto rng = Rng::from_seed(2);
  auto auth = dtpke::setup(5, 5, rng);
  std::vector<dtpke::NotaryKeys> keys;
  std::vector<dtpke::NotaryPublic> members;
  for (int i = 0; i < 5; ++i) {
    keys.push_back(dtpke::join(auth.mk, "n" + std::to_string(i)));
    members.push_back(keys.back().public_part());
  }
  const Bytes m = to_bytes("threshold plaintext");
  const auto c = dtpke::encrypt(auth.ek, members, 3, m, rng);
  std::vector<dtpke::DecryptionShare> all;
  for (const auto& k : keys) all.push_back(dtpke::share_decrypt(auth.dk, k.pid, k.usk, c));
  int ok3 = 0, fail2 = 0, other = 0;
  for (unsigned mask = 0; mask < 32; ++mask) {
    const int k = std::popcount(mask);
    if (k != 2 && k != 3) continue;
    std::vector<dtpke::DecryptionShare> subset;
    for (unsigned i = 0; i < 5; ++i)
      if (mask & (1u << i)) subset.push_back(all[i]);
    if (k == 3) {
      if (dtpke::combine(auth.ck, members, 3, c, subset) == m) ++ok3;
      else ++other;
    } else if (code_of([&] { dtpke::combine(auth.ck, members, 3, c, subset); }) ==
               Errc::InsufficientShares) {
      ++fail2;
    } else {
      ++other;
    }
  }

  const auto km = ats::keygen(5, 3, rng);
  const auto q = ats::make_quorum({1, 3, 5});
  std::vector<ats::Share> shares;
  for (auto i : q) shares.push_back(ats::sign(km.signers[i - 1], m, q));
  int ats_fail = 0;
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = a + 1; b < 3; ++b)
      if (code_of([&] { ats::combine(km.pk, m, q, {shares[a], shares[b]}); }) ==
          Errc::InsufficientShares)
        ++ats_fail;
  const bool full = ats::verify_shares(km.pk, m, shares) == std::vector<std::uint8_t>{1, 1, 1};
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "dtpke t'=3 of 5: %d/10 triples decrypt, %d/10 pairs refused; ats t=3: %d/3 "
                "pairs refused",
                ok3, fail2, ats_fail);
  report(2, ok3 == 10 && fail2 == 10 && other == 0 && ats_fail == 3 && full, buf);
}

// Keyword search agrees with set membership.
void criterion3() {
  auto rng = Rng::from_seed(3);
  const std::uint32_t cap = 4, n3 = 3;
  const auto p = kase::setup(cap, rng);
  const auto mk = kase::keygen(rng);
  std::vector<Pid> pids(8);
  for (std::size_t i = 0; i < pids.size(); ++i) {
    rng.fill(pids[i].token);
    pids[i].epoch = 1;
  }
  struct Row {
    kase::Gid gid;
    unsigned members;
    kase::Index ix;
  };
  std::vector<Row> rows;
  for (kase::Gid g = 1; g <= cap; ++g)
    for (unsigned mask = 0; mask < 256; ++mask) {
      if (std::popcount(mask) > static_cast<int>(n3)) continue;
      std::vector<Pid> n;
      for (unsigned i = 0; i < 8; ++i)
        if (mask & (1u << i)) n.push_back(pids[i]);
      rows.push_back({g, mask, kase::encrypt(p, mk.mpk, g, n, n3, rng)});
    }
  std::vector<kase::Index> indexes;
  for (const auto& r : rows) indexes.push_back(r.ix);

  int checked = 0, wrong = 0;
  for (const kase::Scope& scope : {kase::Scope{1, 2, 3, 4}, kase::Scope{2, 4}}) {
    const auto key = kase::extract(p, mk.msk, scope);
    for (unsigned pi = 0; pi < 8; ++pi) {
      const auto td = kase::trapdoor(key, pids[pi]);
      std::vector<int> hits(rows.size(), 0);
      for (auto g : scope) {
        const auto found = kase::search(kase::adjust(p, g, td), indexes);
        for (std::size_t i = 0; i < rows.size(); ++i) hits[i] += found[i] >= 0;
      }
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool oracle = (rows[i].members & (1u << pi)) &&
                            std::find(scope.begin(), scope.end(), rows[i].gid) != scope.end();
        if ((hits[i] == 1) != oracle || hits[i] > 1) ++wrong;
        ++checked;
      }
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d search outcomes over %zu indexes, %d disagree with membership",
                checked, rows.size(), wrong);
  report(3, wrong == 0 && rows.size() == 4 * 93, buf);
}

// Sizes and enclave boundary do not reveal t or t'.
void criterion4() {
  std::set<std::uint64_t> tx_sign, sigma;
  bool runs_ok = true;
  for (std::uint32_t t : {2u, 3u, 5u})
    for (std::uint32_t tp : {1u, 2u, 3u}) {
      sim::ScenarioConfig c;
      c.n = 10;
      c.n3 = 10;
      c.t = t;
      c.t_prime = tp;
      c.n1 = 2;
      c.n2 = 2;
      c.num_signatures = 2;
      c.phases = {"setup", "sign", "combine", "verify"};
      const auto r = sim::run_scenario(c);
      runs_ok = runs_ok && r.passed();
      tx_sign.insert(r.bytes.at("tx_sign"));
      sigma.insert(r.bytes.at("sigma"));
    }

  std::map<std::pair<std::uint32_t, std::uint32_t>, Bytes> transcripts;
  bool hygiene = true;
  const G1 target = G1::generator() * target_sk();
  for (std::uint32_t t : {2u, 3u, 5u}) {
    World w(small(10, t, 10), 40 + t);
    const auto q = w.first_quorum();
    for (std::uint32_t tp : {1u, 2u, 3u}) {
      Bytes transcript;
      auto record = [&](std::string_view, ByteView out) {
        transcript.insert(transcript.end(), out.begin(), out.end());
      };
      w.sys.combiners[0].set_recorder(record);
      w.sys.tracers[0].set_recorder(record);
      auto rng = Rng::from_seed(200 * t + tp);
      const auto m = to_bytes("boundary");
      const auto n = w.first_pids(tp);
      const auto sigma_m = w.signature(m, q, n, rng);
      if (!sigma_m) {
        hygiene = false;
        continue;
      }
      const auto sealed = trace(w.sys.tracers[0], m, *sigma_m, w.responses(m, *sigma_m, tp, rng),
                                target);
      w.sys.combiners[0].set_recorder({});
      w.sys.tracers[0].set_recorder({});
      hygiene = hygiene && open_trace_result(target_sk(), sealed) == q;
      hygiene = hygiene && !contains(transcript, ats::canonical_quorum(q));
      for (const auto& pid : n) hygiene = hygiene && !contains(transcript, encode(pid));
      transcripts[{t, tp}] = std::move(transcript);
    }
  }
  std::set<std::size_t> lengths;
  for (const auto& [_, tr] : transcripts) lengths.insert(tr.size());
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
  const bool no_track = lengths.size() == 1 && tracking([](auto k) { return k.first; }) == 0 &&
                        tracking([](auto k) { return k.second; }) == 0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "Tx^Sign %llu B and sigma %llu B constant over 9 (t, t') cells; enclave "
                "transcripts %s",
                static_cast<unsigned long long>(*tx_sign.begin()),
                static_cast<unsigned long long>(*sigma.begin()),
                hygiene && no_track ? "clean" : "leak");
  report(4, runs_ok && tx_sign.size() == 1 && sigma.size() == 1 && hygiene && no_track, buf);
}

// Unforgeability under bit flips and eta tampering.
void criterion5() {
  World w(small(5, 3, 5), 17);
  auto rng = Rng::from_seed(5);
  const auto m = to_bytes("mutation target");
  const auto sigma = *w.signature(m, ats::make_quorum({1, 4, 5}), w.first_pids(2), rng);
  const auto sbytes = encode(sigma);
  int rejected = 0;
  for (int trial = 0; trial < 256; ++trial) {
    auto mm = m;
    auto sb = sbytes;
    const auto bit = rng.below((mm.size() + sb.size()) * 8);
    auto& target = bit < mm.size() * 8 ? mm : sb;
    const auto off = bit < mm.size() * 8 ? bit : bit - mm.size() * 8;
    target[off / 8] ^= static_cast<std::uint8_t>(1u << (off % 8));
    try {
      if (!verify(w.sys.pk, mm, decode_all<Signature>(sb))) ++rejected;
    } catch (const Error&) {
      ++rejected;
    }
  }

  int tampers = 0, aborts = 0;
  const auto eb0 = encode(sigma.eta);
  for (int trial = 0; trial < 64; ++trial) {
    auto eb = eb0;
    const auto bit = rng.below(eb.size() * 8);
    eb[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ++tampers;
    auto bad = sigma;
    try {
      bad.eta = decode_all<prim::SchnorrSig>(eb);
    } catch (const Error&) {
      ++aborts;  // not even decodable
      continue;
    }
    if (code_of([&] {
          notary_respond(w.sys.pk, w.sys.notaries[0], m, bad, w.sys.pk.tracer_enc[0], rng);
        }) == Errc::SigInvalid)
      ++aborts;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/256 mutations rejected; %d/%d eta tampers abort the notary",
                rejected, aborts, tampers);
  report(5, rejected == 256 && aborts == tampers, buf);
}

// Proof determinism and non-transplantability.
void criterion6() {
  const auto m = to_bytes("proof determinism");
  Bytes pi_a, pi_b;
  for (Bytes* out : {&pi_a, &pi_b}) {
    World w(small(5, 3, 5), 60);
    auto rng = Rng::from_seed(61);
    *out = encode(w.signature(m, ats::make_quorum({1, 2, 3}), w.first_pids(2), rng)->body.pi);
  }

  World w(small(5, 3, 5), 62);
  auto rng = Rng::from_seed(63);
  std::vector<nizk::CombineStatement> statements;
  std::vector<nizk::CombineProof> proofs;
  for (int i = 0; i < 20; ++i) {
    const auto mi = to_bytes("transplant " + std::to_string(i));
    const auto s = w.signature(mi, ats::make_quorum({1, 2, 3}), w.first_pids(1 + i % 3), rng);
    statements.push_back(make_statement(w.sys.pk, mi, s->body));
    proofs.push_back(s->body.pi);
  }
  bool own_ok = true;
  for (std::size_t i = 0; i < proofs.size(); ++i)
    own_ok = own_ok && nizk::verify_combine(statements[i], proofs[i]);
  int trials = 0, rejected = 0;
  while (trials < 10000) {
    const auto i = rng.below(proofs.size());
    const auto j = rng.below(proofs.size());
    if (i == j) continue;
    ++trials;
    if (!nizk::verify_combine(statements[j], proofs[i])) ++rejected;
  }
  char buf[128];
  std::snprintf(buf, sizeof buf, "proof bytes %s under equal randomness; %d/%d transplants rejected",
                pi_a == pi_b ? "identical" : "differ", rejected, trials);
  report(6, pi_a == pi_b && own_ok && rejected == trials, buf);
}

// Chain log replay reproduces the state.
void criterion7() {
  int good = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    sim::ScenarioConfig c;
    c.n = 5;
    c.t = 3;
    c.n3 = 5;
    c.t_prime = 2;
    c.num_signatures = 4;
    c.epochs = 2;
    c.seed = seed;
    const auto r = sim::run_scenario(c);
    const auto replayed = chain::ChainState::load_log(r.chain_log);
    if (r.passed() && sha256(replayed.state_bytes()) == r.chain_digest &&
        replayed.dump_log() == r.chain_log)
      ++good;
  }
  report(7, good == 3, std::to_string(good) + "/3 seeds replay to the same state digest");
}

// Scaling shape of combine in n4 and sign in |m|.
void criterion8() {
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  std::vector<double> xs, combine_ms;
  for (std::uint32_t n4 : {10u, 50u, 100u}) {
    std::vector<double> runs;
    for (int rep = 0; rep < 3; ++rep) {
      sim::ScenarioConfig c;
      c.num_signatures = n4;
      c.seed = 80 + rep;
      c.phases = {"setup", "sign", "combine"};
      runs.push_back(sim::run_scenario(c).times.combine_ms);
    }
    xs.push_back(n4);
    combine_ms.push_back(median(runs));
  }
  std::vector<double> kb, sign_ms;
  for (std::uint32_t k : {1u, 5u, 10u}) {
    std::vector<double> runs;
    for (int rep = 0; rep < 15; ++rep) {
      sim::ScenarioConfig c;
      c.message_kb = k;
      c.num_signatures = 10;
      c.seed = 90 + rep;
      c.phases = {"setup", "sign"};
      runs.push_back(sim::run_scenario(c).times.sign_ms);
    }
    kb.push_back(k);
    sign_ms.push_back(median(runs));
  }
  const double r_combine = sim::linear_r2(xs, combine_ms);
  const double r_sign = sim::linear_r2(kb, sign_ms);
  const bool rising =
      combine_ms.back() > combine_ms.front() && sign_ms.back() > sign_ms.front();
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "combine ms %.0f/%.0f/%.0f for n4 10/50/100 (R^2 %.3f); sign ms %.1f/%.1f/%.1f "
                "for 1/5/10 KB (R^2 %.3f)",
                combine_ms[0], combine_ms[1], combine_ms[2], r_combine, sign_ms[0], sign_ms[1],
                sign_ms[2], r_sign);
  report(8, r_combine >= 0.9 && r_sign >= 0.9 && rising, buf);
}

}  // namespace

int main() {
  const std::function<void()> criteria[] = {criterion1, criterion2, criterion3, criterion4,
                                            criterion5, criterion6, criterion7, criterion8};
  int id = 1;
  for (const auto& c : criteria) {
    try {
      c();
    } catch (const std::exception& e) {
      report(id, false, std::string("exception: ") + e.what());
    }
    ++id;
  }
  return failures == 0 ? 0 : 1;
}
