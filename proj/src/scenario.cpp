#include "detaps/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

#include "detaps/errors.hpp"
#include "detaps/rng.hpp"

namespace detaps::sim {

namespace {

const std::vector<std::string> kPhases{"setup", "sign", "combine", "verify", "trace"};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(Errc::ConfigError, std::string(key) + ": not a number: " + std::string(value));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto end = s.find(sep, start);
    const auto part = trim(s.substr(start, end == std::string_view::npos ? s.npos : end - start));
    if (!part.empty()) out.emplace_back(part);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return out;
}

std::string hex(ByteView b) {
  std::ostringstream os;
  for (auto c : b) os << std::hex << std::setw(2) << std::setfill('0') << int(c);
  return os.str();
}

// k distinct values from [lo, lo + range), sorted.
std::vector<std::uint32_t> pick(Rng& rng, std::uint32_t lo, std::uint32_t range, std::uint32_t k) {
  std::vector<std::uint32_t> all(range);
  for (std::uint32_t i = 0; i < range; ++i) all[i] = lo + i;
  for (std::uint32_t i = 0; i < k; ++i) std::swap(all[i], all[i + rng.below(range - i)]);
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

struct Expected {
  ats::Quorum quorum;
  std::vector<std::uint32_t> notaries;
};

}  // namespace

void ScenarioConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(Errc::ConfigError, what); };
  if (t < 1 || t > n) bad("t: need 1 <= t <= n");
  if (n1 < 1 || n2 < 1 || n3 < 1) bad("n1, n2, n3: must be positive");
  if (t_prime < 1) bad("t_prime: must be positive");
  if (t_prime > n3) bad("t_prime: exceeds |N| (at most n3 notaries)");
  if (num_signatures < 1) bad("num_signatures: must be positive");
  if (epochs < 1) bad("epochs: must be positive");
  if (kase_capacity < 1) bad("kase_capacity: must be positive");
  bool seen_gap = false;
  for (const auto& p : kPhases) {
    if (has_phase(p) && seen_gap) bad("phases: " + p + " needs the phases before it");
    if (!has_phase(p) && p != "setup") seen_gap = true;
  }
  for (const auto& p : phases)
    if (std::find(kPhases.begin(), kPhases.end(), p) == kPhases.end()) bad("phases: unknown " + p);
}

bool ScenarioConfig::has_phase(std::string_view phase) const {
  return phase == "setup" || std::find(phases.begin(), phases.end(), phase) != phases.end();
}

bool ScenarioConfig::out_of_table_range() const {
  auto in = [](std::uint32_t v, std::uint32_t lo, std::uint32_t hi) { return v >= lo && v <= hi; };
  auto step = [](std::uint32_t v) { return v == 5 || v == 10 || v == 15; };
  return !(in(n, 10, 50) && in(n3, 10, 50) && n1 == 5 && n2 == 5 && in(num_signatures, 100, 1000) &&
           in(message_kb, 1, 10) && step(t) && step(t_prime));
}

void ScenarioConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "n") n = parse_number<std::uint32_t>(key, value);
  else if (key == "n1") n1 = parse_number<std::uint32_t>(key, value);
  else if (key == "n2") n2 = parse_number<std::uint32_t>(key, value);
  else if (key == "n3") n3 = parse_number<std::uint32_t>(key, value);
  else if (key == "t") t = parse_number<std::uint32_t>(key, value);
  else if (key == "t_prime") t_prime = parse_number<std::uint32_t>(key, value);
  else if (key == "message_kb") message_kb = parse_number<std::uint32_t>(key, value);
  else if (key == "num_signatures" || key == "n4")
    num_signatures = parse_number<std::uint32_t>(key, value);
  else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
  else if (key == "epochs") epochs = parse_number<std::uint32_t>(key, value);
  else if (key == "kase_capacity") kase_capacity = parse_number<std::uint32_t>(key, value);
  else if (key == "phases") phases = split(value, ',');
  else throw Error(Errc::ConfigError, "unknown key: " + std::string(key));
}

ScenarioConfig ScenarioConfig::parse(std::string_view text) {
  ScenarioConfig c;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    std::string_view l = line;
    if (const auto hash = l.find('#'); hash != l.npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == l.npos)
      throw Error(Errc::ConfigError, "line " + std::to_string(line_no) + ": expected key=value");
    c.set(trim(l.substr(0, eq)), l.substr(eq + 1));
  }
  return c;
}

std::vector<std::pair<std::string, std::string>> ScenarioConfig::records() const {
  std::string ph;
  for (const auto& p : phases) ph += (ph.empty() ? "" : ",") + p;
  return {{"n", std::to_string(n)},
          {"n1", std::to_string(n1)},
          {"n2", std::to_string(n2)},
          {"n3", std::to_string(n3)},
          {"t", std::to_string(t)},
          {"t_prime", std::to_string(t_prime)},
          {"message_kb", std::to_string(message_kb)},
          {"num_signatures", std::to_string(num_signatures)},
          {"seed", std::to_string(seed)},
          {"epochs", std::to_string(epochs)},
          {"kase_capacity", std::to_string(kase_capacity)},
          {"phases", ph}};
}

std::string RunReport::tsv(bool with_times) const {
  std::ostringstream os;
  for (const auto& [k, v] : config.records()) os << "config." << k << '\t' << v << '\n';
  os << "config.out_of_table_range\t" << (config.out_of_table_range() ? 1 : 0) << '\n';
  for (const auto& [k, v] : bytes) os << "bytes." << k << '\t' << v << '\n';
  os << "signatures_emitted\t" << signatures_emitted << '\n';
  os << "verified\t" << verified << '\n';
  os << "traced\t" << traced << '\n';
  os << "responses\t" << responses << '\n';
  os << "chain_digest\t" << hex(chain_digest) << '\n';
  for (std::size_t i = 0; i < failures.size(); ++i) os << "failure." << i << '\t' << failures[i] << '\n';
  os << "passed\t" << (passed() ? 1 : 0) << '\n';
  if (with_times) {
    os << std::fixed << std::setprecision(3);
    os << "time.setup_ms\t" << times.setup_ms << '\n';
    os << "time.sign_ms\t" << times.sign_ms << '\n';
    os << "time.combine_ms\t" << times.combine_ms << '\n';
    os << "time.verify_ms\t" << times.verify_ms << '\n';
    os << "time.trace_ms\t" << times.trace_ms << '\n';
  }
  return os.str();
}

std::string RunReport::table() const {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "phase     time_ms\n";
  os << "setup     " << std::setw(10) << times.setup_ms << '\n';
  os << "sign      " << std::setw(10) << times.sign_ms << '\n';
  os << "combine   " << std::setw(10) << times.combine_ms << '\n';
  os << "verify    " << std::setw(10) << times.verify_ms << '\n';
  os << "trace     " << std::setw(10) << times.trace_ms << '\n';
  os << '\n' << std::left << std::setw(28) << "message" << "bytes\n";
  for (const auto& [k, v] : bytes) os << std::setw(28) << k << v << '\n';
  os << '\n' << (passed() ? "all checks passed" : "CHECKS FAILED") << '\n';
  return os.str();
}

RunReport run_scenario(const ScenarioConfig& cfg, Exec exec) {
  cfg.validate();
  RunReport rep;
  rep.config = cfg;
  auto fail = [&rep](std::string what) { rep.failures.push_back(std::move(what)); };
  std::map<std::string, std::set<std::uint64_t>> sizes;
  auto note_size = [&](const std::string& key, std::uint64_t size) { sizes[key].insert(size); };

  auto start = Clock::now();
  scheme::SystemParams params;
  params.n = cfg.n;
  params.n1 = cfg.n1;
  params.n2 = cfg.n2;
  params.n3 = cfg.n3;
  params.t = cfg.t;
  params.kase_capacity = cfg.kase_capacity;
  auto sys = scheme::setup(params, cfg.seed);
  const auto& pk = sys.pk;

  auto rng = Rng::from_seed(cfg.seed).fork("scenario");
  std::vector<prim::KeyPair> signer_tx;
  for (std::uint32_t i = 0; i < cfg.n; ++i)
    signer_tx.push_back(prim::keygen(prim::SchemeId::Sig, rng));
  const auto admin = prim::keygen(prim::SchemeId::Sig, rng);
  const auto auditor = prim::keygen(prim::SchemeId::Sig, rng);
  const auto target = prim::keygen(prim::SchemeId::Pke, rng);

  chain::Genesis genesis;
  genesis.election_seed = rng.bytes(32);
  genesis.combiners = cfg.n1;
  genesis.tracers = cfg.n2;
  genesis.kase = pk.kase;
  for (const auto& k : signer_tx) genesis.members.push_back({k.pub, chain::kSigner});
  for (const auto& p : pk.combiner_sig) genesis.members.push_back({p, chain::kCombiner});
  genesis.members.push_back({admin.pub, chain::kAdmin});
  genesis.members.push_back({auditor.pub, chain::kAuditor});
  chain::ChainState chain(genesis);
  note_size("pk", encode(pk).size());
  rep.times.setup_ms = ms_since(start);

  std::map<Bytes, Expected> expected;
  if (cfg.has_phase("sign")) {
    for (std::uint32_t e = 0; e < cfg.epochs; ++e) {
      const auto epoch = chain.epoch();
      const auto gid = scheme::derive_gid(pk, "default", epoch);
      chain.submit_tx(chain::make_tx(chain::TxKind::RegisterGid, encode(gid), admin.secret, epoch));
      const auto j = chain.elect_worker(chain::WorkerRole::Combiner, epoch);

      // Messages of this epoch and the per-signer request lists.
      start = Clock::now();
      std::vector<std::vector<scheme::SignRequest>> per_signer(cfg.n);
      std::vector<std::vector<std::size_t>> order(cfg.n);
      for (std::uint32_t k = e; k < cfg.num_signatures; k += cfg.epochs) {
        scheme::SignRequest rq;
        rq.m = rng.bytes(std::size_t{cfg.message_kb} * 1024);
        for (int b = 3; b >= 0; --b) rq.m.push_back(static_cast<std::uint8_t>(k >> (8 * b)));
        rq.quorum = ats::make_quorum(pick(rng, 1, cfg.n, cfg.t));
        Expected ex{rq.quorum, pick(rng, 0, cfg.n3, cfg.t_prime)};
        for (auto i : ex.notaries) rq.members.push_back(sys.notaries[i].keys.pid);
        rq.gid = gid;
        for (auto i : rq.quorum) per_signer[i - 1].push_back(rq);
        expected[rq.m] = std::move(ex);
      }
      std::vector<chain::Transaction> txs;
      for (std::uint32_t i = 0; i < cfg.n; ++i) {
        if (per_signer[i].empty()) continue;
        const auto shares =
            scheme::sign_batch(pk, sys.signers[i], per_signer[i], pk.combiner_enc[j],
                               rng.fork("signer-" + std::to_string(i) + "-" + std::to_string(e)),
                               exec);
        for (const auto& s : shares) {
          auto tx = chain::make_tx(chain::TxKind::Sign, encode(chain::SignPayload{j, s}),
                                   signer_tx[i].secret, epoch);
          note_size("tx_sign", encode(tx).size());
          txs.push_back(std::move(tx));
        }
      }
      for (const auto& tx : txs) chain.submit_tx(tx);
      rep.times.sign_ms += ms_since(start);

      if (cfg.has_phase("combine")) {
        start = Clock::now();
        const auto outputs = scheme::combine(sys.combiners[j], sys.combiner_sig_secrets[j], epoch,
                                             chain.gid_registry(),
                                             chain.ssl_pull(epoch, j, epoch), exec);
        for (const auto& o : outputs) {
          note_size("enclave_combine_output", 4 + o.m.size() + encode(o.sigma.body).size());
          note_size("sigma", encode(o.sigma).size());
          auto tx = chain::make_tx(chain::TxKind::Comb, encode(chain::CombPayload{o.m, o.sigma}),
                                   sys.combiner_sig_secrets[j], epoch);
          note_size("tx_comb", encode(tx).size());
          chain.submit_tx(tx);
        }
        rep.signatures_emitted += outputs.size();
        rep.times.combine_ms += ms_since(start);
      }
      chain.tick();
    }
  }
  if (cfg.has_phase("combine") && rep.signatures_emitted != cfg.num_signatures)
    fail("combine: emitted " + std::to_string(rep.signatures_emitted) + " of " +
         std::to_string(cfg.num_signatures));

  if (cfg.has_phase("verify")) {
    start = Clock::now();
    for (const auto& s : chain.signatures())
      if (scheme::verify(pk, s.m, s.sigma)) ++rep.verified;
    rep.times.verify_ms = ms_since(start);
    if (rep.verified != chain.signatures().size()) fail("verify: some signatures rejected");
  }

  if (cfg.has_phase("trace")) {
    start = Clock::now();
    const auto epoch = chain.epoch();
    for (const auto& s : chain.signatures()) {
      const chain::TraceCallPayload call{scheme::signature_digest(s.m, s.sigma), target.pub};
      auto tx = chain::make_tx(chain::TxKind::TraceCall, encode(call), auditor.secret, epoch);
      note_size("tx_trace_call", encode(tx).size());
      chain.submit_tx(tx);
    }
    std::set<Digest> called;
    for (const auto& c : chain.trace_calls()) called.insert(c.sigma_digest);
    const auto tracer = chain.elect_worker(chain::WorkerRole::Tracer, epoch);

    // Notaries: trapdoor under a one-time key, search, respond to called hits.
    std::map<Digest, std::uint64_t> hits_per_sigma;
    for (std::uint32_t i = 0; i < cfg.n3; ++i) {
      const auto& notary = sys.notaries[i];
      const auto td = scheme::notary_trapdoor(notary);
      const auto one_time = prim::keygen(prim::SchemeId::Sig, rng);
      auto tx = chain::make_tx(chain::TxKind::Trapdoor, encode(td), one_time.secret, epoch);
      note_size("tx_trapdoor", encode(tx).size());
      chain.submit_tx(tx);
      for (const auto& hit : chain.search_contract(td, exec)) {
        if (!called.count(hit.sigma_digest)) continue;
        ++hits_per_sigma[hit.sigma_digest];
        const auto sig = chain.find_signature(hit.sigma_digest);
        try {
          const auto resp = scheme::notary_respond(pk, notary, sig->m, sig->sigma,
                                                   pk.tracer_enc[tracer], rng);
          const auto key = prim::keygen(prim::SchemeId::Sig, rng);
          auto rtx = chain::make_tx(chain::TxKind::Response, encode(resp), key.secret, epoch);
          note_size("tx_response", encode(rtx).size());
          chain.submit_tx(rtx);
          ++rep.responses;
        } catch (const Error& e) {
          fail(std::string("notary: ") + e.what());
        }
      }
    }
    for (const auto& [digest, count] : hits_per_sigma) {
      const auto sig = chain.find_signature(digest);
      note_size("search_output_per_hit", encode(sig->sigma.body.sigma_bar).size());
      (void)count;
    }

    sys.tracers[tracer].set_recorder([&](std::string_view, ByteView out) {
      note_size("enclave_trace_output", out.size());
    });
    for (const auto& c : chain.trace_calls()) {
      const auto sig = chain.find_signature(c.sigma_digest);
      if (!sig) {
        fail("trace: called signature not on chain");
        continue;
      }
      try {
        const auto sealed = scheme::trace(sys.tracers[tracer], sig->m, sig->sigma,
                                          chain.dsl_pull(c.sigma_digest), c.target);
        note_size("tracer_relay", encode(sealed).size());
        const auto quorum = scheme::open_trace_result(target.secret, sealed);
        if (quorum == expected.at(sig->m).quorum)
          ++rep.traced;
        else
          fail("trace: wrong quorum");
      } catch (const Error& e) {
        fail(std::string("trace: ") + e.what());
      }
    }
    sys.tracers[tracer].set_recorder({});
    rep.times.trace_ms = ms_since(start);
    if (rep.traced != chain.signatures().size()) fail("trace: not every signature traced");
  }

  for (const auto& [key, set] : sizes) {
    rep.bytes[key] = *set.rbegin();
    if (set.size() != 1) fail("size: " + key + " varies across messages");
  }
  rep.chain_log = chain.dump_log();
  rep.chain_digest = sha256(chain.state_bytes());
  return rep;
}

std::vector<BenchRow> bench(const std::vector<ScenarioConfig>& grid, std::uint32_t repeat,
                            Exec exec) {
  std::vector<BenchRow> rows;
  for (const auto& cfg : grid) {
    BenchRow row;
    row.config = cfg;
    for (std::uint32_t r = 0; r < std::max(repeat, 1u); ++r) {
      const auto rep = run_scenario(cfg, exec);
      row.mean.setup_ms += rep.times.setup_ms;
      row.mean.sign_ms += rep.times.sign_ms;
      row.mean.combine_ms += rep.times.combine_ms;
      row.mean.verify_ms += rep.times.verify_ms;
      row.mean.trace_ms += rep.times.trace_ms;
      row.passed = row.passed && rep.passed();
      if (auto it = rep.bytes.find("tx_sign"); it != rep.bytes.end()) row.tx_sign_bytes = it->second;
      if (auto it = rep.bytes.find("sigma"); it != rep.bytes.end()) row.sigma_bytes = it->second;
    }
    const double k = std::max(repeat, 1u);
    row.mean.setup_ms /= k;
    row.mean.sign_ms /= k;
    row.mean.combine_ms /= k;
    row.mean.verify_ms /= k;
    row.mean.trace_ms /= k;
    rows.push_back(row);
  }
  return rows;
}

std::string bench_table(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "   n   n3    t   t'   kb   n4    setup_ms     sign_ms  combine_ms   verify_ms    trace_ms"
        "  tx_sign  sigma  ok\n";
  for (const auto& r : rows) {
    const auto& c = r.config;
    os << std::setw(4) << c.n << std::setw(5) << c.n3 << std::setw(5) << c.t << std::setw(5)
       << c.t_prime << std::setw(5) << c.message_kb << std::setw(5) << c.num_signatures
       << std::setw(12) << r.mean.setup_ms << std::setw(12) << r.mean.sign_ms << std::setw(12)
       << r.mean.combine_ms << std::setw(12) << r.mean.verify_ms << std::setw(12)
       << r.mean.trace_ms << std::setw(9) << r.tx_sign_bytes << std::setw(7) << r.sigma_bytes
       << std::setw(4) << (r.passed ? "y" : "n") << '\n';
  }
  return os.str();
}

std::vector<ScenarioConfig> expand_grid(const ScenarioConfig& base,
                                        const std::vector<std::string>& axes) {
  std::vector<ScenarioConfig> out{base};
  for (const auto& axis : axes) {
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw Error(Errc::ConfigError, "grid axis needs key=v1,v2: " + axis);
    const auto key = axis.substr(0, eq);
    const auto values = split(std::string_view(axis).substr(eq + 1), ',');
    if (values.empty()) throw Error(Errc::ConfigError, "grid axis has no values: " + axis);
    std::vector<ScenarioConfig> next;
    for (const auto& cfg : out)
      for (const auto& v : values) {
        auto c = cfg;
        c.set(key, v);
        next.push_back(c);
      }
    out = std::move(next);
  }
  return out;
}

double linear_r2(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy * sxy / (sxx * syy);
}

}  // namespace detaps::sim
