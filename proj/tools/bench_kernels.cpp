// Serial vs parallel timings for the data-parallel kernels. Each kernel is
// also checked for identical output under both policies.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detaps/enclave.hpp"
#include "detaps/rng.hpp"

using namespace detaps;
using namespace detaps::scheme;

namespace {

double median_ms(std::uint32_t repeat, const std::function<void()>& fn) {
  std::vector<double> ms;
  for (std::uint32_t i = 0; i < repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    ms.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                     .count());
  }
  std::sort(ms.begin(), ms.end());
  return ms[ms.size() / 2];
}

struct Row {
  std::string kernel;
  std::size_t items;
  double serial_ms, parallel_ms;
  bool same;
};

template <class F>
Row measure(std::string name, std::size_t items, std::uint32_t repeat, F&& kernel) {
  const auto a = kernel(Exec::Serial);
  const auto b = kernel(Exec::Parallel);
  Row r{std::move(name), items, 0, 0, a == b};
  r.serial_ms = median_ms(repeat, [&] { kernel(Exec::Serial); });
  r.parallel_ms = median_ms(repeat, [&] { kernel(Exec::Parallel); });
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kernel benchmark: serial reference vs parallel"};
  std::uint32_t items = 64, repeat = 5, n3 = 10;
  app.add_option("--items", items, "batch size per kernel")->check(CLI::Range(1u, 100000u));
  app.add_option("--repeat", repeat, "timed runs per policy (median reported)")
      ->check(CLI::Range(1u, 1000u));
  app.add_option("--n3", n3, "notaries")->check(CLI::Range(1u, 64u));
  CLI11_PARSE(app, argc, argv);

  SystemParams p;
  p.n = 10;
  p.t = 5;
  p.n1 = 1;
  p.n2 = 1;
  p.n3 = n3;
  const auto sys = setup(p, 7);
  auto rng = Rng::from_seed(99);
  const auto gid = derive_gid(sys.pk, "default", 1);
  const auto quorum = ats::make_quorum({1, 2, 3, 4, 5});
  std::vector<Pid> members;
  for (std::uint32_t i = 0; i < std::min<std::uint32_t>(3, n3); ++i)
    members.push_back(sys.notaries[i].keys.pid);

  std::vector<SignRequest> requests;
  for (std::uint32_t i = 0; i < items; ++i) {
    auto m = rng.bytes(1024);
    requests.push_back({m, quorum, members, gid});
  }
  const auto enc = prim::keygen(prim::SchemeId::Pke, rng);
  const auto batch_rng = rng.fork("batch");

  std::vector<Row> rows;
  rows.push_back(measure("sign_batch", items, repeat, [&](Exec e) {
    Writer w;
    w.seq(sign_batch(sys.pk, sys.signers[0], requests, enc.pub, batch_rng, e));
    return std::move(w).bytes();
  }));

  const auto batch = sign_batch(sys.pk, sys.signers[0], requests, enc.pub, batch_rng);
  rows.push_back(measure("open_shares", items, repeat, [&](Exec e) {
    Writer w;
    for (const auto& s : open_shares(enc.secret, batch, p.n, p.n3, e))
      w.var(s ? encode_share_payload(*s, p.n, p.n3) : Bytes{});
    return std::move(w).bytes();
  }));

  const auto ats_keys = ats::keygen(items, items, rng);
  std::vector<std::uint32_t> all(items);
  for (std::uint32_t i = 0; i < items; ++i) all[i] = i + 1;
  const auto big_quorum = ats::make_quorum(all);
  std::vector<ats::Share> shares;
  const Bytes m0 = requests[0].m;
  for (std::uint32_t i = 0; i < items; ++i)
    shares.push_back(ats::sign(ats_keys.signers[i], m0, big_quorum));
  rows.push_back(measure("ats_verify_shares", items, repeat, [&](Exec e) {
    return ats::verify_shares(ats_keys.pk, m0, shares, e);
  }));

  std::vector<kase::Index> indexes;
  for (std::uint32_t i = 0; i < items; ++i) {
    const auto& who = sys.notaries[i % n3].keys.pid;
    indexes.push_back(kase::encrypt(sys.pk.kase, sys.pk.mpk, 1, {who}, n3, rng));
  }
  const auto td = kase::adjust(sys.pk.kase, 1, notary_trapdoor(sys.notaries[0]));
  rows.push_back(measure("kase_search", items, repeat,
                         [&](Exec e) { return kase::search(td, indexes, e); }));

  bool ok = true;
  std::printf("%-18s %7s %12s %12s %8s %s\n", "kernel", "items", "serial_ms", "parallel_ms",
              "speedup", "same");
  for (const auto& r : rows) {
    ok = ok && r.same;
    std::printf("%-18s %7zu %12.3f %12.3f %8.2f %s\n", r.kernel.c_str(), r.items, r.serial_ms,
                r.parallel_ms, r.serial_ms / r.parallel_ms, r.same ? "yes" : "NO");
  }
  return ok ? 0 : 1;
}
