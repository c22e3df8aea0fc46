// detaps: scenario runner, benchmark grid and chain log inspection.
//
//   detaps run   [--config FILE] [--KEY VALUE ...] [--out FILE] [--log FILE] [--serial]
//   detaps bench [--config FILE] --grid t=5,10,15 [--grid ...] [--repeat N] [--out FILE]
//   detaps log dump FILE
//   detaps log replay FILE

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "detaps/chain.hpp"
#include "detaps/errors.hpp"
#include "detaps/hash.hpp"
#include "detaps/scenario.hpp"

using namespace detaps;
using namespace detaps::sim;

namespace {

const char* const kKeys[] = {"n",          "n1",     "n2",     "n3",    "t",
                             "t_prime",    "n4",     "seed",   "epochs", "kase_capacity",
                             "message_kb", "phases", "num_signatures"};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::ConfigError, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::ConfigError, "cannot write " + path);
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

struct ConfigArgs {
  std::string file;
  std::map<std::string, std::string> overrides;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", file, "key=value config file");
    for (const char* k : kKeys)
      cmd->add_option_function<std::string>(
          std::string("--") + k, [this, k](const std::string& v) { overrides[k] = v; },
          "override config key");
  }

  ScenarioConfig load() const {
    auto c = file.empty() ? ScenarioConfig{} : ScenarioConfig::parse(slurp(file));
    for (const auto& [k, v] : overrides) c.set(k, v);
    c.validate();
    return c;
  }
};

const char* kind_name(std::uint8_t k) {
  static const char* const names[] = {"?",        "sign",       "comb",        "trapdoor",
                                      "response", "trace_call", "register_gid"};
  return k < std::size(names) ? names[k] : "?";
}

int log_dump(const std::string& path) {
  const auto raw = slurp(path);
  const Bytes log(raw.begin(), raw.end());
  Reader r(log);
  const auto genesis = decode_all<chain::Genesis>(r.var());
  std::printf("genesis members=%zu combiners=%u tracers=%u kase_capacity=%u\n",
              genesis.members.size(), genesis.combiners, genesis.tracers,
              genesis.kase.capacity);
  for (std::uint64_t pos = 0; r.remaining() > 0; ++pos) {
    const auto body = r.var();
    Reader rec(body);
    const auto tag = rec.u8();
    const auto epoch = rec.u64();
    if (tag == 1) {
      std::printf("%6llu epoch=%llu tick\n", static_cast<unsigned long long>(pos),
                  static_cast<unsigned long long>(epoch));
      continue;
    }
    const auto tx = rec.get<chain::Transaction>();
    const auto submitter = to_hex(encode(tx.submitter)).substr(0, 16);
    std::printf("%6llu epoch=%llu %-12s payload=%zu submitter=%s\n",
                static_cast<unsigned long long>(pos), static_cast<unsigned long long>(epoch),
                kind_name(static_cast<std::uint8_t>(tx.kind)), tx.payload.size(),
                submitter.c_str());
  }
  return 0;
}

int log_replay(const std::string& path) {
  const auto raw = slurp(path);
  const auto st = chain::ChainState::load_log(Bytes(raw.begin(), raw.end()));
  std::printf("epoch\t%llu\nsignatures\t%zu\nresponses\t%zu\nstate_digest\t%s\n",
              static_cast<unsigned long long>(st.epoch()), st.signatures().size(),
              st.dsl_size(), to_hex(sha256(st.state_bytes())).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"detaps scenario runner"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run one full lifecycle and report");
  ConfigArgs run_cfg;
  run_cfg.attach(run);
  std::string run_out, run_log;
  bool serial = false;
  run->add_option("--out", run_out, "write key/value records here");
  run->add_option("--log", run_log, "write the chain log here");
  run->add_flag("--serial", serial, "use the serial reference kernels");

  auto* bench_cmd = app.add_subcommand("bench", "run a parameter grid");
  ConfigArgs bench_cfg;
  bench_cfg.attach(bench_cmd);
  std::vector<std::string> axes;
  std::uint32_t repeat = 10;
  std::string bench_out;
  bench_cmd->add_option("--grid", axes, "axis, e.g. t=5,10,15 (repeatable)");
  bench_cmd->add_option("--repeat", repeat, "runs per cell")->check(CLI::Range(1u, 10000u));
  bench_cmd->add_option("--out", bench_out, "write key/value records here");
  bench_cmd->add_flag("--serial", serial, "use the serial reference kernels");

  auto* log = app.add_subcommand("log", "inspect a chain log");
  log->require_subcommand(1);
  std::string log_file;
  auto* dump = log->add_subcommand("dump", "print every record");
  dump->add_option("file", log_file)->required();
  auto* replay = log->add_subcommand("replay", "replay from genesis and print the state digest");
  replay->add_option("file", log_file)->required();

  CLI11_PARSE(app, argc, argv);
  const auto exec = serial ? Exec::Serial : Exec::Parallel;

  try {
    if (*run) {
      const auto cfg = run_cfg.load();
      if (cfg.out_of_table_range())
        std::cerr << "note: parameters fall outside the reference experiment ranges\n";
      const auto rep = run_scenario(cfg, exec);
      std::cout << rep.table();
      if (run_out.empty())
        std::cout << '\n' << rep.tsv();
      else
        spit(run_out, rep.tsv());
      if (!run_log.empty())
        spit(run_log, std::string_view(reinterpret_cast<const char*>(rep.chain_log.data()),
                                       rep.chain_log.size()));
      return rep.passed() ? 0 : 1;
    }
    if (*bench_cmd) {
      const auto rows = bench(expand_grid(bench_cfg.load(), axes), repeat, exec);
      std::cout << bench_table(rows);
      bool ok = true;
      std::ostringstream tsv;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        ok = ok && r.passed;
        const auto pre = "row." + std::to_string(i) + ".";
        for (const auto& [k, v] : r.config.records()) tsv << pre << "config." << k << '\t' << v << '\n';
        tsv << pre << "tx_sign_bytes\t" << r.tx_sign_bytes << '\n'
            << pre << "sigma_bytes\t" << r.sigma_bytes << '\n'
            << pre << "passed\t" << (r.passed ? 1 : 0) << '\n'
            << pre << "time.setup_ms\t" << r.mean.setup_ms << '\n'
            << pre << "time.sign_ms\t" << r.mean.sign_ms << '\n'
            << pre << "time.combine_ms\t" << r.mean.combine_ms << '\n'
            << pre << "time.verify_ms\t" << r.mean.verify_ms << '\n'
            << pre << "time.trace_ms\t" << r.mean.trace_ms << '\n';
      }
      if (!bench_out.empty()) spit(bench_out, tsv.str());
      return ok ? 0 : 1;
    }
    if (*dump) return log_dump(log_file);
    if (*replay) return log_replay(log_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
