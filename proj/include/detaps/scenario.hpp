#pragma once

// Full-lifecycle runs on the chain simulator and the benchmark grid built
// on top of them.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "detaps/chain.hpp"
#include "detaps/enclave.hpp"

namespace detaps::sim {

struct ScenarioConfig {
  std::uint32_t n = 10;
  std::uint32_t n1 = 5;
  std::uint32_t n2 = 5;
  std::uint32_t n3 = 10;
  std::uint32_t t = 5;
  std::uint32_t t_prime = 3;
  std::uint32_t message_kb = 1;
  std::uint32_t num_signatures = 10;  // n4
  std::uint64_t seed = 1;
  std::uint32_t epochs = 1;  // signing epochs; signatures are spread over them
  std::uint32_t kase_capacity = 4;
  std::vector<std::string> phases{"setup", "sign", "combine", "verify", "trace"};

  // Throws ConfigError naming the offending key.
  void validate() const;
  bool has_phase(std::string_view phase) const;
  // Outside the experimental parameter ranges used for the published runs.
  bool out_of_table_range() const;

  // key=value lines; '#' starts a comment. Unknown keys throw ConfigError.
  void set(std::string_view key, std::string_view value);
  static ScenarioConfig parse(std::string_view text);
  std::vector<std::pair<std::string, std::string>> records() const;
};

struct PhaseTimes {
  double setup_ms = 0, sign_ms = 0, combine_ms = 0, verify_ms = 0, trace_ms = 0;
};

struct RunReport {
  ScenarioConfig config;
  PhaseTimes times;
  // Serialized sizes, taken from the actual transactions and enclave outputs.
  std::map<std::string, std::uint64_t> bytes;
  std::uint64_t signatures_emitted = 0;
  std::uint64_t verified = 0;
  std::uint64_t traced = 0;
  std::uint64_t responses = 0;
  Digest chain_digest{};
  Bytes chain_log;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
  // key<TAB>value lines. Timing keys end in _ms.
  std::string tsv(bool with_times = true) const;
  std::string table() const;
};

RunReport run_scenario(const ScenarioConfig& config, Exec exec = Exec::Parallel);

// Each cell is one config; `repeat` runs per cell, mean wall times reported.
struct BenchRow {
  ScenarioConfig config;
  PhaseTimes mean;
  std::uint64_t tx_sign_bytes = 0;
  std::uint64_t sigma_bytes = 0;
  bool passed = true;
};

std::vector<BenchRow> bench(const std::vector<ScenarioConfig>& grid, std::uint32_t repeat,
                            Exec exec = Exec::Parallel);
std::string bench_table(const std::vector<BenchRow>& rows);

// Expands "key=v1,v2,..." axes over a base config (cartesian product).
std::vector<ScenarioConfig> expand_grid(const ScenarioConfig& base,
                                        const std::vector<std::string>& axes);

// Least-squares fit y = a + b x; returns R^2.
double linear_r2(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace detaps::sim
