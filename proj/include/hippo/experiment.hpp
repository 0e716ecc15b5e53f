#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hippo/core.hpp"
#include "hippo/error.hpp"
#include "hippo/martingale.hpp"

namespace hippo {

using json = nlohmann::json;

/// Bad or missing config field; the CLI maps it to exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Outcome of one lemma sweep, serialised as
/// {lemma, cases_run, failures: [...], extremal_ratio, ...}.
struct LemmaReport {
  std::string lemma;
  std::uint64_t cases_run = 0;
  std::uint64_t precondition_skips = 0;
  json failures = json::array();
  Rational extremal_ratio{0};  // largest lhs/rhs seen; < 1 (or <= 1) means every case passed
  json extra = json::object();

  bool passed() const { return failures.empty(); }
  json to_json() const;
};

// Each sweep reads its parameters from `cfg`, falling back to the defaults
// documented beside it, and never throws for a failing case; failures are
// collected in the report.

/// continuity: {epsilon "1/8", samples 200, sigma_max_len 6, seed 7, include_violation true}
LemmaReport verify_continuity_sweep(const json& cfg);
/// kolmogorov: {rho "010", m 3, k_max 7, families_per_level 100, seed 11, extremal_k_max 6}
LemmaReport verify_kolmogorov_sampling(const json& cfg);
/// product: {s ["1/2","1","2"], N 64}
LemmaReport verify_product_bounds(const json& cfg);
/// test-level: {rho "010", j_max 4, k_max 6, node_budget 4194304}
LemmaReport verify_test_level_bounds(const json& cfg);
/// find-m: {seed 3 | alpha "0111...", epsilon "1/8", horizon 64}; informational, never fails.
LemmaReport run_find_m(const json& cfg);

/// Dispatch for `verify-lemma --which`: continuity | kolmogorov | product | test-level | find-m.
LemmaReport verify_lemma(const std::string& which, const json& cfg);

struct ExperimentResult {
  json report;
  bool passed = false;
};

/// Canonical serialisation (sorted keys) and its SHA-256, hex encoded.
std::string canonical_dump(const json& j);
std::string sha256_hex(const std::string& bytes);

/// separation-cr: {seeds [..] | seed_count N (seeds 1..N), length 4096, precision 16,
///   classical_steps 1000, capital_threshold "1000", pass_fraction "95/100",
///   battery [{name, params}] (default battery when absent), classical_trace_csv path}
ExperimentResult run_separation_cr(const json& cfg);
/// lemma-suite: {continuity {...}, kolmogorov {...}, product {...}, test_level {...}, find_m {...}}
ExperimentResult run_lemma_suite(const json& cfg);
/// separation-kl: {seed 5, length 1024, p "1/4", c "1/4", tau "1/32",
///   strategy {p "1/4", tau "1/8", bias "11/32", steps 10000, band ["23/5000","1/20"]}, kl_trace_csv path}
ExperimentResult run_separation_kl(const json& cfg);

/// Runs `cfg["experiment"]`, embedding config and hash in the report.
ExperimentResult run_experiment(const json& cfg);

/// Reads a JSON config file; ConfigError on IO or parse failure.
json load_config(const std::filesystem::path& path);

/// Parses the "num/den" strings used in configs; ConfigError when malformed.
Rational config_rational(const json& cfg, const char* key, const std::string& fallback);

std::vector<StakeFunction> battery_from_config(const json& cfg);

}  // namespace hippo
