#include "hippo/experiment.hpp"

#include <sodium.h>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <random>
#include <set>
#include <sstream>

#include "hippo/construction.hpp"
#include "hippo/kernels.hpp"
#include "hippo/kl.hpp"
#include "hippo/mltest.hpp"

namespace hippo {

namespace {

void check_keys(const json& cfg, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!cfg.is_object()) throw ConfigError(where + ": expected a JSON object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : cfg.items())
    if (!ok.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

std::uint64_t config_uint(const json& cfg, const char* key, std::uint64_t fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& v = cfg.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ConfigError(std::string("'") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string config_string(const json& cfg, const char* key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string()) throw ConfigError(std::string("'") + key + "' must be a string");
  return cfg.at(key).get<std::string>();
}

bool config_bool(const json& cfg, const char* key, bool fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_boolean()) throw ConfigError(std::string("'") + key + "' must be a boolean");
  return cfg.at(key).get<bool>();
}

Rational as_rational(const json& v, const std::string& what) {
  if (v.is_number_integer()) return Rational(v.get<long>());
  if (!v.is_string()) throw ConfigError(what + " must be a \"num/den\" string");
  try {
    return parse_rational(v.get<std::string>());
  } catch (const FormatError& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

BitString random_extension(std::mt19937_64& rng, const BitString& base, std::size_t length) {
  BitString out = base;
  std::bernoulli_distribution coin(0.5);
  while (out.size() < length) out.push_back(coin(rng) ? 1 : 0);
  return out;
}

void write_text(const std::string& path, const std::string& what, auto&& writer) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open " + what + " '" + path + "' for writing");
  writer(out);
  if (!out) throw ConfigError("failed writing " + what + " '" + path + "'");
}

void note_ratio(LemmaReport& rep, const Rational& ratio) {
  if (ratio > rep.extremal_ratio) rep.extremal_ratio = ratio;
}

}  // namespace

Rational config_rational(const json& cfg, const char* key, const std::string& fallback) {
  if (!cfg.contains(key)) return parse_rational(fallback);
  return as_rational(cfg.at(key), std::string("'") + key + "'");
}

std::vector<StakeFunction> battery_from_config(const json& cfg) {
  if (!cfg.contains("battery")) return default_battery();
  const json& list = cfg.at("battery");
  if (!list.is_array() || list.empty()) throw ConfigError("'battery' must be a non-empty array");
  std::vector<StakeFunction> out;
  for (const auto& entry : list) {
    check_keys(entry, {"name", "params"}, "battery entry");
    std::vector<Rational> params;
    if (entry.contains("params")) {
      if (!entry.at("params").is_array()) throw ConfigError("battery 'params' must be an array");
      for (const auto& p : entry.at("params")) params.push_back(as_rational(p, "battery param"));
    }
    try {
      out.push_back(make_stake(config_string(entry, "name", ""), params));
    } catch (const DomainError& e) {
      throw ConfigError(std::string("battery: ") + e.what());
    }
  }
  return out;
}

json LemmaReport::to_json() const {
  json j;
  j["lemma"] = lemma;
  j["cases_run"] = cases_run;
  j["precondition_skips"] = precondition_skips;
  j["failures"] = failures;
  j["extremal_ratio"] = to_string(extremal_ratio);
  j["extremal_ratio_approx"] = extremal_ratio.get_d();
  j["passed"] = passed();
  if (!extra.empty()) j["details"] = extra;
  return j;
}

LemmaReport verify_continuity_sweep(const json& cfg) {
  check_keys(cfg, {"epsilon", "samples", "sigma_max_len", "seed", "include_violation", "battery"}, "continuity");
  const Rational eps = config_rational(cfg, "epsilon", "1/8");
  const std::size_t samples = config_uint(cfg, "samples", 200);
  const std::size_t max_len = config_uint(cfg, "sigma_max_len", 6);
  const std::uint64_t seed = config_uint(cfg, "seed", 7);
  if (max_len > 16) throw ConfigError("continuity: sigma_max_len above 16 is not supported");
  if (sgn(eps) <= 0 || eps >= Rational(1, 2)) throw ConfigError("continuity: epsilon must lie in (0, 1/2)");
  const auto battery = battery_from_config(cfg);
  const ContinuityExponent ex = continuity_exponent(eps);

  LemmaReport rep;
  rep.lemma = "continuity";
  rep.extra["s"] = ex.s;
  rep.extra["r"] = ex.r;
  rep.extra["epsilon"] = to_string(eps);

  std::vector<BitString> sigmas;
  for (std::size_t len = 1; len <= max_len; ++len)
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
      BitString s;
      for (std::size_t b = len; b-- > 0;) s.push_back(static_cast<int>((v >> b) & 1u));
      sigmas.push_back(std::move(s));
    }

  // least k with 2^-k eps^-2 < 1
  long k_min = 1;
  while (pow2(-k_min) / (eps * eps) >= 1) ++k_min;

  struct Triple {
    Rational alpha, beta;
    long k;
  };
  std::mt19937_64 rng(seed);
  const std::uint64_t grid = std::uint64_t{1} << 24;
  std::uniform_int_distribution<std::uint64_t> unit(1, grid - 1);
  std::uniform_int_distribution<long> k_pick(k_min, k_min + 12);
  std::vector<Triple> triples;
  while (triples.size() < samples) {
    const long k = k_pick(rng);
    Rational alpha = eps + (1 - 2 * eps) * Rational(static_cast<unsigned long>(unit(rng))) / grid;
    Rational beta = alpha + pow2(-k) * Rational(static_cast<unsigned long>(unit(rng))) / grid;
    alpha.canonicalize();
    beta.canonicalize();
    if (beta < 1 - eps) triples.push_back({alpha, beta, k});
  }
  rep.extra["triples"] = triples.size();
  rep.extra["sigmas"] = sigmas.size();

  struct Slot {
    std::uint64_t cases = 0;
    Rational worst{0};
    json failures = json::array();
  };
  std::vector<Slot> slots(triples.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t t = 0; t < triples.size(); ++t) {
    const Triple& tr = triples[t];
    Slot& slot = slots[t];
    for (const auto& S : battery)
      for (const auto& sigma : sigmas) {
        ++slot.cases;
        const bool ok = verify_continuity(S, tr.alpha, tr.beta, sigma, tr.k, eps, ex);
        const Rational diff = abs(martingale_value(S, tr.alpha, sigma) - martingale_value(S, tr.beta, sigma));
        const Rational ratio = diff / pow2(-tr.k + ex.r * static_cast<long>(sigma.size()));
        if (ratio > slot.worst) slot.worst = ratio;
        if (!ok)
          slot.failures.push_back({{"strategy", S.label()},
                                   {"alpha", to_string(tr.alpha)},
                                   {"beta", to_string(tr.beta)},
                                   {"k", tr.k},
                                   {"sigma", sigma.str()}});
      }
  }
  for (auto& slot : slots) {
    rep.cases_run += slot.cases;
    note_ratio(rep, slot.worst);
    for (auto& f : slot.failures) rep.failures.push_back(std::move(f));
  }

  if (config_bool(cfg, "include_violation", true)) {
    // beta - alpha equal to 2^-k sits just outside the contract.
    const long k = k_min;
    const Rational alpha = Rational(1, 2) - pow2(-k - 1);
    const Rational beta = alpha + pow2(-k);
    json skipped = json::array();
    try {
      verify_continuity(battery.front(), alpha, beta, BitString("1"), k, eps, ex);
      rep.failures.push_back({{"case", "violation"}, {"error", "precondition was not enforced"}});
    } catch (const PreconditionError& e) {
      ++rep.precondition_skips;
      skipped.push_back({{"alpha", to_string(alpha)}, {"beta", to_string(beta)}, {"k", k}, {"clause", e.clause()}});
    }
    rep.extra["skipped"] = skipped;
  }
  return rep;
}

LemmaReport verify_kolmogorov_sampling(const json& cfg) {
  check_keys(cfg, {"rho", "m", "k_max", "families_per_level", "seed", "extremal_k_max", "battery"}, "kolmogorov");
  const std::string rho_text = config_string(cfg, "rho", "010");
  const std::size_t m = config_uint(cfg, "m", 3);
  const std::size_t k_max = config_uint(cfg, "k_max", 7);
  const std::size_t per_level = config_uint(cfg, "families_per_level", 100);
  const std::uint64_t seed = config_uint(cfg, "seed", 11);
  const std::size_t extremal_k = config_uint(cfg, "extremal_k_max", 6);
  if (k_max > 9 || extremal_k > 7) throw ConfigError("kolmogorov: k_max above 9 or extremal_k_max above 7 is too large");
  TestRoot root;
  try {
    root = TestRoot::make(BitString(rho_text), m);
  } catch (const Error& e) {
    throw ConfigError(std::string("kolmogorov: ") + e.what());
  }
  const auto battery = battery_from_config(cfg);

  LemmaReport rep;
  rep.lemma = "kolmogorov";
  rep.extra["rho"] = root.rho.str();
  rep.extra["m"] = root.m;
  rep.extra["e2_lower"] = to_string(kE2Lower);

  // Families are drawn serially so the sample does not depend on thread count.
  struct Case {
    std::size_t strategy;
    BitString sigma;
    PrefixFreeFamily family;
  };
  std::mt19937_64 rng(seed);
  std::vector<Case> cases;
  for (std::size_t si = 0; si < battery.size(); ++si)
    for (std::size_t level = root.m + 1; level <= k_max; ++level)
      for (std::size_t f = 0; f < per_level; ++f) {
        std::uniform_int_distribution<std::size_t> n_pick(root.m, level - 1);
        const BitString sigma = random_extension(rng, root.rho, triangular(n_pick(rng)));
        cases.push_back({si, sigma, sample_prefix_free_family(rng, sigma, level)});
      }

  std::vector<KolmogorovReport> results(cases.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < cases.size(); ++i)
    results[i] = verify_kolmogorov_bound(battery[cases[i].strategy], cases[i].sigma, cases[i].family, root);

  std::size_t members = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    ++rep.cases_run;
    members += cases[i].family.size();
    note_ratio(rep, results[i].lhs / results[i].rhs);
    if (!results[i].pass)
      rep.failures.push_back({{"strategy", battery[cases[i].strategy].label()},
                              {"sigma", cases[i].sigma.str()},
                              {"family_size", cases[i].family.size()},
                              {"lhs", to_string(results[i].lhs)},
                              {"rhs", to_string(results[i].rhs)}});
  }
  rep.extra["families"] = cases.size();
  rep.extra["family_members"] = members;

  // Best possible family below rho, per strategy.
  json extremal = json::object();
  for (const auto& S : battery) {
    ++rep.cases_run;
    const Rational mass = extremal_family_mass(S, root.rho, extremal_k);
    const Rational rhs = pow2(-static_cast<long>(root.rho.size())) * kE2Lower * (1 + own_value_capital(S, root.rho));
    const Rational ratio = mass / rhs;
    note_ratio(rep, ratio);
    extremal[S.label()] = {{"mass", to_string(mass)}, {"rhs", to_string(rhs)}, {"ratio_approx", ratio.get_d()}};
    if (mass > rhs)
      rep.failures.push_back({{"strategy", S.label()},
                              {"case", "extremal"},
                              {"k_max", extremal_k},
                              {"lhs", to_string(mass)},
                              {"rhs", to_string(rhs)}});
  }
  rep.extra["extremal"] = extremal;
  rep.extra["extremal_k_max"] = extremal_k;
  return rep;
}

LemmaReport verify_product_bounds(const json& cfg) {
  check_keys(cfg, {"s", "N"}, "product");
  std::vector<Rational> values;
  if (cfg.contains("s")) {
    if (!cfg.at("s").is_array() || cfg.at("s").empty()) throw ConfigError("product: 's' must be a non-empty array");
    for (const auto& v : cfg.at("s")) values.push_back(as_rational(v, "product s"));
  } else {
    values = {Rational(1, 2), Rational(1), Rational(2)};
  }
  const std::size_t N = config_uint(cfg, "N", 64);
  if (N < 1) throw ConfigError("product: N must be >= 1");

  LemmaReport rep;
  rep.lemma = "product";
  json per_s = json::object();
  for (const auto& s : values) {
    if (sgn(s) <= 0) throw ConfigError("product: s must be positive");
    Rational previous = 1;
    bool increasing = true;
    ProductBound last;
    for (std::size_t n = 1; n <= N; ++n) {
      ++rep.cases_run;
      last = product_bound_check(s, n);
      note_ratio(rep, last.partial_product / last.enclosure_lower);
      if (!last.bound_ok)
        rep.failures.push_back({{"s", to_string(s)}, {"N", n}, {"partial_product", to_string(last.partial_product)},
                                {"enclosure_lower", to_string(last.enclosure_lower)}});
      if (!(last.partial_product > previous)) {
        increasing = false;
        rep.failures.push_back({{"s", to_string(s)}, {"N", n}, {"case", "not strictly increasing"}});
      }
      previous = last.partial_product;
    }
    per_s[to_string(s)] = {{"partial_product_approx", last.partial_product.get_d()},
                           {"enclosure_lower", to_string(last.enclosure_lower)},
                           {"strictly_increasing", increasing}};
  }
  rep.extra["N"] = N;
  rep.extra["per_s"] = per_s;
  return rep;
}

LemmaReport verify_test_level_bounds(const json& cfg) {
  check_keys(cfg, {"rho", "j_max", "k_max", "node_budget", "battery"}, "test_level");
  const BitString rho(config_string(cfg, "rho", "010"));
  const long j_max = static_cast<long>(config_uint(cfg, "j_max", 4));
  const std::size_t k_max = config_uint(cfg, "k_max", 6);
  const std::uint64_t budget = config_uint(cfg, "node_budget", std::uint64_t{1} << 22);
  if (!is_triangular(rho.size()) || rho.count_ones() == 0)
    throw ConfigError("test_level: rho needs triangular length and a 1 bit");
  const auto battery = battery_from_config(cfg);

  LemmaReport rep;
  rep.lemma = "test-level";
  rep.extra["rho"] = rho.str();
  rep.extra["k_max"] = k_max;
  json per_strategy = json::object();
  for (const auto& S : battery) {
    json levels = json::array();
    PrefixFreeFamily previous;
    for (long j = 0; j <= j_max; ++j) {
      ++rep.cases_run;
      PrefixFreeFamily U;
      try {
        U = enumerate_test_level(S, rho, j, k_max, budget);
      } catch (const SizeLimitError& e) {
        rep.failures.push_back({{"strategy", S.label()}, {"j", j}, {"error", e.what()}});
        break;
      }
      const Rational mu = measure_of_family(U);
      const Rational bound = test_level_bound(S, rho, j);
      note_ratio(rep, mu / bound);
      if (mu > bound)
        rep.failures.push_back(
            {{"strategy", S.label()}, {"j", j}, {"measure", to_string(mu)}, {"bound", to_string(bound)}});
      // U_j covers U_{j+1}: every deeper member extends some member of the previous level.
      if (j > 0) {
        for (const auto& x : U.members()) {
          const bool covered = std::any_of(previous.members().begin(), previous.members().end(),
                                           [&](const BitString& y) { return y.is_prefix_of(x); });
          if (!covered) {
            rep.failures.push_back({{"strategy", S.label()}, {"j", j}, {"case", "not nested"}, {"member", x.str()}});
            break;
          }
        }
      }
      levels.push_back({{"j", j},
                        {"members", U.size()},
                        {"measure", to_string(mu)},
                        {"scaled_measure", to_string(mu * pow2(j))},
                        {"bound", to_string(bound)}});
      previous = std::move(U);
    }
    per_strategy[S.label()] = levels;
  }
  rep.extra["levels"] = per_strategy;
  return rep;
}

LemmaReport run_find_m(const json& cfg) {
  check_keys(cfg, {"seed", "alpha", "epsilon", "horizon"}, "find_m");
  const Rational eps = config_rational(cfg, "epsilon", "1/8");
  const std::size_t horizon = config_uint(cfg, "horizon", 64);
  if (sgn(eps) <= 0 || eps >= Rational(1, 2)) throw ConfigError("find_m: epsilon must lie in (0, 1/2)");
  if (horizon > 2048) throw ConfigError("find_m: horizon above 2048 is not supported");
  BitSource src = cfg.contains("alpha") ? BitSource::from_string(BitString(config_string(cfg, "alpha", "")))
                                        : BitSource::from_seed(config_uint(cfg, "seed", 3));
  LemmaReport rep;
  rep.lemma = "find-m";
  rep.cases_run = 1;
  FindMResult r;
  try {
    r = find_m(src, eps, horizon);
  } catch (const SourceExhausted& e) {
    throw ConfigError(std::string("find_m: alpha is shorter than horizon' bits: ") + e.what());
  }
  rep.extra["source"] = src.identity();
  rep.extra["horizon"] = r.horizon;
  rep.extra["verified_only_to_horizon"] = r.verified_only_to_horizon;
  if (r.certificate) {
    rep.extra["m"] = r.certificate->m;
    rep.extra["s"] = r.certificate->s;
    rep.extra["r"] = r.certificate->r;
    rep.extra["rho"] = r.certificate->rho.str();
  } else {
    rep.extra["m"] = nullptr;
  }
  return rep;
}

LemmaReport verify_lemma(const std::string& which, const json& cfg) {
  if (which == "continuity") return verify_continuity_sweep(cfg);
  if (which == "kolmogorov") return verify_kolmogorov_sampling(cfg);
  if (which == "product") return verify_product_bounds(cfg);
  if (which == "test-level") return verify_test_level_bounds(cfg);
  if (which == "find-m") return run_find_m(cfg);
  throw ConfigError("unknown lemma '" + which + "'");
}

std::string canonical_dump(const json& j) { return j.dump(); }

std::string sha256_hex(const std::string& bytes) {
  if (sodium_init() < 0) throw Error("libsodium failed to initialise");
  unsigned char digest[crypto_hash_sha256_BYTES];
  crypto_hash_sha256(digest, reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  char hex[2 * crypto_hash_sha256_BYTES + 1];
  sodium_bin2hex(hex, sizeof hex, digest, sizeof digest);
  return hex;
}

ExperimentResult run_separation_cr(const json& cfg) {
  check_keys(cfg,
             {"experiment", "output", "seeds", "seed_count", "length", "precision", "classical_steps",
              "capital_threshold", "pass_fraction", "battery", "classical_trace_csv"},
             "separation-cr");
  std::vector<std::uint64_t> seeds;
  if (cfg.contains("seeds")) {
    if (!cfg.at("seeds").is_array()) throw ConfigError("'seeds' must be an array");
    for (const auto& s : cfg.at("seeds")) {
      if (!s.is_number_unsigned()) throw ConfigError("seeds must be non-negative integers");
      seeds.push_back(s.get<std::uint64_t>());
    }
  } else {
    const std::uint64_t count = config_uint(cfg, "seed_count", 64);
    for (std::uint64_t s = 1; s <= count; ++s) seeds.push_back(s);
  }
  if (seeds.empty()) throw ConfigError("separation-cr needs at least one seed");
  const std::size_t length = config_uint(cfg, "length", 4096);
  const std::size_t precision = config_uint(cfg, "precision", kDefaultBiasPrecision);
  const std::size_t steps = std::min<std::size_t>(config_uint(cfg, "classical_steps", 1000), length);
  const Rational threshold = config_rational(cfg, "capital_threshold", "1000");
  const Rational pass_fraction = config_rational(cfg, "pass_fraction", "95/100");
  if (precision < 1 || precision > 64) throw ConfigError("precision must lie in [1, 64]");
  if (length > 1 << 14) throw ConfigError("length above 16384 is not supported");
  const auto battery = battery_from_config(cfg);

  struct SeedRun {
    BitString q;
    Rational bias;
    MartingaleTrace classical;
    bool increasing = true;
    bool geometric = true;
    std::string error;
  };
  std::vector<SeedRun> runs(seeds.size());
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    SeedRun& r = runs[i];
    BitSource alpha = BitSource::from_seed(seeds[i]);
    r.q = build_q(QConstruction{QVariant::theorem1, ApproximationScheme::theorem1_prefix()}, alpha, length);
    r.bias = bits_to_rational(alpha.prefix(precision));
    if (sgn(r.bias) == 0) {
      r.error = "bias surrogate is 0";
      continue;
    }
    r.classical = classical_oracle_martingale(r.bias, r.q, steps);
    // Every round multiplies by 1/bias or 1/(1-bias), so at least by the smaller one.
    const Rational rate = std::min<Rational>(1 / r.bias, 1 / (1 - r.bias));
    for (std::size_t k = 1; k < r.classical.capitals.size(); ++k) {
      const Rational& prev = r.classical.capitals[k - 1];
      const Rational& cur = r.classical.capitals[k];
      if (!(cur > prev)) r.increasing = false;
      if (cur < rate * prev) r.geometric = false;
    }
  }

  json report;
  bool classical_ok = true;
  json classical = json::array();
  std::vector<BatteryJob> jobs;
  std::vector<std::size_t> job_seed;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const SeedRun& r = runs[i];
    json entry = {{"seed", seeds[i]}, {"q_length", r.q.size()}, {"q_ones", r.q.count_ones()}};
    if (!r.error.empty()) {
      classical_ok = false;
      entry["error"] = r.error;
      classical.push_back(entry);
      continue;
    }
    entry["bias"] = to_string(r.bias);
    entry["steps"] = steps;
    entry["strictly_increasing"] = r.increasing;
    entry["geometric_rate"] = r.geometric;
    entry["log2_final_capital"] = log2_approx(r.classical.capitals.back());
    classical.push_back(entry);
    classical_ok = classical_ok && r.increasing && r.geometric;
    for (const auto& S : battery) {
      jobs.push_back(BatteryJob{&S, &r.bias, r.q.raw()});
      job_seed.push_back(i);
    }
  }
  const auto summaries = kernels::run_battery(jobs);

  std::uint64_t below = 0;
  json per_strategy = json::object();
  json exceeding = json::array();
  for (std::size_t si = 0; si < battery.size(); ++si) {
    std::uint64_t strat_below = 0, strat_pairs = 0;
    double worst_log2 = 0;
    std::uint64_t worst_seed = 0;
    for (std::size_t j = si; j < summaries.size(); j += battery.size()) {
      const CapitalSummary& cs = summaries[j];
      const std::uint64_t seed = seeds[job_seed[j]];
      ++strat_pairs;
      const double l2 = log2_approx(cs.max_capital);
      if (strat_pairs == 1 || l2 > worst_log2) {
        worst_log2 = l2;
        worst_seed = seed;
      }
      if (cs.max_capital < threshold) {
        ++strat_below;
      } else {
        exceeding.push_back({{"strategy", battery[si].label()},
                             {"seed", seed},
                             {"argmax", cs.argmax},
                             {"log2_max_capital", l2}});
      }
    }
    below += strat_below;
    per_strategy[battery[si].label()] = {{"pairs", strat_pairs},
                                         {"below_threshold", strat_below},
                                         {"max_log2_capital", worst_log2},
                                         {"max_seed", worst_seed}};
  }
  const std::uint64_t pairs = summaries.size();
  const bool battery_ok = pairs > 0 && Rational(static_cast<unsigned long>(below)) >= pass_fraction * pairs;

  if (cfg.contains("classical_trace_csv") && runs.front().error.empty())
    write_text(config_string(cfg, "classical_trace_csv", ""), "trace file",
               [&](std::ostream& out) { write_trace_csv(out, runs.front().classical); });

  report["classical"] = {{"runs", classical}, {"passed", classical_ok}};
  report["hippocratic"] = {{"pairs", pairs},
                           {"below_threshold", below},
                           {"capital_threshold", to_string(threshold)},
                           {"pass_fraction", to_string(pass_fraction)},
                           {"per_strategy", per_strategy},
                           {"exceeding", exceeding},
                           {"passed", battery_ok},
                           {"note", "statistical evidence, not proof"}};
  report["parameters"] = {{"length", length}, {"precision", precision}, {"classical_steps", steps},
                          {"seeds", seeds.size()}, {"strategies", battery.size()}};
  return {report, classical_ok && battery_ok};
}

ExperimentResult run_lemma_suite(const json& cfg) {
  check_keys(cfg, {"experiment", "output", "continuity", "kolmogorov", "product", "test_level", "find_m"},
             "lemma-suite");
  const json empty = json::object();
  auto sub = [&](const char* key) -> const json& { return cfg.contains(key) ? cfg.at(key) : empty; };
  const std::vector<LemmaReport> reports = {run_find_m(sub("find_m")), verify_continuity_sweep(sub("continuity")),
                                            verify_kolmogorov_sampling(sub("kolmogorov")),
                                            verify_product_bounds(sub("product")),
                                            verify_test_level_bounds(sub("test_level"))};
  json lemmas = json::object();
  bool ok = true;
  std::uint64_t cases = 0, skips = 0;
  for (const auto& r : reports) {
    lemmas[r.lemma] = r.to_json();
    ok = ok && r.passed();
    cases += r.cases_run;
    skips += r.precondition_skips;
  }
  json report;
  report["lemmas"] = lemmas;
  report["cases_run"] = cases;
  report["precondition_skips"] = skips;
  return {report, ok};
}

ExperimentResult run_separation_kl(const json& cfg) {
  check_keys(cfg, {"experiment", "output", "seed", "length", "p", "c", "tau", "strategy", "kl_trace_csv"},
             "separation-kl");
  const std::uint64_t seed = config_uint(cfg, "seed", 5);
  const std::size_t length = config_uint(cfg, "length", 1024);
  const Rational p = config_rational(cfg, "p", "1/4");
  const Rational c = config_rational(cfg, "c", "1/4");
  const Rational tau = config_rational(cfg, "tau", "1/32");
  if (length > 1 << 13) throw ConfigError("length above 8192 is not supported");
  if (sgn(p) <= 0 || p >= 1 || sgn(tau) <= 0) throw ConfigError("need 0 < p < 1 and tau > 0");
  const json strat_cfg = cfg.contains("strategy") ? cfg.at("strategy") : json::object();
  check_keys(strat_cfg, {"p", "tau", "bias", "steps", "band"}, "separation-kl strategy");

  json report;
  bool ok = true;

  // (a) oracle selector against the slow-drift Q.
  {
    BitSource alpha = BitSource::from_seed(seed);
    const auto scheme = ApproximationScheme::slow_drift(p, c);
    const BitString q = build_q(QConstruction{QVariant::theorem2, scheme}, alpha, length);
    const auto lambda = GeneralizedBernoulliMeasure::slow_drift(p, c);
    const SelectionFunction oracle = make_threshold_selector(lambda, p + tau, length);
    const KlTrace trace = run_kl_martingale(oracle, never_bet(), lambda, q, length, true);
    const BitString& U = trace.run.selected;

    json positions = json::array();
    for (auto pos : trace.run.positions) positions.push_back(pos);
    json oracle_json = {{"threshold", to_string(p + tau)},
                        {"selected", U.size()},
                        {"positions", positions},
                        {"halted", to_string(trace.run.halted)},
                        {"fairness_checks", trace.fairness_checks}};
    if (!U.empty()) {
      Rational mean_bias = 0;
      for (auto pos : trace.run.positions) mean_bias += lambda.bias(pos);
      mean_bias /= static_cast<unsigned long>(U.size());
      const Rational phi = frequency(U);
      oracle_json["phi"] = to_string(phi);
      oracle_json["gap"] = to_string(phi - p);
      oracle_json["mean_selected_bias"] = to_string(mean_bias);
    }
    // An empty horizon has nothing to select; otherwise the early positions must qualify.
    const bool oracle_ok = length == 0 || !U.empty();
    oracle_json["passed"] = oracle_ok;
    ok = ok && oracle_ok;

    json hippocratic = json::object();
    for (const auto& name : registered_selectors()) {
      const SelectionRun run = run_selection(make_selector(name), q, length);
      json entry = {{"selected", run.selected.size()}, {"steps", run.steps()}, {"halted", to_string(run.halted)}};
      if (!run.selected.empty()) {
        const Rational phi = frequency(run.selected);
        entry["phi"] = to_string(phi);
        entry["gap"] = to_string(phi - p);
      }
      hippocratic[name] = entry;
    }

    json first = json::array();
    for (std::size_t k = 1; k <= std::min<std::size_t>(length, 16); ++k) first.push_back(to_string(lambda.bias(k)));

    report["selection"] = {{"length", length},
                           {"q_ones", q.count_ones()},
                           {"measure", lambda.describe()},
                           {"leading_biases", first},
                           {"oracle", oracle_json},
                           {"hippocratic_selectors", hippocratic}};

    if (cfg.contains("kl_trace_csv"))
      write_text(config_string(cfg, "kl_trace_csv", ""), "trace file",
                 [&](std::ostream& out) { write_kl_csv(out, trace); });
  }

  // (b) the fraction-betting strategy on a deterministic frequency-(p + 2 tau) input.
  {
    const Rational sp = config_rational(strat_cfg, "p", "1/4");
    const Rational stau = config_rational(strat_cfg, "tau", "1/8");
    const Rational bias = config_rational(strat_cfg, "bias", "11/32");
    const std::size_t steps = config_uint(strat_cfg, "steps", 10000);
    Rational band_lo{23, 5000}, band_hi{1, 20};
    if (strat_cfg.contains("band")) {
      const json& b = strat_cfg.at("band");
      if (!b.is_array() || b.size() != 2) throw ConfigError("'band' must be [lo, hi]");
      band_lo = as_rational(b[0], "band lo");
      band_hi = as_rational(b[1], "band hi");
    }
    StrategyParameters params;
    try {
      params = choose_strategy_params(sp, stau);
    } catch (const PreconditionError& e) {
      throw ConfigError(std::string("strategy parameters: ") + e.what());
    }
    const Rational lower = growth_lower_bound(params);
    const BitString X = frequency_witness(sp + 2 * stau, steps);
    const KlTrace trace = run_kl_martingale(make_selector("monotone"), lemma34_strategy(params),
                                            GeneralizedBernoulliMeasure::constant(bias), X, steps, false);
    const std::size_t selected = trace.run.selected.size();
    json strategy = {{"p", to_string(sp)},
                     {"tau", to_string(stau)},
                     {"bias", to_string(bias)},
                     {"gamma", to_string(params.gamma)},
                     {"delta", to_string(params.delta)},
                     {"growth_lower_bound", to_string(lower)},
                     {"band", {to_string(band_lo), to_string(band_hi)}},
                     {"steps", steps},
                     {"selected", selected},
                     {"fairness_checks", trace.fairness_checks}};
    bool strat_ok = trace.fairness_checks == selected;
    if (selected > 0) {
      const GrowthCheck band = check_growth(trace.final_capital, selected, band_lo, band_hi);
      const GrowthCheck floor = check_growth(trace.final_capital, selected, lower, band_hi);
      strategy["ruined"] = band.ruined;
      strategy["log2_growth_per_bit"] = {band.log2_per_bit.lo.get_d(), band.log2_per_bit.hi.get_d()};
      strategy["within_band"] = band.at_least_lower && band.at_most_upper;
      strategy["above_growth_lower_bound"] = floor.at_least_lower;
      strat_ok = strat_ok && !band.ruined && band.at_least_lower && band.at_most_upper && floor.at_least_lower;
    }
    strategy["passed"] = strat_ok;
    report["strategy"] = strategy;
    ok = ok && strat_ok;
  }
  return {report, ok};
}

ExperimentResult run_experiment(const json& cfg) {
  if (!cfg.is_object() || !cfg.contains("experiment") || !cfg.at("experiment").is_string())
    throw ConfigError("config needs a string field 'experiment'");
  const std::string name = cfg.at("experiment").get<std::string>();
  ExperimentResult r;
  if (name == "separation-cr") r = run_separation_cr(cfg);
  else if (name == "lemma-suite") r = run_lemma_suite(cfg);
  else if (name == "separation-kl") r = run_separation_kl(cfg);
  else throw ConfigError("unknown experiment '" + name + "'");
  r.report["experiment"] = name;
  r.report["config"] = cfg;
  r.report["config_sha256"] = sha256_hex(canonical_dump(cfg));
  r.report["passed"] = r.passed;
  return r;
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

}  // namespace hippo
