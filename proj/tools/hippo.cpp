#include <CLI11.hpp>

#include <fstream>
#include <iterator>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hippo/bit_source.hpp"
#include "hippo/construction.hpp"
#include "hippo/experiment.hpp"
#include "hippo/kl.hpp"
#include "hippo/martingale.hpp"

using namespace hippo;

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailed = 1;
constexpr int kConfigError = 2;

// seed:N | file:PATH | explicit:BITS | BITS
BitSource parse_source(const std::string& spec) {
  auto rest = [&](std::size_t n) { return spec.substr(n); };
  if (spec.rfind("seed:", 0) == 0) {
    try {
      return BitSource::from_seed(std::stoull(rest(5)));
    } catch (const std::logic_error&) {
      throw ConfigError("bad seed in source '" + spec + "'");
    }
  }
  if (spec.rfind("file:", 0) == 0) return BitSource::from_file(rest(5));
  if (spec.rfind("explicit:", 0) == 0) return BitSource::from_string(parse_bit_text(rest(9)));
  return BitSource::from_string(parse_bit_text(spec));
}

BitString read_bit_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  return parse_bit_text(std::string(std::istreambuf_iterator<char>(in), {}));
}

BitSource alpha_source(const std::string& alpha_file, const std::optional<std::uint64_t>& seed) {
  if (!alpha_file.empty() && seed) throw ConfigError("give either --alpha-file or --seed, not both");
  if (!alpha_file.empty()) return BitSource::from_file(alpha_file);
  if (seed) return BitSource::from_seed(*seed);
  throw ConfigError("one of --alpha-file or --seed is required");
}

void emit(const json& j, const std::string& path) {
  const std::string text = j.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output '" + path + "'");
  out << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact martingales, Q constructions and selection rules for biased-coin randomness"};
  app.require_subcommand(1);

  // build-q
  auto* build = app.add_subcommand("build-q", "Print the constructed sequence Q as text");
  std::string variant = "thm1", alpha_file, scheme = "prefix", p_text = "1/4", c_text = "1/4";
  std::optional<std::uint64_t> seed;
  std::size_t length = 0;
  build->add_option("--variant", variant)->check(CLI::IsMember({"thm1", "thm2"}));
  build->add_option("--alpha-file", alpha_file, "alpha as a bit file");
  build->add_option("--seed", seed, "seeded alpha");
  build->add_option("--length", length, "number of Q bits")->required();
  build->add_option("--scheme", scheme, "approximation scheme for thm2")->check(CLI::IsMember({"prefix", "slow"}));
  build->add_option("--p", p_text);
  build->add_option("--c", c_text);

  // bet
  auto* bet = app.add_subcommand("bet", "Run a stake function (or the classical oracle) on Q and print the trace CSV");
  std::string stake = "constant", bias_text, q_text, q_file, bet_alpha_file;
  std::vector<std::string> stake_params;
  std::optional<std::uint64_t> bet_seed;
  std::size_t precision = kDefaultBiasPrecision;
  bool classical = false;
  bet->add_option("--stake", stake, "registered stake kind");
  bet->add_option("--param", stake_params, "stake parameter (repeatable)");
  bet->add_flag("--classical", classical, "bet everything on the known next bit");
  bet->add_option("--bias", bias_text, "bias as num/den");
  bet->add_option("--alpha-file", bet_alpha_file, "take the bias from alpha");
  bet->add_option("--seed", bet_seed, "take the bias from a seeded alpha");
  bet->add_option("--precision", precision, "alpha bits used for the bias");
  bet->add_option("--q", q_text, "history as a bit string");
  bet->add_option("--q-file", q_file, "history as a bit file");

  // kl-run
  auto* kl = app.add_subcommand("kl-run", "Run a selection rule with an optional bet and print the CSV trace");
  std::string selector, source, bet_kind = "none", kl_p = "1/4", kl_tau = "1/8", kl_bias;
  std::size_t budget = 0;
  kl->add_option("--selector", selector, "monotone | all-scan | even-positions | after-one | reverse-pairs | random:SEED")
      ->required();
  kl->add_option("--source", source, "seed:N | file:PATH | explicit:BITS")->required();
  kl->add_option("--budget", budget, "maximum reads")->required();
  kl->add_option("--bet", bet_kind)->check(CLI::IsMember({"none", "lemma34"}));
  kl->add_option("--p", kl_p);
  kl->add_option("--tau", kl_tau);
  kl->add_option("--bias", kl_bias, "constant bias of the measure (default p)");

  // verify-lemma
  auto* verify = app.add_subcommand("verify-lemma", "Run one lemma sweep and print its JSON report");
  std::string which, lemma_config, lemma_output;
  verify->add_option("--which", which)
      ->required()
      ->check(CLI::IsMember({"continuity", "kolmogorov", "product", "test-level", "find-m"}));
  verify->add_option("--config", lemma_config, "JSON parameters (defaults when omitted)");
  verify->add_option("--output", lemma_output);

  // experiment
  auto* exp = app.add_subcommand("experiment", "Run an experiment config and write its JSON report");
  std::string exp_config, exp_output;
  exp->add_option("--config", exp_config)->required();
  exp->add_option("--output", exp_output, "overrides the config's output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kConfigError;
  }

  try {
    if (*build) {
      BitSource alpha = alpha_source(alpha_file, seed);
      QConstruction c{variant == "thm1" ? QVariant::theorem1 : QVariant::theorem2,
                      scheme == "slow" ? ApproximationScheme::slow_drift(parse_rational(p_text), parse_rational(c_text))
                                       : ApproximationScheme::theorem1_prefix()};
      std::cout << build_q(c, alpha, length).str() << "\n";
      return kPass;
    }

    if (*bet) {
      if (!q_text.empty() && !q_file.empty()) throw ConfigError("give either --q or --q-file");
      const BitString q = q_file.empty() ? parse_bit_text(q_text) : read_bit_file(q_file);
      Rational bias;
      if (!bias_text.empty()) {
        bias = parse_rational(bias_text);
      } else {
        BitSource alpha = alpha_source(bet_alpha_file, bet_seed);
        bias = bits_to_rational(alpha.prefix(precision));
      }
      MartingaleTrace trace;
      if (classical) {
        trace = classical_oracle_martingale(bias, q, q.size());
      } else {
        std::vector<Rational> params;
        for (const auto& t : stake_params) params.push_back(parse_rational(t));
        if (params.empty() && stake == "constant") params.push_back(Rational(1, 2));
        trace = evaluate_martingale(make_stake(stake, params), bias, q);
      }
      write_trace_csv(std::cout, trace);
      return kPass;
    }

    if (*kl) {
      BitSource X = parse_source(source);
      const Rational p = parse_rational(kl_p);
      const Rational bias = kl_bias.empty() ? p : parse_rational(kl_bias);
      const SelectionFunction f = selector.rfind("random:", 0) == 0
                                      ? make_random_selector(std::stoull(selector.substr(7)), budget)
                                      : make_selector(selector);
      BetRule rule = never_bet();
      if (bet_kind == "lemma34") rule = lemma34_strategy(choose_strategy_params(p, parse_rational(kl_tau)));
      const KlTrace trace = run_kl_martingale(f, rule, GeneralizedBernoulliMeasure::constant(bias), X, budget, true);
      write_kl_csv(std::cout, trace);
      return kPass;
    }

    if (*verify) {
      const json cfg = lemma_config.empty() ? json::object() : load_config(lemma_config);
      const LemmaReport rep = verify_lemma(which, cfg);
      emit(rep.to_json(), lemma_output);
      return rep.passed() ? kPass : kCheckFailed;
    }

    if (*exp) {
      const json cfg = load_config(exp_config);
      const ExperimentResult r = run_experiment(cfg);
      std::string out = exp_output;
      if (out.empty() && cfg.contains("output") && cfg.at("output").is_string()) out = cfg.at("output");
      emit(r.report, out);
      return r.passed ? kPass : kCheckFailed;
    }
  } catch (const FairnessViolation& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const SelectionViolation& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const InvariantError& e) {
    std::cerr << "check failed: " << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
  return kPass;
}
