#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hippo/bit_source.hpp"
#include "hippo/core.hpp"
#include "hippo/enclosure.hpp"

namespace hippo {

enum class SelectAction { scan, select };

struct SelectionDecision {
  SelectAction action = SelectAction::scan;
  std::size_t position = 1;  // 1-based index into X
};

/// What a selection rule may look at: the bits seen so far, in read order.
/// `positions` is derivable from `seen` by replaying the rule; it is supplied so
/// rules need not replay themselves.
struct SelectionState {
  const BitString& seen;
  std::span<const std::size_t> positions;
};

/// A partial, possibly non-monotone selection rule. Returning nullopt means the
/// rule is undefined on this history and the run halts.
class SelectionFunction {
 public:
  using Rule = std::function<std::optional<SelectionDecision>(const SelectionState&)>;

  SelectionFunction(std::string name, Rule rule) : name_(std::move(name)), rule_(std::move(rule)) {}
  const std::string& name() const noexcept { return name_; }
  std::optional<SelectionDecision> operator()(const SelectionState& s) const { return rule_(s); }

 private:
  std::string name_;
  Rule rule_;
};

/// Registry:
///   monotone        read 1,2,3,... selecting each
///   all-scan        read 1,2,3,... selecting none
///   even-positions  read 2,4,6,... selecting each
///   after-one       read 1,2,3,...; select a bit iff the previously read bit was 1
///   reverse-pairs   read 2,1,4,3,...; select the odd position iff its partner read 0
SelectionFunction make_selector(const std::string& name);
std::vector<std::string> registered_selectors();

/// Reads positions in a pseudo-random non-monotone order drawn from
/// [1, max_position], scanning or selecting by a hash of (seed, history).
SelectionFunction make_random_selector(std::uint64_t seed, std::size_t max_position);

class GeneralizedBernoulliMeasure;

/// Reads and selects, in increasing order, exactly the positions k <= horizon
/// with lambda.bias(k) >= threshold; undefined once they run out. Needs the
/// measure, so it is an oracle selector rather than a Hippocratic one.
SelectionFunction make_threshold_selector(const GeneralizedBernoulliMeasure& lambda, const Rational& threshold,
                                          std::size_t horizon);

enum class HaltReason { undefined_rule, step_budget, source_exhausted };
std::string to_string(HaltReason r);

/// The (V, T, U) trace of one run.
struct SelectionRun {
  BitString seen;                          // V, in read order
  std::vector<std::size_t> positions;      // position read at each step
  std::vector<SelectAction> actions;
  std::vector<std::size_t> selected_len;   // |T(k)| for k = 0..steps
  BitString selected;                      // U
  HaltReason halted = HaltReason::step_budget;

  std::size_t steps() const noexcept { return positions.size(); }
  /// T(k), 0 <= k <= steps().
  BitString snapshot(std::size_t k) const { return selected.prefix(selected_len.at(k)); }
};

/// Runs f on X for at most step_budget reads. A rule that reads a position
/// twice raises SelectionViolation naming the history.
SelectionRun run_selection(const SelectionFunction& f, BitSource& X, std::size_t step_budget);
SelectionRun run_selection(const SelectionFunction& f, const BitString& X, std::size_t step_budget);

/// #1(sigma) / |sigma|. DomainError on the empty string.
Rational frequency(const BitString& sigma);

struct StochasticityReport {
  std::vector<Rational> phi;         // phi[j-1] = frequency(U restricted to j)
  std::vector<Rational> deviation;   // |phi - p|
  Rational tail_max_deviation;       // over the last tail_window entries
};
StochasticityReport stochasticity_report(const SelectionRun& run, const Rational& p, std::size_t tail_window);

/// Independent bits with P(X_i = 1) = b_i.
class GeneralizedBernoulliMeasure {
 public:
  static GeneralizedBernoulliMeasure constant(const Rational& p);
  /// b_i = 0.slow_scheme(p, c, i).
  static GeneralizedBernoulliMeasure slow_drift(const Rational& p, const Rational& c);
  /// b_i = biases[i-1]; positions past the end are a DomainError.
  static GeneralizedBernoulliMeasure explicit_list(std::vector<Rational> biases);

  Rational bias(std::size_t i) const;
  std::string describe() const;

 private:
  struct Constant {
    Rational p;
  };
  struct Drift {
    Rational p;
    Rational c;
  };
  struct List {
    std::vector<Rational> b;
  };
  using Kind = std::variant<Constant, Drift, List>;
  explicit GeneralizedBernoulliMeasure(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

/// lambda([w]) = prod b_i over ones * prod (1 - b_i) over zeros.
Rational lambda_measure(const GeneralizedBernoulliMeasure& lambda, const BitString& w);

/// Bit i = 1 iff 0.(next `precision` fresh bits) < b_i; blocks are disjoint.
BitString sample_generalized_bernoulli(const GeneralizedBernoulliMeasure& lambda, BitSource& fresh,
                                       std::size_t precision, std::size_t n);

/// Information a KL bet rule may use before the selected bit is revealed.
struct BetContext {
  const BitString& selected;  // T_k
  std::size_t position;       // i = n(V(k))
  const Rational& bias;       // b_i
  const Rational& capital;    // M(T_k)
};
struct BetOutcome {
  Rational if_one;   // M(T_k . 1)
  Rational if_zero;  // M(T_k . 0)
};
using BetRule = std::function<BetOutcome(const BetContext&)>;

BetRule never_bet();

struct KlStep {
  SelectAction action;
  std::size_t position;
  int bit;
  std::size_t selected_len;  // after this step
};

struct KlTrace {
  SelectionRun run;
  std::vector<KlStep> steps;
  std::vector<Rational> capitals;  // per step, when kept; capitals[k] after step k+1
  Rational initial_capital{1};
  Rational final_capital{1};
  std::size_t fairness_checks = 0;  // selected steps whose identity was verified
};

/// Selection plus betting on selected bits with the position-dependent bias.
/// Every selected step asserts b_i M(T.1) + (1 - b_i) M(T.0) = M(T) exactly
/// and throws FairnessViolation otherwise.
KlTrace run_kl_martingale(const SelectionFunction& f, const BetRule& bet, const GeneralizedBernoulliMeasure& lambda,
                          BitSource& X, std::size_t budget, bool keep_capitals = true);
KlTrace run_kl_martingale(const SelectionFunction& f, const BetRule& bet, const GeneralizedBernoulliMeasure& lambda,
                          const BitString& X, std::size_t budget, bool keep_capitals = true);

/// CSV: step,action,position,bit,selected_len,phi_num,phi_den,capital_num,capital_den
void write_kl_csv(std::ostream& out, const KlTrace& trace);

struct StrategyParameters {
  Rational p;
  Rational tau;
  Rational gamma;  // (p + 2 tau)/(p + tau) - 1
  Rational delta;
};

/// gamma as above; delta = the largest 2^-i (i <= 64) with
/// delta (1-p-tau)^2/(p+tau)^2 <= tau and log2(1-delta) > -(delta/ln 2)(1 + gamma/2),
/// the second checked by interval enclosure and accepted only when conclusive.
/// PreconditionError unless 0 < p, 0 < tau, p + 2 tau < 1; NoDeltaFound past i = 64.
StrategyParameters choose_strategy_params(const Rational& p, const Rational& tau);

/// Bets a fraction delta of capital on 1 every selected round:
/// M(T.0) = M(T)(1 - delta), M(T.1) = M(T)(1 - delta + delta/b_i).
/// BiasTooLarge when a selected position has b_i >= p + tau.
BetRule lemma34_strategy(const StrategyParameters& params);

/// Rational lower bound on delta gamma (1-p-tau) / (2 ln 2), using ln 2 <= 0.6931472.
Rational growth_lower_bound(const StrategyParameters& params);

/// X_i = floor(i f) - floor((i-1) f): a deterministic sequence with every prefix
/// frequency within 1/n of f.
BitString frequency_witness(const Rational& f, std::size_t n);

struct GrowthCheck {
  Interval log2_per_bit;
  bool ruined = false;          // capital is 0; log2_per_bit is meaningless
  bool at_least_lower = false;  // conclusively log2(capital)/steps >= lower
  bool at_most_upper = false;   // conclusively log2(capital)/steps <= upper
};
/// Compares log2(capital)/steps with [lower, upper]; equivalent to comparing
/// capital with 2^(steps*lower) and 2^(steps*upper).
GrowthCheck check_growth(const Rational& capital, std::size_t steps, const Rational& lower, const Rational& upper);

}  // namespace hippo
