#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "hippo/bit_source.hpp"
#include "hippo/core.hpp"

namespace hippo {

/// What a stake rule sees: the game history so far plus its running count of ones
/// (derivable from the bits, carried along so evaluation stays linear).
struct History {
  std::span<const std::uint8_t> bits;
  std::size_t ones = 0;
};

/// A Hippocratic betting strategy S: history -> [-1, 1] ∩ Q.
/// |S| is the fraction of capital staked; S >= 0 bets on 1, S < 0 on 0.
class StakeFunction {
 public:
  using Rule = std::function<Rational(const History&)>;

  StakeFunction(std::string name, std::vector<Rational> params, Rule rule);

  const std::string& name() const noexcept { return name_; }
  const std::vector<Rational>& params() const noexcept { return params_; }
  /// "name(p1,p2,...)".
  std::string label() const;

  Rational operator()(const History& h) const;
  Rational operator()(const BitString& sigma) const;

 private:
  std::string name_;
  std::vector<Rational> params_;
  Rule rule_;
};

/// Registry kinds:
///   constant(s)            S = s
///   follow-majority(s)     +s if ones > zeros, -s if fewer, 0 on ties
///   anti-majority(s)       the negation of follow-majority
///   alternating(s)         +s after an even number of rounds, -s after an odd one
///   window-frequency(w,s)  s * (2 * freq(last w bits) - 1), 0 on the empty history
/// Throws DomainError for unknown names, wrong arity, |s| > 1 or w < 1.
StakeFunction make_stake(const std::string& name, const std::vector<Rational>& params);
std::vector<std::string> registered_stake_kinds();

/// The eight strategies used wherever "each registered stake function" is swept.
std::vector<StakeFunction> default_battery();

/// One round of the recurrence. Exact; throws DomainError if bias is not in (0,1),
/// |stake| > 1, capital < 0 or bit is not 0/1.
Rational martingale_step(const Rational& capital, const Rational& stake, const Rational& bias, int bit);

struct MartingaleTrace {
  Rational bias;
  BitString history;
  std::vector<Rational> stakes;    // stakes[k] = S(history restricted to k), one per round
  std::vector<Rational> capitals;  // capitals[k] = M(history restricted to k), capitals[0] = 1
};

/// Folds martingale_step over sigma with stakes S(sigma restricted to k-1).
MartingaleTrace evaluate_martingale(const StakeFunction& S, const Rational& bias, const BitString& sigma);

/// M^bias(sigma) without keeping the trace.
Rational martingale_value(const StakeFunction& S, const Rational& bias, std::span<const std::uint8_t> sigma);
inline Rational martingale_value(const StakeFunction& S, const Rational& bias, const BitString& sigma) {
  return martingale_value(S, bias, sigma.raw());
}

/// Final and maximal capital over a run, without storing every capital.
struct CapitalSummary {
  Rational final_capital;
  Rational max_capital;
  std::size_t argmax = 0;  // round at which max_capital was first reached
};
CapitalSummary summarize_martingale(const StakeFunction& S, const Rational& bias, std::span<const std::uint8_t> sigma);

/// bias * M(sigma 1) + (1 - bias) * M(sigma 0) == M(sigma), exactly.
bool check_fairness(const StakeFunction& S, const Rational& bias, const BitString& sigma);

/// Default number of alpha bits in the classical strategy's bias surrogate.
inline constexpr std::size_t kDefaultBiasPrecision = 16;

/// The alpha-aware strategy: stake +1 if the next Q bit is 1, -1 otherwise,
/// priced with bias 0.alpha_1...alpha_w. Capital strictly increases each round.
MartingaleTrace classical_oracle_martingale(BitSource& alpha, const BitString& q, std::size_t horizon,
                                            std::size_t precision = kDefaultBiasPrecision);
/// Same strategy with an explicit bias surrogate.
MartingaleTrace classical_oracle_martingale(const Rational& bias, const BitString& q, std::size_t horizon);

/// CSV: step,bit,stake_num,stake_den,capital_num,capital_den,log2_capital
void write_trace_csv(std::ostream& out, const MartingaleTrace& trace);

}  // namespace hippo
