#include "hippo/kl.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "hippo/construction.hpp"
#include "hippo/error.hpp"

namespace hippo {

namespace {

std::optional<SelectionDecision> decide(SelectAction a, std::size_t pos) { return SelectionDecision{a, pos}; }

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Shared driver for plain selection runs and KL martingales. `on_read` sees
// each decision and its bit before V, T and U are extended.
template <class OnRead>
SelectionRun drive_selection(const SelectionFunction& f, BitSource& X, std::size_t budget, OnRead&& on_read) {
  SelectionRun run;
  run.selected_len.push_back(0);
  std::unordered_set<std::size_t> read;
  for (;;) {
    if (run.steps() >= budget) {
      run.halted = HaltReason::step_budget;
      break;
    }
    const auto d = f(SelectionState{run.seen, run.positions});
    if (!d) {
      run.halted = HaltReason::undefined_rule;
      break;
    }
    if (d->position == 0) throw SelectionViolation(f.name() + " produced position 0 on history '" + run.seen.str() + "'");
    if (!read.insert(d->position).second)
      throw SelectionViolation(f.name() + " re-read position " + std::to_string(d->position) + " on history '" +
                               run.seen.str() + "'");
    int bit = 0;
    try {
      bit = X.read_bits(d->position, 1).bit(1);
    } catch (const SourceExhausted&) {
      run.halted = HaltReason::source_exhausted;
      break;
    }
    on_read(*d, bit, run);
    run.seen.push_back(bit);
    run.positions.push_back(d->position);
    run.actions.push_back(d->action);
    if (d->action == SelectAction::select) run.selected.push_back(bit);
    run.selected_len.push_back(run.selected.size());
  }
  return run;
}

}  // namespace

SelectionFunction make_selector(const std::string& name) {
  if (name == "monotone")
    return {name, [](const SelectionState& s) { return decide(SelectAction::select, s.seen.size() + 1); }};
  if (name == "all-scan")
    return {name, [](const SelectionState& s) { return decide(SelectAction::scan, s.seen.size() + 1); }};
  if (name == "even-positions")
    return {name, [](const SelectionState& s) { return decide(SelectAction::select, 2 * (s.seen.size() + 1)); }};
  if (name == "after-one")
    return {name, [](const SelectionState& s) {
              const bool prev_one = !s.seen.empty() && s.seen.bit(s.seen.size()) == 1;
              return decide(prev_one ? SelectAction::select : SelectAction::scan, s.seen.size() + 1);
            }};
  if (name == "reverse-pairs")
    return {name, [](const SelectionState& s) {
              const std::size_t k = s.seen.size();
              const std::size_t pair = k / 2;
              if (k % 2 == 0) return decide(SelectAction::scan, 2 * pair + 2);
              const bool partner_zero = s.seen.bit(k) == 0;
              return decide(partner_zero ? SelectAction::select : SelectAction::scan, 2 * pair + 1);
            }};
  throw DomainError("unknown selector '" + name + "'");
}

std::vector<std::string> registered_selectors() {
  return {"monotone", "all-scan", "even-positions", "after-one", "reverse-pairs"};
}

SelectionFunction make_random_selector(std::uint64_t seed, std::size_t max_position) {
  return {"random(" + std::to_string(seed) + ")", [seed, max_position](const SelectionState& s) {
            const std::size_t done = s.positions.size();
            if (done >= max_position) return std::optional<SelectionDecision>{};
            std::uint64_t h = mix64(seed);
            for (auto b : s.seen.raw()) h = mix64(h ^ b);
            h = mix64(h ^ done);
            std::vector<std::size_t> taken(s.positions.begin(), s.positions.end());
            std::sort(taken.begin(), taken.end());
            std::size_t r = h % (max_position - done);
            // r-th unread position in [1, max_position]
            std::size_t pos = r + 1;
            for (auto t : taken) {
              if (t <= pos) ++pos;
              else break;
            }
            const auto action = ((h >> 32) & 1u) ? SelectAction::select : SelectAction::scan;
            return decide(action, pos);
          }};
}

SelectionFunction make_threshold_selector(const GeneralizedBernoulliMeasure& lambda, const Rational& threshold,
                                          std::size_t horizon) {
  std::vector<std::size_t> picks;
  for (std::size_t k = 1; k <= horizon; ++k)
    if (lambda.bias(k) >= threshold) picks.push_back(k);
  return {"threshold(" + to_string(threshold) + ")", [picks = std::move(picks)](const SelectionState& s) {
            const std::size_t done = s.positions.size();
            if (done >= picks.size()) return std::optional<SelectionDecision>{};
            return decide(SelectAction::select, picks[done]);
          }};
}

std::string to_string(HaltReason r) {
  switch (r) {
    case HaltReason::undefined_rule: return "undefined-rule";
    case HaltReason::step_budget: return "step-budget";
    case HaltReason::source_exhausted: return "source-exhausted";
  }
  return "unknown";
}

SelectionRun run_selection(const SelectionFunction& f, BitSource& X, std::size_t step_budget) {
  return drive_selection(f, X, step_budget, [](const SelectionDecision&, int, const SelectionRun&) {});
}

SelectionRun run_selection(const SelectionFunction& f, const BitString& X, std::size_t step_budget) {
  BitSource src = BitSource::from_string(X);
  return run_selection(f, src, step_budget);
}

Rational frequency(const BitString& sigma) {
  if (sigma.empty()) throw DomainError("frequency of the empty string is undefined");
  Rational f(static_cast<long>(sigma.count_ones()), static_cast<long>(sigma.size()));
  f.canonicalize();
  return f;
}

StochasticityReport stochasticity_report(const SelectionRun& run, const Rational& p, std::size_t tail_window) {
  const BitString& u = run.selected;
  if (tail_window < 1 || u.size() < tail_window)
    throw InsufficientSelection("selected " + std::to_string(u.size()) + " bits, tail window " +
                                std::to_string(tail_window));
  StochasticityReport rep;
  rep.phi.reserve(u.size());
  long ones = 0;
  for (std::size_t j = 1; j <= u.size(); ++j) {
    ones += u.bit(j);
    Rational phi(ones, static_cast<long>(j));
    phi.canonicalize();
    rep.deviation.push_back(abs(phi - p));
    rep.phi.push_back(std::move(phi));
  }
  rep.tail_max_deviation = 0;
  for (std::size_t j = u.size() - tail_window; j < u.size(); ++j)
    if (rep.deviation[j] > rep.tail_max_deviation) rep.tail_max_deviation = rep.deviation[j];
  return rep;
}

namespace {
void require_open_unit(const Rational& b) {
  if (sgn(b) <= 0 || b >= 1) throw DomainError("bias must lie in (0,1), got " + to_string(b));
}
}  // namespace

GeneralizedBernoulliMeasure GeneralizedBernoulliMeasure::constant(const Rational& p) {
  require_open_unit(p);
  return GeneralizedBernoulliMeasure(Constant{p});
}

GeneralizedBernoulliMeasure GeneralizedBernoulliMeasure::slow_drift(const Rational& p, const Rational& c) {
  require_open_unit(p);
  if (sgn(c) < 0) throw DomainError("slow-drift coefficient must be >= 0");
  return GeneralizedBernoulliMeasure(Drift{p, c});
}

GeneralizedBernoulliMeasure GeneralizedBernoulliMeasure::explicit_list(std::vector<Rational> biases) {
  for (const auto& b : biases) require_open_unit(b);
  return GeneralizedBernoulliMeasure(List{std::move(biases)});
}

Rational GeneralizedBernoulliMeasure::bias(std::size_t i) const {
  if (i == 0) throw DomainError("bias indices are 1-based");
  if (const auto* c = std::get_if<Constant>(&kind_)) return c->p;
  if (const auto* d = std::get_if<Drift>(&kind_)) return slow_scheme_value(d->p, d->c, i);
  const auto& list = std::get<List>(kind_).b;
  if (i > list.size()) throw DomainError("explicit measure has no bias for position " + std::to_string(i));
  return list[i - 1];
}

std::string GeneralizedBernoulliMeasure::describe() const {
  if (const auto* c = std::get_if<Constant>(&kind_)) return "constant(" + to_string(c->p) + ")";
  if (const auto* d = std::get_if<Drift>(&kind_)) return "slow-drift(" + to_string(d->p) + "," + to_string(d->c) + ")";
  return "explicit(" + std::to_string(std::get<List>(kind_).b.size()) + ")";
}

Rational lambda_measure(const GeneralizedBernoulliMeasure& lambda, const BitString& w) {
  Rational m = 1;
  for (std::size_t i = 1; i <= w.size(); ++i) {
    const Rational b = lambda.bias(i);
    m *= w.bit(i) == 1 ? b : Rational(1 - b);
  }
  return m;
}

BitString sample_generalized_bernoulli(const GeneralizedBernoulliMeasure& lambda, BitSource& fresh,
                                       std::size_t precision, std::size_t n) {
  if (precision == 0) throw DomainError("precision must be >= 1");
  BitString out;
  for (std::size_t i = 1; i <= n; ++i) {
    const Rational u = bits_to_rational(fresh.next(precision));
    out.push_back(u < lambda.bias(i) ? 1 : 0);
  }
  return out;
}

BetRule never_bet() {
  return [](const BetContext& c) { return BetOutcome{c.capital, c.capital}; };
}

KlTrace run_kl_martingale(const SelectionFunction& f, const BetRule& bet, const GeneralizedBernoulliMeasure& lambda,
                          BitSource& X, std::size_t budget, bool keep_capitals) {
  KlTrace trace;
  Rational capital = trace.initial_capital;
  auto on_read = [&](const SelectionDecision& d, int bit, const SelectionRun& run) {
    if (d.action == SelectAction::select) {
      const Rational b = lambda.bias(d.position);
      const BetOutcome out = bet(BetContext{run.selected, d.position, b, capital});
      if (b * out.if_one + (1 - b) * out.if_zero != capital)
        throw FairnessViolation("bet rule broke fairness at position " + std::to_string(d.position) +
                                " after selecting '" + run.selected.str() + "'");
      ++trace.fairness_checks;
      capital = bit == 1 ? out.if_one : out.if_zero;
    }
    trace.steps.push_back(KlStep{d.action, d.position, bit,
                                 run.selected.size() + (d.action == SelectAction::select ? 1u : 0u)});
    if (keep_capitals) trace.capitals.push_back(capital);
  };
  trace.run = drive_selection(f, X, budget, on_read);
  trace.final_capital = capital;
  return trace;
}

KlTrace run_kl_martingale(const SelectionFunction& f, const BetRule& bet, const GeneralizedBernoulliMeasure& lambda,
                          const BitString& X, std::size_t budget, bool keep_capitals) {
  BitSource src = BitSource::from_string(X);
  return run_kl_martingale(f, bet, lambda, src, budget, keep_capitals);
}

void write_kl_csv(std::ostream& out, const KlTrace& trace) {
  out << "step,action,position,bit,selected_len,phi_num,phi_den,capital_num,capital_den\n";
  long ones = 0;
  for (std::size_t k = 0; k < trace.steps.size(); ++k) {
    const KlStep& s = trace.steps[k];
    if (s.action == SelectAction::select) ones += s.bit;
    out << k + 1 << ',' << (s.action == SelectAction::select ? "select" : "scan") << ',' << s.position << ','
        << s.bit << ',' << s.selected_len << ',';
    if (s.selected_len == 0) {
      out << ",";
    } else {
      Rational phi(ones, static_cast<long>(s.selected_len));
      phi.canonicalize();
      out << phi.get_num() << ',' << phi.get_den();
    }
    out << ',';
    if (k < trace.capitals.size()) out << trace.capitals[k].get_num() << ',' << trace.capitals[k].get_den();
    else out << ',';
    out << '\n';
  }
}

StrategyParameters choose_strategy_params(const Rational& p, const Rational& tau) {
  if (sgn(p) <= 0) throw PreconditionError("0 < p");
  if (sgn(tau) <= 0) throw PreconditionError("0 < tau");
  if (p + 2 * tau >= 1) throw PreconditionError("p + 2 tau < 1");
  StrategyParameters sp;
  sp.p = p;
  sp.tau = tau;
  sp.gamma = (p + 2 * tau) / (p + tau) - 1;
  const Rational q = 1 - p - tau;
  const Rational ratio_sq = (q * q) / ((p + tau) * (p + tau));
  const Rational half_gamma = 1 + sp.gamma / 2;
  for (long i = 1; i <= 64; ++i) {
    const Rational delta = pow2(-i);
    if (delta * ratio_sq > tau) continue;
    // log2(1-delta) = ln(1-delta)/ln 2 (negative), compared with -(delta/ln 2)(1 + gamma/2).
    const Rational c = delta * half_gamma;
    bool accepted = false;
    for (int terms = 8, depth = 0; depth <= 8; ++depth, terms *= 2) {
      const Interval ln1 = ln_enclosure(1 - delta, terms);
      const Interval ln2 = ln2_enclosure(terms);
      const Interval lhs{ln1.lo / ln2.lo, ln1.hi / ln2.hi};
      const Interval rhs{-c / ln2.lo, -c / ln2.hi};
      if (lhs.lo > rhs.hi) {
        accepted = true;
        break;
      }
      if (lhs.hi <= rhs.lo) break;  // conclusively fails
    }
    if (!accepted) continue;
    sp.delta = delta;
    return sp;
  }
  throw NoDeltaFound("no delta = 2^-i with i <= 64 satisfies both conditions");
}

BetRule lemma34_strategy(const StrategyParameters& params) {
  const Rational cap = params.p + params.tau;
  const Rational delta = params.delta;
  return [cap, delta](const BetContext& c) {
    if (c.bias >= cap)
      throw BiasTooLarge("bias " + to_string(c.bias) + " at position " + std::to_string(c.position) +
                         " is not below p + tau = " + to_string(cap));
    return BetOutcome{c.capital * (1 - delta + delta / c.bias), c.capital * (1 - delta)};
  };
}

Rational growth_lower_bound(const StrategyParameters& params) {
  return params.delta * params.gamma * (1 - params.p - params.tau) / (2 * kLn2Upper);
}

BitString frequency_witness(const Rational& f, std::size_t n) {
  if (sgn(f) < 0 || f > 1) throw DomainError("frequency must lie in [0,1]");
  BitString out;
  Integer prev = 0;
  for (std::size_t i = 1; i <= n; ++i) {
    Rational x = f * static_cast<long>(i);
    Integer fl;
    mpz_fdiv_q(fl.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    out.push_back(fl == prev ? 0 : 1);
    prev = fl;
  }
  return out;
}

GrowthCheck check_growth(const Rational& capital, std::size_t steps, const Rational& lower, const Rational& upper) {
  if (steps == 0) throw DomainError("growth needs at least one step");
  GrowthCheck g;
  if (sgn(capital) <= 0) {
    g.ruined = true;
    g.at_most_upper = true;
    return g;
  }
  const Rational n(static_cast<long>(steps));
  for (int terms = 8, depth = 0; depth <= 8; ++depth, terms *= 2) {
    Interval iv = log2_enclosure(capital, terms);
    g.log2_per_bit = {iv.lo / n, iv.hi / n};
    g.at_least_lower = g.log2_per_bit.lo >= lower;
    g.at_most_upper = g.log2_per_bit.hi <= upper;
    const bool lower_settled = g.at_least_lower || g.log2_per_bit.hi < lower;
    const bool upper_settled = g.at_most_upper || g.log2_per_bit.lo > upper;
    if (lower_settled && upper_settled) break;
  }
  return g;
}

}  // namespace hippo
