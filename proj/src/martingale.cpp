#include "hippo/martingale.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "hippo/error.hpp"

namespace hippo {

StakeFunction::StakeFunction(std::string name, std::vector<Rational> params, Rule rule)
    : name_(std::move(name)), params_(std::move(params)), rule_(std::move(rule)) {}

std::string StakeFunction::label() const {
  std::ostringstream os;
  os << name_ << '(';
  for (std::size_t i = 0; i < params_.size(); ++i) os << (i ? "," : "") << to_string(params_[i]);
  os << ')';
  return os.str();
}

Rational StakeFunction::operator()(const History& h) const {
  Rational s = rule_(h);
  if (abs(s) > 1) throw DomainError("stake function " + label() + " returned |S| > 1");
  return s;
}

Rational StakeFunction::operator()(const BitString& sigma) const {
  return (*this)(History{sigma.raw(), sigma.count_ones()});
}

namespace {

void require_arity(const std::string& name, const std::vector<Rational>& params, std::size_t n) {
  if (params.size() != n)
    throw DomainError(name + " takes " + std::to_string(n) + " parameter(s), got " + std::to_string(params.size()));
}

Rational stake_param(const std::string& name, const Rational& s) {
  if (abs(s) > 1) throw DomainError(name + ": stake parameter must lie in [-1, 1]");
  return s;
}

int majority_sign(const History& h) {
  const std::size_t zeros = h.bits.size() - h.ones;
  return h.ones > zeros ? 1 : (h.ones < zeros ? -1 : 0);
}

}  // namespace

StakeFunction make_stake(const std::string& name, const std::vector<Rational>& params) {
  if (name == "constant") {
    require_arity(name, params, 1);
    Rational s = stake_param(name, params[0]);
    return {name, params, [s](const History&) { return s; }};
  }
  if (name == "follow-majority" || name == "anti-majority") {
    require_arity(name, params, 1);
    Rational s = stake_param(name, params[0]);
    const int flip = name == "anti-majority" ? -1 : 1;
    return {name, params, [s, flip](const History& h) { return Rational(s * (flip * majority_sign(h))); }};
  }
  if (name == "alternating") {
    require_arity(name, params, 1);
    Rational s = stake_param(name, params[0]);
    return {name, params, [s](const History& h) { return h.bits.size() % 2 == 0 ? s : Rational(-s); }};
  }
  if (name == "window-frequency") {
    require_arity(name, params, 2);
    if (params[0].get_den() != 1 || params[0] < 1) throw DomainError("window-frequency: window must be an integer >= 1");
    const std::size_t w = params[0].get_num().get_ui();
    Rational s = stake_param(name, params[1]);
    return {name, params, [w, s](const History& h) {
              const std::size_t n = std::min(w, h.bits.size());
              if (n == 0) return Rational(0);
              auto tail = h.bits.last(n);
              const auto ones = static_cast<long>(std::count(tail.begin(), tail.end(), std::uint8_t{1}));
              Rational f(ones, static_cast<long>(n));
              f.canonicalize();
              return Rational(s * (2 * f - 1));
            }};
  }
  throw DomainError("unknown stake function '" + name + "'");
}

std::vector<std::string> registered_stake_kinds() {
  return {"constant", "follow-majority", "anti-majority", "alternating", "window-frequency"};
}

std::vector<StakeFunction> default_battery() {
  return {
      make_stake("constant", {Rational(1, 4)}),
      make_stake("constant", {Rational(-1, 2)}),
      make_stake("constant", {Rational(1)}),
      make_stake("follow-majority", {Rational(1, 4)}),
      make_stake("anti-majority", {Rational(1, 4)}),
      make_stake("alternating", {Rational(1, 8)}),
      make_stake("window-frequency", {Rational(8), Rational(1, 2)}),
      make_stake("window-frequency", {Rational(32), Rational(1)}),
  };
}

Rational martingale_step(const Rational& capital, const Rational& stake, const Rational& bias, int bit) {
  if (sgn(bias) <= 0 || bias >= 1) throw DomainError("bias must lie in (0,1), got " + to_string(bias));
  if (abs(stake) > 1) throw DomainError("|stake| must be <= 1, got " + to_string(stake));
  if (sgn(capital) < 0) throw DomainError("capital must be non-negative");
  if (bit != 0 && bit != 1) throw DomainError("bit must be 0 or 1");
  const Rational a = abs(stake);
  Rational factor = 1 - a;
  if (bit == 1 && sgn(stake) >= 0) factor += a / bias;
  if (bit == 0 && sgn(stake) < 0) factor += a / (1 - bias);
  return capital * factor;
}

MartingaleTrace evaluate_martingale(const StakeFunction& S, const Rational& bias, const BitString& sigma) {
  MartingaleTrace t{bias, sigma, {}, {Rational(1)}};
  t.stakes.reserve(sigma.size());
  t.capitals.reserve(sigma.size() + 1);
  const auto bits = sigma.raw();
  std::size_t ones = 0;
  for (std::size_t k = 0; k < bits.size(); ++k) {
    Rational s = S(History{bits.first(k), ones});
    t.capitals.push_back(martingale_step(t.capitals.back(), s, bias, bits[k]));
    t.stakes.push_back(std::move(s));
    ones += bits[k];
  }
  return t;
}

Rational martingale_value(const StakeFunction& S, const Rational& bias, std::span<const std::uint8_t> sigma) {
  Rational capital = 1;
  std::size_t ones = 0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    capital = martingale_step(capital, S(History{sigma.first(k), ones}), bias, sigma[k]);
    ones += sigma[k];
  }
  return capital;
}

CapitalSummary summarize_martingale(const StakeFunction& S, const Rational& bias, std::span<const std::uint8_t> sigma) {
  CapitalSummary out{Rational(1), Rational(1), 0};
  std::size_t ones = 0;
  for (std::size_t k = 0; k < sigma.size(); ++k) {
    out.final_capital = martingale_step(out.final_capital, S(History{sigma.first(k), ones}), bias, sigma[k]);
    ones += sigma[k];
    if (out.final_capital > out.max_capital) {
      out.max_capital = out.final_capital;
      out.argmax = k + 1;
    }
    if (sgn(out.final_capital) == 0) break;  // ruined: capital stays 0
  }
  return out;
}

bool check_fairness(const StakeFunction& S, const Rational& bias, const BitString& sigma) {
  const Rational here = martingale_value(S, bias, sigma);
  const Rational one = martingale_value(S, bias, sigma.appended(1));
  const Rational zero = martingale_value(S, bias, sigma.appended(0));
  return bias * one + (1 - bias) * zero == here;
}

MartingaleTrace classical_oracle_martingale(const Rational& bias, const BitString& q, std::size_t horizon) {
  if (horizon > q.size()) throw DomainError("horizon exceeds |Q|");
  const BitString segment = q.prefix(horizon);
  MartingaleTrace t{bias, segment, {}, {Rational(1)}};
  for (std::size_t k = 1; k <= horizon; ++k) {
    const int b = segment.bit(k);
    Rational s = b == 1 ? Rational(1) : Rational(-1);
    t.capitals.push_back(martingale_step(t.capitals.back(), s, bias, b));
    t.stakes.push_back(std::move(s));
  }
  return t;
}

MartingaleTrace classical_oracle_martingale(BitSource& alpha, const BitString& q, std::size_t horizon,
                                            std::size_t precision) {
  return classical_oracle_martingale(bits_to_rational(alpha.prefix(precision)), q, horizon);
}

void write_trace_csv(std::ostream& out, const MartingaleTrace& trace) {
  out << "step,bit,stake_num,stake_den,capital_num,capital_den,log2_capital\n";
  for (std::size_t k = 0; k < trace.capitals.size(); ++k) {
    const Rational& c = trace.capitals[k];
    out << k << ',';
    if (k == 0) {
      out << ",,";
    } else {
      const Rational& s = trace.stakes[k - 1];
      out << trace.history.bit(k) << ',' << s.get_num() << ',' << s.get_den();
    }
    out << ',' << c.get_num() << ',' << c.get_den() << ',' << log2_approx(c) << '\n';
  }
}

}  // namespace hippo
