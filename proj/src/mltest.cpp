#include "hippo/mltest.hpp"

#include <algorithm>

#include "hippo/construction.hpp"
#include "hippo/enclosure.hpp"
#include "hippo/error.hpp"
#include "hippo/kernels.hpp"

namespace hippo {

namespace {

void require_eps(const Rational& eps) {
  if (sgn(eps) <= 0 || eps >= Rational(1, 2)) throw DomainError("epsilon must lie in (0, 1/2), got " + to_string(eps));
}

void require(bool ok, const char* clause) {
  if (!ok) throw PreconditionError(clause);
}

BitString with_block(const BitString& x, std::uint64_t theta, std::size_t width) {
  BitString child = x;
  for (std::size_t b = width; b-- > 0;) child.push_back(static_cast<int>((theta >> b) & 1u));
  return child;
}

}  // namespace

ContinuityExponent continuity_exponent(const Rational& eps) {
  require_eps(eps);
  const Rational target = 1 + 1 / eps;
  ContinuityExponent e;
  e.s = 1;
  while (pow2(e.s) <= target) ++e.s;
  const Rational inv_sq = 1 / (eps * eps);
  e.r = e.s + 1 + ceil_log2(inv_sq);
  return e;
}

bool verify_continuity(const StakeFunction& S, const Rational& alpha, const Rational& beta, const BitString& sigma,
                       long k, const Rational& eps, const ContinuityExponent& exponent) {
  require(eps < alpha && alpha < beta && beta < 1 - eps, "eps < alpha < beta < 1 - eps");
  const Rational width = pow2(-k);
  require(sgn(beta - alpha) > 0 && beta - alpha < width, "0 < beta - alpha < 2^-k");
  require(width / (eps * eps) < 1, "2^-k eps^-2 < 1");
  require(!sigma.empty(), "sigma non-empty");
  const Rational diff = abs(martingale_value(S, alpha, sigma) - martingale_value(S, beta, sigma));
  return diff < pow2(-k + exponent.r * static_cast<long>(sigma.size()));
}

FindMResult find_m(BitSource& alpha, const Rational& eps, std::size_t horizon) {
  require_eps(eps);
  const ContinuityExponent e = continuity_exponent(eps);
  FindMResult result;
  result.horizon = horizon;
  const BitString prefix = alpha.prefix(triangular(horizon));
  const Rational eps_sq = eps * eps;

  auto holds = [&](std::size_t n) {
    const long np = static_cast<long>(triangular(n));
    const Rational v = bits_to_rational(prefix.raw().first(static_cast<std::size_t>(np)));
    const bool a = eps < v && v + pow2(-np) < 1 - eps;
    const bool b = e.r * static_cast<long>(n + 1) - np < -static_cast<long>(n);
    const bool c = eps_sq * pow2(np) > 1;
    const bool d = pow2(-static_cast<long>(n)) < v;
    return a && b && c && d;
  };

  std::size_t m = horizon + 1;
  for (std::size_t n = horizon; n >= 1 && holds(n); --n) m = n;
  if (m <= horizon) {
    result.certificate =
        ContinuityCertificate{eps, e.s, e.r, m, prefix.prefix(triangular(m))};
  }
  return result;
}

bool is_triangular(std::size_t length) noexcept {
  std::size_t k = 1;
  while (triangular(k) < length) ++k;
  return triangular(k) == length;
}

PrefixFreeFamily::PrefixFreeFamily(std::vector<BitString> members) : members_(std::move(members)) {
  for (const auto& m : members_)
    if (!is_triangular(m.size()))
      throw InvariantError("family member '" + m.str() + "' does not have triangular length");
  std::sort(members_.begin(), members_.end());
  // After sorting, any prefix pair shows up as adjacent entries.
  for (std::size_t i = 1; i < members_.size(); ++i)
    if (members_[i - 1].is_prefix_of(members_[i]))
      throw InvariantError("family is not prefix-free: '" + members_[i - 1].str() + "' prefixes '" +
                           members_[i].str() + "'");
}

PrefixFreeFamily enumerate_test_level(const StakeFunction& S, const BitString& rho, long j, std::size_t k_max,
                                      std::uint64_t node_budget) {
  if (j < 0) throw DomainError("test level j must be >= 0");
  if (!is_triangular(rho.size())) throw DomainError("|rho| must be a triangular number");
  return PrefixFreeFamily(kernels::enumerate_test_level(TestLevelQuery{&S, rho, j, k_max, node_budget}));
}

Rational measure_of_family(const PrefixFreeFamily& Z) {
  Rational total = 0;
  for (const auto& tau : Z.members()) total += pow2(-static_cast<long>(tau.size()));
  return total;
}

TestRoot TestRoot::make(BitString rho, std::size_t m) {
  if (rho.size() != triangular(m)) throw InvariantError("root length must equal m'");
  if (!(pow2(-static_cast<long>(m)) < bits_to_rational(rho))) throw InvariantError("root needs 2^-m < 0.rho");
  return TestRoot{std::move(rho), m};
}

TestRoot TestRoot::desk_default() { return make(BitString("010"), 3); }

Rational own_value_capital(const StakeFunction& S, const BitString& x) {
  return martingale_value(S, bits_to_rational(x), gamma(x));
}

KolmogorovReport verify_kolmogorov_bound(const StakeFunction& S, const BitString& sigma, const PrefixFreeFamily& Z,
                                         const TestRoot& root) {
  require(root.rho.is_prefix_of(sigma), "rho <= sigma");
  require(is_triangular(sigma.size()) && triangular_level(sigma.size()) >= root.m, "|sigma| = n' with n >= m");
  for (const auto& tau : Z.members()) require(sigma.is_prefix_of(tau), "members extend sigma");

  KolmogorovReport rep;
  rep.lhs = 0;
  for (const auto& tau : Z.members()) rep.lhs += pow2(-static_cast<long>(tau.size())) * own_value_capital(S, tau);
  rep.rhs = pow2(-static_cast<long>(sigma.size())) * kE2Lower * (1 + own_value_capital(S, sigma));
  rep.pass = rep.lhs <= rep.rhs;
  return rep;
}

Rational test_level_bound(const StakeFunction& S, const BitString& rho, long j) {
  if (rho.count_ones() == 0) throw DomainError("rho must have positive value");
  return pow2(-static_cast<long>(rho.size())) * kE2Lower * (1 + own_value_capital(S, rho)) / pow2(j);
}

ProductBound product_bound_check(const Rational& s, std::size_t N) {
  if (sgn(s) <= 0) throw DomainError("product bound needs s > 0");
  if (N < 1) throw DomainError("product bound needs N >= 1");
  ProductBound out;
  out.partial_product = 1;
  for (std::size_t n = 1; n <= N; ++n) out.partial_product *= 1 + s * pow2(-static_cast<long>(n));
  out.enclosure_lower = exp_enclosure(s, 40).lo;
  out.bound_ok = out.partial_product < out.enclosure_lower;
  return out;
}

PrefixFreeFamily sample_prefix_free_family(std::mt19937_64& rng, const BitString& sigma, std::size_t k_max,
                                           std::size_t fanout) {
  std::vector<BitString> members;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  auto visit = [&](auto&& self, const BitString& x, std::size_t k) -> void {
    const double u = coin(rng);
    if (k >= k_max) {
      if (u < 0.5) members.push_back(x);
      return;
    }
    if (u < 0.2) {
      members.push_back(x);
      return;
    }
    if (u < 0.3) return;
    const std::uint64_t children = std::uint64_t{1} << k;
    std::vector<std::uint64_t> picks;
    std::uniform_int_distribution<std::uint64_t> pick(0, children - 1);
    const std::size_t want = std::min<std::uint64_t>(fanout, children);
    while (picks.size() < want) {
      const std::uint64_t t = pick(rng);
      if (std::find(picks.begin(), picks.end(), t) == picks.end()) picks.push_back(t);
    }
    for (auto t : picks) self(self, with_block(x, t, k), k + 1);
  };
  visit(visit, sigma, triangular_level(sigma.size()));
  return PrefixFreeFamily(std::move(members));
}

Rational extremal_family_mass(const StakeFunction& S, const BitString& sigma, std::size_t k_max) {
  auto best = [&](auto&& self, const BitString& x, std::size_t k) -> Rational {
    Rational own = pow2(-static_cast<long>(x.size())) * own_value_capital(S, x);
    if (k >= k_max) return own;
    Rational below = 0;
    const std::uint64_t children = std::uint64_t{1} << k;
    for (std::uint64_t t = 0; t < children; ++t) below += self(self, with_block(x, t, k), k + 1);
    return own > below ? own : below;
  };
  return best(best, sigma, triangular_level(sigma.size()));
}

}  // namespace hippo
