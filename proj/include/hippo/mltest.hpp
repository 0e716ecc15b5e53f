#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hippo/bit_source.hpp"
#include "hippo/core.hpp"
#include "hippo/martingale.hpp"

namespace hippo {

// Executable counterparts of the Martin-Löf test built from a stake function,
// and of the four quantitative lemmas behind it. Everything is exact; e^2 and
// e^s enter only through rational lower enclosures, so every pass here is also
// a pass of the real-valued inequality.

/// s = least integer with 2^s > 1 + 1/eps; r = s + 1 + ceil(2 log2(1/eps)).
struct ContinuityExponent {
  long s = 0;
  long r = 0;
};
ContinuityExponent continuity_exponent(const Rational& eps);

/// Everything the continuity and Kolmogorov checks need to know about alpha.
struct ContinuityCertificate {
  Rational epsilon;
  long s = 0;
  long r = 0;
  std::size_t m = 0;
  BitString rho;  // alpha restricted to m'
};

/// |M^alpha(sigma) - M^beta(sigma)| < 2^(-k + r|sigma|).
/// Preconditions (PreconditionError names the failing clause):
///   "eps < alpha < beta < 1 - eps", "0 < beta - alpha < 2^-k",
///   "2^-k eps^-2 < 1", "sigma non-empty".
bool verify_continuity(const StakeFunction& S, const Rational& alpha, const Rational& beta, const BitString& sigma,
                       long k, const Rational& eps, const ContinuityExponent& exponent);

struct FindMResult {
  std::optional<ContinuityCertificate> certificate;
  std::size_t horizon = 0;
  /// The conditions are only checked for n <= horizon; the true m quantifies over all n.
  bool verified_only_to_horizon = true;
};

/// Least m <= horizon such that every n in [m, horizon] satisfies
///   eps < 0.alpha|n' and 0.alpha|n' + 2^-n' < 1 - eps,
///   r(n+1) - n' < -n,  2^-n' eps^-2 < 1,  2^-n < 0.alpha|n'.
FindMResult find_m(BitSource& alpha, const Rational& eps, std::size_t horizon);

/// A set of strings at triangular lengths, none a proper prefix of another.
class PrefixFreeFamily {
 public:
  PrefixFreeFamily() = default;
  /// Throws InvariantError on a non-triangular length or a prefix pair.
  explicit PrefixFreeFamily(std::vector<BitString> members);

  const std::vector<BitString>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }

 private:
  std::vector<BitString> members_;  // sorted
};

bool is_triangular(std::size_t length) noexcept;

/// Minimal antichain of strings X (rho <= X, |X| = k' <= k_max') whose own-value
/// martingale on Gamma(X) exceeds 2^j. Strings with 0.X = 0 never qualify.
PrefixFreeFamily enumerate_test_level(const StakeFunction& S, const BitString& rho, long j, std::size_t k_max,
                                      std::uint64_t node_budget = std::uint64_t{1} << 22);

/// sum over members of 2^-|tau|.
Rational measure_of_family(const PrefixFreeFamily& Z);

/// rho with |rho| = m' and 2^-m < 0.rho. Throws InvariantError otherwise.
struct TestRoot {
  BitString rho;
  std::size_t m = 0;

  static TestRoot make(BitString rho, std::size_t m);
  /// "010", m = 3: the smallest root used for desk-scale sweeps.
  static TestRoot desk_default();
};

/// M^{0.x}(Gamma(x)).
Rational own_value_capital(const StakeFunction& S, const BitString& x);

struct KolmogorovReport {
  Rational lhs;  // sum 2^-|tau| M^tau(Gamma(tau))
  Rational rhs;  // 2^-|sigma| * e2_lower * (1 + M^sigma(Gamma(sigma)))
  bool pass = false;
};

/// Preconditions: "rho <= sigma", "|sigma| = n' with n >= m", "members extend sigma".
KolmogorovReport verify_kolmogorov_bound(const StakeFunction& S, const BitString& sigma, const PrefixFreeFamily& Z,
                                         const TestRoot& root);

/// 2^-|rho| e2_lower (1 + M^rho(Gamma(rho))) / 2^j.
Rational test_level_bound(const StakeFunction& S, const BitString& rho, long j);

struct ProductBound {
  Rational partial_product;   // prod_{n=1}^{N} (1 + s 2^-n)
  Rational enclosure_lower;   // series lower endpoint for e^s
  bool bound_ok = false;      // partial_product < enclosure_lower
};
ProductBound product_bound_check(const Rational& s, std::size_t N);

/// Random prefix-free family of extensions of sigma with members at triangular
/// levels up to k_max. Each expanded node keeps at most `fanout` children.
PrefixFreeFamily sample_prefix_free_family(std::mt19937_64& rng, const BitString& sigma, std::size_t k_max,
                                           std::size_t fanout = 4);

/// max over prefix-free families Z of extensions of sigma (levels <= k_max) of
/// sum 2^-|tau| M^tau(Gamma(tau)), found by the subtree recursion
/// best(x) = max(own(x), sum best(children)).
Rational extremal_family_mass(const StakeFunction& S, const BitString& sigma, std::size_t k_max);

}  // namespace hippo
