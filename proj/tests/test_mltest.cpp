#include <doctest.h>

#include <algorithm>

#include "hippo/construction.hpp"
#include "hippo/enclosure.hpp"
#include "hippo/error.hpp"
#include "hippo/kernels.hpp"
#include "hippo/mltest.hpp"
#include "oracles.hpp"

using namespace hippo;

namespace {

Rational own_capital_oracle(const StakeFunction& S, const std::string& x) {
  const std::string q = oracle::q_thm1(x, oracle::gamma_len(x.size()));
  std::vector<Rational> stakes;
  for (std::size_t k = 0; k < q.size(); ++k) stakes.push_back(S(BitString(q.substr(0, k))));
  return oracle::capital(stakes, oracle::value(x), q);
}

// Every qualifying extension of rho at a triangular length <= k_max', minus
// those with a qualifying proper prefix.
std::vector<std::string> brute_test_level(const StakeFunction& S, const std::string& rho, long j, std::size_t k_max) {
  const Rational threshold = pow2(j);
  auto qualifies = [&](const std::string& x) {
    return oracle::value(x) > 0 && own_capital_oracle(S, x) > threshold;
  };
  std::vector<std::size_t> lengths;
  for (std::size_t k = 1; k <= k_max; ++k)
    if (oracle::tri(k) >= rho.size() && (lengths.empty() || lengths.back() != oracle::tri(k)))
      lengths.push_back(oracle::tri(k));
  std::vector<std::string> out;
  for (std::size_t L : lengths)
    for (const auto& tail : oracle::all_strings(L - rho.size())) {
      const std::string x = rho + tail;
      if (!qualifies(x)) continue;
      bool minimal = true;
      for (std::size_t L2 : lengths)
        if (L2 < L && qualifies(x.substr(0, L2))) minimal = false;
      if (minimal) out.push_back(x);
    }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> strs(const PrefixFreeFamily& Z) {
  std::vector<std::string> out;
  for (const auto& m : Z.members()) out.push_back(m.str());
  return out;
}

}  // namespace

TEST_CASE("continuity exponent") {
  CHECK(continuity_exponent(Rational(1, 4)).s == 3);
  CHECK(continuity_exponent(Rational(1, 4)).r == 8);
  CHECK(continuity_exponent(Rational(1, 8)).s == 4);
  CHECK(continuity_exponent(Rational(1, 8)).r == 11);
  // 2^2 = 4 is not > 1 + 3, so s = 3 here.
  CHECK(continuity_exponent(Rational(1, 3)).s == 3);
  CHECK(continuity_exponent(Rational(1, 3)).r == 8);
  CHECK_THROWS_AS(continuity_exponent(Rational(1, 2)), DomainError);
  CHECK_THROWS_AS(continuity_exponent(Rational(0)), DomainError);
}

TEST_CASE("verify_continuity") {
  const Rational eps(1, 8);
  const auto ex = continuity_exponent(eps);
  const auto zero = make_stake("constant", {Rational(0)});
  const auto one = make_stake("constant", {Rational(1)});
  // k = 7 is the least k with 2^-k eps^-2 < 1
  const Rational a(1, 4), b = a + Rational(1, 256);
  CHECK(verify_continuity(zero, a, b, BitString("0110"), 7, eps, ex));
  CHECK(verify_continuity(one, a, b, BitString("1"), 7, eps, ex));

  auto clause = [&](const Rational& al, const Rational& be, const BitString& s, long k) {
    try {
      verify_continuity(one, al, be, s, k, eps, ex);
    } catch (const PreconditionError& e) {
      return e.clause();
    }
    return std::string("none");
  };
  CHECK(clause(Rational(1, 16), b, BitString("1"), 7) == "eps < alpha < beta < 1 - eps");
  CHECK(clause(a, b, BitString("1"), 7) == "none");
  CHECK(clause(a, a + Rational(1, 128), BitString("1"), 7) == "0 < beta - alpha < 2^-k");
  CHECK(clause(a, b, BitString("1"), 6) == "2^-k eps^-2 < 1");
  CHECK(clause(a, b, BitString(""), 7) == "sigma non-empty");
}

TEST_CASE("continuity holds exhaustively on short histories") {
  const Rational eps(1, 8);
  const auto ex = continuity_exponent(eps);
  std::mt19937_64 rng(8);
  for (const auto& S : default_battery())
    for (int t = 0; t < 6; ++t) {
      const long k = 7 + static_cast<long>(rng() % 8);
      const Rational alpha = eps + (1 - 2 * eps) * oracle::random_unit(rng) * Rational(1, 2);
      const Rational beta = alpha + pow2(-k) * oracle::random_unit(rng);
      for (std::size_t len = 1; len <= 5; ++len)
        for (const auto& s : oracle::all_strings(len)) CHECK(verify_continuity(S, alpha, beta, BitString(s), k, eps, ex));
    }
}

TEST_CASE("find_m on 0111...") {
  std::string a = "0" + std::string(triangular(64) + 10, '1');
  auto src = BitSource::from_string(BitString(a));
  const auto r = find_m(src, Rational(1, 8), 64);
  REQUIRE(r.certificate.has_value());
  CHECK(r.certificate->m == 26);
  CHECK(r.certificate->r == 11);
  CHECK(r.certificate->rho.size() == triangular(26));
  CHECK(r.verified_only_to_horizon);
  // The binding condition is r(n+1) - n' < -n, i.e. n^2 - 25n - 22 > 0.
  for (long n = 1; n <= 64; ++n) CHECK((11 * (n + 1) - n * (n - 1) / 2 < -n) == (n >= 26));
}

TEST_CASE("find_m failure and domain") {
  auto zeros = BitSource::from_string(BitString(std::string(triangular(20), '0')));
  CHECK_FALSE(find_m(zeros, Rational(1, 8), 19).certificate.has_value());
  auto seeded = BitSource::from_seed(1);
  CHECK_THROWS_AS(find_m(seeded, Rational(1, 2), 10), DomainError);
  auto short_src = BitSource::from_string(BitString("0101"));
  CHECK_THROWS_AS(find_m(short_src, Rational(1, 8), 10), SourceExhausted);
}

TEST_CASE("prefix-free families") {
  CHECK(measure_of_family(PrefixFreeFamily{}) == 0);
  CHECK(measure_of_family(PrefixFreeFamily({BitString("1"), BitString("010")})) == Rational(5, 8));
  // length 1 is triangular (2' = 1), so these two are a valid family
  CHECK(measure_of_family(PrefixFreeFamily({BitString("0"), BitString("1")})) == 1);
  CHECK_THROWS_AS(PrefixFreeFamily({BitString("01")}), InvariantError);
  CHECK_THROWS_AS(PrefixFreeFamily({BitString("0"), BitString("010")}), InvariantError);
  CHECK_THROWS_AS(PrefixFreeFamily({BitString("010"), BitString("1"), BitString("0101100")}), InvariantError);
  CHECK(is_triangular(0));
  CHECK(is_triangular(1));
  CHECK(is_triangular(10));
  CHECK_FALSE(is_triangular(2));
  CHECK_FALSE(is_triangular(7));
}

TEST_CASE("enumerate_test_level examples") {
  const auto zero = make_stake("constant", {Rational(0)});
  CHECK(enumerate_test_level(zero, BitString(""), 0, 4).empty());
  CHECK_THROWS_AS(enumerate_test_level(zero, BitString(""), -1, 4), DomainError);
  CHECK_THROWS_AS(enumerate_test_level(zero, BitString("01"), 0, 4), DomainError);
  const auto one = make_stake("constant", {Rational(1)});
  const auto got = enumerate_test_level(one, BitString("0"), 1, 5);
  CHECK(strs(got) == brute_test_level(one, "0", 1, 5));
}

TEST_CASE("enumerate_test_level matches brute force for the battery") {
  for (const auto& S : default_battery())
    for (long j = 0; j <= 2; ++j) {
      CHECK(strs(enumerate_test_level(S, BitString("010"), j, 5)) == brute_test_level(S, "010", j, 5));
      CHECK(strs(enumerate_test_level(S, BitString("1"), j, 4)) == brute_test_level(S, "1", j, 4));
    }
}

TEST_CASE("test-level kernel agrees with reference and respects the budget") {
  for (const auto& S : default_battery()) {
    const TestLevelQuery q{&S, BitString("010"), 0, 6};
    CHECK(kernels::enumerate_test_level(q) == reference::enumerate_test_level(q));
  }
  const auto S = make_stake("constant", {Rational(0)});
  CHECK_THROWS_AS(enumerate_test_level(S, BitString("010"), 0, 7, 100), SizeLimitError);
}

TEST_CASE("test roots") {
  const auto root = TestRoot::desk_default();
  CHECK(root.rho.str() == "010");
  CHECK(root.m == 3);
  CHECK_THROWS_AS(TestRoot::make(BitString("000"), 3), InvariantError);
  CHECK_THROWS_AS(TestRoot::make(BitString("01"), 3), InvariantError);
}

TEST_CASE("kolmogorov bound") {
  const auto root = TestRoot::desk_default();
  const auto zero = make_stake("constant", {Rational(0)});
  const auto S = make_stake("follow-majority", {Rational(1, 4)});
  const BitString sigma("010");
  const auto empty = verify_kolmogorov_bound(S, sigma, PrefixFreeFamily{}, root);
  CHECK(empty.lhs == 0);
  CHECK(empty.pass);

  std::vector<BitString> level;
  for (const auto& t : oracle::all_strings(3)) level.push_back(BitString("010" + t));
  const auto full = verify_kolmogorov_bound(zero, sigma, PrefixFreeFamily(level), root);
  CHECK(full.lhs == Rational(1, 8));
  CHECK(full.rhs == Rational(1, 8) * kE2Lower * 2);
  CHECK(full.pass);

  auto clause = [&](const BitString& s, const PrefixFreeFamily& Z) {
    try {
      verify_kolmogorov_bound(S, s, Z, root);
    } catch (const PreconditionError& e) {
      return e.clause();
    }
    return std::string("none");
  };
  CHECK(clause(BitString("110000"), PrefixFreeFamily{}) == "rho <= sigma");
  CHECK(clause(BitString("0101"), PrefixFreeFamily{}) == "|sigma| = n' with n >= m");
  CHECK(clause(BitString("010"), PrefixFreeFamily({BitString("110000")})) == "members extend sigma");
}

TEST_CASE("sampled families stay below the extremal family") {
  std::mt19937_64 rng(9);
  const auto root = TestRoot::desk_default();
  for (const auto& S : default_battery()) {
    const Rational best = extremal_family_mass(S, root.rho, 5);
    for (int t = 0; t < 20; ++t) {
      const auto Z = sample_prefix_free_family(rng, root.rho, 5);
      Rational mass = 0;
      for (const auto& tau : Z.members()) {
        CHECK(root.rho.is_prefix_of(tau));
        CHECK(tau.size() <= triangular(5));
        mass += pow2(-static_cast<long>(tau.size())) * own_capital_oracle(S, tau.str());
      }
      CHECK(mass <= best);
      CHECK(verify_kolmogorov_bound(S, root.rho, Z, root).lhs == mass);
    }
  }
}

TEST_CASE("own_value_capital matches the oracle") {
  std::mt19937_64 rng(10);
  for (const auto& S : default_battery())
    for (int t = 0; t < 20; ++t) {
      const std::string x = oracle::random_bits(rng, oracle::tri(2 + rng() % 6));
      if (x.find('1') == std::string::npos) continue;
      CHECK(own_value_capital(S, BitString(x)) == own_capital_oracle(S, x));
    }
  CHECK_THROWS_AS(own_value_capital(default_battery().front(), BitString("000")), DomainError);
}

TEST_CASE("product bound") {
  const auto p1 = product_bound_check(Rational(1), 1);
  CHECK(p1.partial_product == Rational(3, 2));
  CHECK(p1.bound_ok);
  const auto p2 = product_bound_check(Rational(2), 20);
  CHECK(p2.partial_product < parse_rational("7389056/1000000"));
  CHECK(p2.bound_ok);
  Rational prev = 1;
  for (std::size_t N = 1; N <= 64; ++N) {
    const auto p = product_bound_check(Rational(1, 2), N);
    CHECK(p.partial_product > prev);
    CHECK(p.bound_ok);
    prev = p.partial_product;
  }
  Rational direct = 1;
  for (int n = 1; n <= 10; ++n) direct *= 1 + Rational(1, 2) * pow2(-n);
  CHECK(product_bound_check(Rational(1, 2), 10).partial_product == direct);
  CHECK_THROWS_AS(product_bound_check(Rational(0), 3), DomainError);
  CHECK_THROWS_AS(product_bound_check(Rational(1), 0), DomainError);
}

TEST_CASE("test level bound") {
  const auto S = make_stake("constant", {Rational(0)});
  CHECK(test_level_bound(S, BitString("010"), 0) == Rational(1, 8) * kE2Lower * 2);
  CHECK(test_level_bound(S, BitString("010"), 3) == Rational(1, 64) * kE2Lower * 2);
  CHECK_THROWS_AS(test_level_bound(S, BitString("000"), 0), DomainError);
}
