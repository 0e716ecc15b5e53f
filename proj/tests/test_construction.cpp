#include <doctest.h>

#include "hippo/construction.hpp"
#include "hippo/error.hpp"
#include "hippo/kernels.hpp"
#include "oracles.hpp"

using namespace hippo;

TEST_CASE("q_bit_thm1 examples") {
  CHECK(q_bit_thm1(BitString("1"), 1) == 0);
  CHECK(q_bit_thm1(BitString("0111"), 2) == 0);
  CHECK(q_bit_thm1(BitString("1000"), 2) == 1);
  CHECK_THROWS_AS(q_bit_thm1(BitString("01"), 2), InsufficientBits);
  CHECK_THROWS_AS(q_bit_thm1(BitString("01"), 0), DomainError);
}

TEST_CASE("q_bit_thm2 examples") {
  CHECK(q_bit_thm2(BitString("1"), BitString("1")) == 1);
  CHECK(q_bit_thm2(BitString("01"), BitString("10")) == 0);
  CHECK(q_bit_thm2(BitString("11"), BitString("10")) == 1);
  CHECK_THROWS_AS(q_bit_thm2(BitString("1"), BitString("10")), LengthMismatch);
}

TEST_CASE("build_q examples") {
  const QConstruction thm1{};
  CHECK(build_q(thm1, BitString("0").raw(), 1).str() == "0");
  CHECK(build_q(thm1, BitString("011").raw(), 2).str() == "00");
  const QConstruction thm2{QVariant::theorem2, ApproximationScheme::explicit_list({BitString("1")})};
  CHECK(build_q(thm2, BitString("1").raw(), 1).str() == "1");
  CHECK_THROWS_AS(build_q(thm1, BitString("01").raw(), 2), InsufficientBits);
  auto src = BitSource::from_string(BitString("011"));
  CHECK(build_q(thm1, src, 2).str() == "00");
}

TEST_CASE("gamma examples and strictness") {
  CHECK(gamma(BitString("")).str() == "");
  CHECK(gamma(BitString("0")).str() == "0");
  CHECK(gamma(BitString("011")).str() == "00");
  CHECK(gamma(BitString("01")).str() == "0");
  CHECK(determined_q_bits(0) == 0);
  CHECK(determined_q_bits(2) == 1);
  CHECK(determined_q_bits(3) == 2);
  CHECK(determined_q_bits(6) == 3);
  CHECK(determined_q_bits(5) == 2);
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const std::string a = oracle::random_bits(rng, 60);
    for (std::size_t L = 0; L <= 60; ++L) {
      const BitString g = gamma(BitString(a.substr(0, L)));
      CHECK(g.size() == oracle::gamma_len(L));
      CHECK(g.str() == oracle::q_thm1(a, g.size()));
    }
  }
}

TEST_CASE("build_q thm1 variant matches the value-comparison oracle") {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 30; ++t) {
    const std::size_t n = 1 + rng() % 40;
    const std::string a = oracle::random_bits(rng, oracle::tri(n) + n);
    CHECK(build_q(QConstruction{}, BitString(a).raw(), n).str() == oracle::q_thm1(a, n));
  }
}

TEST_CASE("slow scheme") {
  CHECK(slow_scheme(Rational(1, 2), Rational(0), 1).str() == "1");
  CHECK(slow_scheme(Rational(1, 4), Rational(1, 4), 2).str() == "01");
  CHECK(slow_scheme_value(Rational(1, 4), Rational(1, 4), 2) == Rational(1, 4));
  // clamp keeps the value inside [2^-k, 1 - 2^-k]
  CHECK(slow_scheme(Rational(1, 4), Rational(1, 4), 1).str() == "1");
  CHECK(slow_scheme(Rational(1, 1024), Rational(0), 3).str() == "001");
  // far out, the digits sit within c / ceil(log2(k+2)) + 2^-k of p
  const std::size_t k = 1000000;
  const Rational v = slow_scheme_value(Rational(1, 4), Rational(1, 4), k);
  CHECK(v >= Rational(1, 4));
  CHECK(v - Rational(1, 4) <= Rational(1, 4) / 20);
  CHECK(v - Rational(1, 4) >= Rational(1, 4) / 20 - pow2(-static_cast<long>(k)));
  CHECK(slow_scheme(Rational(1, 4), Rational(1, 4), 40) == binary_digits(slow_scheme_value(Rational(1, 4), Rational(1, 4), 40), 40));
  for (std::size_t j = 2; j < 100; ++j) {
    const Rational raw = Rational(1, 4) + Rational(1, 4) / ceil_log2(Rational(static_cast<long>(j) + 2));
    CHECK(slow_scheme_value(Rational(1, 4), Rational(1, 4), j) <= raw);
    CHECK(slow_scheme_value(Rational(1, 4), Rational(1, 4), j) > raw - pow2(-static_cast<long>(j)));
  }
  CHECK_THROWS_AS(ApproximationScheme::slow_drift(Rational(1), Rational(0)), DomainError);
  CHECK_THROWS_AS(ApproximationScheme::slow_drift(Rational(1, 2), Rational(-1)), DomainError);
}

TEST_CASE("approximation schemes") {
  CHECK_THROWS_AS(ApproximationScheme::explicit_list({BitString("11")}), InvariantError);
  const auto ex = ApproximationScheme::explicit_list({BitString("1"), BitString("01")});
  CHECK(ex.at(2).str() == "01");
  CHECK_THROWS_AS(ex.at(3), DomainError);
  const auto pre = ApproximationScheme::theorem1_prefix();
  CHECK(pre.at(3, BitString("0110").raw()).str() == "011");
  CHECK(pre.value(3, BitString("0110").raw()) == Rational(3, 8));
}

TEST_CASE("thm2 variant with the prefix scheme agrees with thm1 except on ties") {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    const std::size_t n = 30;
    const BitString a(oracle::random_bits(rng, oracle::tri(n) + n));
    const BitString q1 = build_q(QConstruction{}, a.raw(), n);
    const BitString q2 = build_q(QConstruction{QVariant::theorem2, ApproximationScheme::theorem1_prefix()}, a.raw(), n);
    for (std::size_t k = 1; k <= n; ++k) {
      const auto ord = compare_dyadic(a.slice(triangular(k) + 1, k), a.prefix(k));
      if (ord == 0) {
        CHECK(q1.bit(k) == 0);
        CHECK(q2.bit(k) == 1);
      } else {
        CHECK(q1.bit(k) == q2.bit(k));
      }
    }
  }
}

TEST_CASE("kernels agree with the serial reference") {
  auto src = BitSource::from_seed(77);
  const BitString a = src.prefix(triangular(301) + 1);
  CHECK(kernels::build_q_thm1(a.raw(), 300) == reference::build_q_thm1(a.raw(), 300));
  const auto slow = ApproximationScheme::slow_drift(Rational(1, 4), Rational(1, 4));
  CHECK(kernels::build_q_thm2(slow, a.raw(), 300) == reference::build_q_thm2(slow, a.raw(), 300));

  const auto battery = default_battery();
  std::vector<BitString> qs;
  std::vector<Rational> biases;
  for (std::uint64_t s = 1; s <= 3; ++s) {
    auto al = BitSource::from_seed(s);
    biases.push_back(bits_to_rational(al.prefix(16)));
    qs.push_back(build_q(QConstruction{}, al, 200));
  }
  std::vector<BatteryJob> jobs;
  for (std::size_t s = 0; s < qs.size(); ++s)
    for (const auto& S : battery) jobs.push_back({&S, &biases[s], qs[s].raw()});
  const auto k = kernels::run_battery(jobs);
  const auto r = reference::run_battery(jobs);
  REQUIRE(k.size() == r.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    CHECK(k[i].max_capital == r[i].max_capital);
    CHECK(k[i].final_capital == r[i].final_capital);
    CHECK(k[i].argmax == r[i].argmax);
  }
}
