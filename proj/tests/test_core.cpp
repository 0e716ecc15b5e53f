#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "hippo/bit_source.hpp"
#include "hippo/core.hpp"
#include "hippo/enclosure.hpp"
#include "hippo/error.hpp"
#include "oracles.hpp"

using namespace hippo;

TEST_CASE("triangular numbers") {
  CHECK(triangular(0) == 0);
  CHECK(triangular(1) == 0);
  CHECK(triangular(2) == 1);
  CHECK(triangular(7) == 21);
  for (std::uint64_t n = 1; n < 200; ++n) CHECK(triangular(n + 1) - triangular(n) == n);
}

TEST_CASE("parse_rational") {
  CHECK(parse_rational("3/6") == Rational(1, 2));
  CHECK(to_string(parse_rational("3/6")) == "1/2");
  CHECK(parse_rational("-4") == -4);
  CHECK(parse_rational("+7/2") == Rational(7, 2));
  CHECK_THROWS_AS(parse_rational(""), FormatError);
  CHECK_THROWS_AS(parse_rational("1/0"), FormatError);
  CHECK_THROWS_AS(parse_rational("1/-2"), FormatError);
  CHECK_THROWS_AS(parse_rational("0.5"), FormatError);
  CHECK_THROWS_AS(parse_rational("1/2/3"), FormatError);
}

TEST_CASE("pow2 and ceil_log2") {
  CHECK(pow2(0) == 1);
  CHECK(pow2(10) == 1024);
  CHECK(pow2(-3) == Rational(1, 8));
  CHECK(ceil_log2(Rational(1)) == 0);
  CHECK(ceil_log2(Rational(1, 2)) == 0);
  CHECK(ceil_log2(Rational(4)) == 2);
  CHECK(ceil_log2(Rational(5)) == 3);
  CHECK(ceil_log2(Rational(9)) == 4);
  CHECK_THROWS_AS(ceil_log2(Rational(0)), DomainError);
}

TEST_CASE("BitString basics") {
  BitString s("0110");
  CHECK(s.size() == 4);
  CHECK(s.bit(1) == 0);
  CHECK(s.bit(2) == 1);
  CHECK(s.prefix(2).str() == "01");
  CHECK(s.slice(2, 2).str() == "11");
  CHECK(s.count_ones() == 2);
  CHECK(BitString("01").is_prefix_of(s));
  CHECK_FALSE(BitString("1").is_prefix_of(s));
  CHECK(BitString("").is_prefix_of(s));
  CHECK(s.appended(1).str() == "01101");
  CHECK(BitString{1, 0}.concat(BitString("1")).str() == "101");
  CHECK_THROWS_AS(BitString("012"), FormatError);
  CHECK_THROWS_AS(s.bit(0), DomainError);
  CHECK_THROWS_AS(s.bit(5), DomainError);
  CHECK_THROWS_AS(s.prefix(5), DomainError);
}

TEST_CASE("bits_to_rational") {
  CHECK(bits_to_rational(BitString("")) == 0);
  CHECK(bits_to_rational(BitString("1")) == Rational(1, 2));
  CHECK(bits_to_rational(BitString("011")) == Rational(3, 8));
  std::mt19937_64 rng(1);
  for (int t = 0; t < 200; ++t) {
    const std::string b = oracle::random_bits(rng, rng() % 70);
    CHECK(bits_to_rational(BitString(b)) == oracle::value(b));
  }
}

TEST_CASE("compare_dyadic agrees with exact values") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 500; ++t) {
    const std::string a = oracle::random_bits(rng, rng() % 9), b = oracle::random_bits(rng, rng() % 9);
    const auto got = compare_dyadic(BitString(a), BitString(b));
    const Rational va = oracle::value(a), vb = oracle::value(b);
    CHECK((got < 0) == (va < vb));
    CHECK((got == 0) == (va == vb));
  }
  CHECK(compare_dyadic(BitString("1"), BitString("1000")) == 0);
}

TEST_CASE("binary_digits") {
  CHECK(binary_digits(Rational(3, 8), 2).str() == "01");
  CHECK(binary_digits(Rational(3, 8), 4).str() == "0110");
  CHECK(binary_digits(Rational(0), 3).str() == "000");
  CHECK(binary_digits(Rational(1, 3), 6).str() == "010101");
  CHECK_THROWS_AS(binary_digits(Rational(1), 3), DomainError);
}

TEST_CASE("explicit bit source reads") {
  auto src = BitSource::from_string(BitString("0101"));
  CHECK(src.read_bits(2, 2).str() == "10");
  CHECK(src.read_bits(1, 0).str() == "");
  auto small = BitSource::from_string(BitString("01"));
  CHECK_THROWS_AS(small.read_bits(2, 3), SourceExhausted);
  CHECK(src.next(3).str() == "010");
  CHECK(src.position() == 4);
  CHECK(src.next(1).str() == "1");
  CHECK_THROWS_AS(src.next(1), SourceExhausted);
}

TEST_CASE("bit file format") {
  CHECK(parse_bit_text("01 1\n0\t1").str() == "01101");
  CHECK_THROWS_AS(parse_bit_text("01x"), FormatError);
  const auto path = std::filesystem::temp_directory_path() / "hippo_core_bits.txt";
  {
    std::ofstream out(path);
    out << "1100\n11\n";
  }
  auto src = BitSource::from_file(path);
  CHECK(src.prefix(6).str() == "110011");
  CHECK_THROWS_AS(src.prefix(7), SourceExhausted);
  CHECK_THROWS_AS(BitSource::from_file(path.string() + ".missing"), FormatError);
  std::filesystem::remove(path);
}

TEST_CASE("seeded source is deterministic and position-addressable") {
  auto a = BitSource::from_seed(9);
  auto b = BitSource::from_seed(9);
  auto c = BitSource::from_seed(10);
  const BitString pa = a.prefix(40000);
  CHECK(pa == b.prefix(40000));
  CHECK(pa.prefix(256) != c.prefix(256));
  // Random access past several refills matches the sequential prefix.
  auto d = BitSource::from_seed(9);
  CHECK(d.read_bits(33001, 500) == pa.slice(33001, 500));
  CHECK(a.identity() == "seed:9");
  const double ones = static_cast<double>(pa.count_ones()) / pa.size();
  CHECK(ones > 0.48);
  CHECK(ones < 0.52);
}

TEST_CASE("exp enclosure brackets known values") {
  const Interval e1 = exp_enclosure(Rational(1), 20);
  // e = 2.718281828459045...
  CHECK(e1.lo < parse_rational("2718281828460/1000000000000"));
  CHECK(e1.hi > parse_rational("2718281828459/1000000000000"));
  CHECK(e1.lo > parse_rational("2718/1000"));
  const Interval e2 = exp_enclosure(Rational(2), 30);
  CHECK(e2.lo < parse_rational("7389056098931/1000000000000"));
  CHECK(e2.hi > parse_rational("7389056098930/1000000000000"));
  CHECK(e2.lo > kE2Lower);
  // A large argument needs extra terms before the tail bound applies.
  const Interval e10 = exp_enclosure(Rational(10), 4);
  CHECK(e10.contains(parse_rational("22026465794806718/1000000000000")));
}

TEST_CASE("ln and log2 enclosures") {
  const Interval l2 = ln2_enclosure(30);
  CHECK(l2.lo < parse_rational("693147180560/1000000000000"));
  CHECK(l2.hi > parse_rational("693147180559/1000000000000"));
  CHECK(l2.hi <= kLn2Upper);
  const Interval l = ln_enclosure(Rational(31, 32), 20);
  // ln(31/32) = -0.03174869831458027...
  CHECK(l.lo <= parse_rational("-3174869831458/100000000000000"));
  CHECK(l.hi >= parse_rational("-3174869831459/100000000000000"));
  CHECK(l.hi - l.lo < Rational(1, 1000000000000));
  const Interval lg = log2_enclosure(Rational(1024), 20);
  CHECK(lg.contains(10));
  const Interval lg3 = log2_enclosure(Rational(3), 40);
  // log2(3) = 1.58496250072115618...
  CHECK(lg3.lo <= parse_rational("1584962500722/1000000000000"));
  CHECK(lg3.hi >= parse_rational("1584962500721/1000000000000"));
  CHECK(lg3.hi - lg3.lo < Rational(1, 1000000));
  const Interval big = log2_enclosure(pow2(5000) * 3, 40);
  CHECK(big.lo <= 5000 + parse_rational("1584962500722/1000000000000"));
  CHECK(big.hi >= 5000 + parse_rational("1584962500721/1000000000000"));
  CHECK_THROWS_AS(log2_enclosure(Rational(0), 10), DomainError);
}

TEST_CASE("compare_refined") {
  auto enc = [](int terms) { return ln2_enclosure(terms); };
  CHECK(compare_refined(enc, Rational(69, 100)) == std::strong_ordering::greater);
  CHECK(compare_refined(enc, Rational(7, 10)) == std::strong_ordering::less);
}
