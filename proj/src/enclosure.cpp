#include "hippo/enclosure.hpp"

#include "hippo/error.hpp"

namespace hippo {

namespace {

// Precision (bits) used to shrink huge mantissas before running a series.
constexpr long kMantissaBits = 96;

Rational floor_to_bits(const Rational& x, long bits) {
  Rational scaled = x * pow2(bits);
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rational(f) / pow2(bits);
}

Rational ceil_to_bits(const Rational& x, long bits) {
  Rational scaled = x * pow2(bits);
  Integer c;
  mpz_cdiv_q(c.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rational(c) / pow2(bits);
}

}  // namespace

Interval exp_enclosure(const Rational& s, int terms) {
  if (sgn(s) < 0) throw DomainError("exp_enclosure expects s >= 0");
  if (terms < 1) throw DomainError("exp_enclosure needs at least one term");
  Rational sum = 0;
  Rational term = 1;
  int k = 0;
  // Keep going past `terms` until the geometric tail bound applies (ratio <= 1/2).
  while (k < terms || s / (k + 1) > Rational(1, 2)) {
    sum += term;
    term *= s;
    term /= k + 1;
    ++k;
  }
  // term is now s^k / k!; the tail is at most term / (1 - s/(k+1)).
  Rational tail = term / (1 - s / (k + 1));
  return {sum, sum + tail};
}

Interval ln_enclosure(const Rational& x, int terms) {
  if (sgn(x) <= 0) throw DomainError("ln_enclosure expects x > 0");
  if (terms < 1) throw DomainError("ln_enclosure needs at least one term");
  if (x == 1) return {Rational(0), Rational(0)};
  Rational y = (x - 1) / (x + 1);
  Rational y2 = y * y;
  Rational sum = 0;
  Rational power = y;  // y^(2k+1)
  for (int k = 0; k < terms; ++k) {
    sum += power / (2 * k + 1);
    power *= y2;
  }
  sum *= 2;
  // |tail| <= 2 |y|^(2N+1) / ((2N+1)(1 - y^2)), same sign as y.
  Rational bound = 2 * abs(power) / (Rational(2 * terms + 1) * (1 - y2));
  if (sgn(y) > 0) return {sum, sum + bound};
  return {sum - bound, sum};
}

Interval ln2_enclosure(int terms) { return ln_enclosure(Rational(2), terms); }

Interval log2_enclosure(const Rational& x, int terms) {
  if (sgn(x) <= 0) throw DomainError("log2_enclosure expects x > 0");
  long exponent = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) -
                  static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2));
  Rational mantissa = x / pow2(exponent);
  while (mantissa >= 2) {
    mantissa /= 2;
    ++exponent;
  }
  while (mantissa < 1) {
    mantissa *= 2;
    --exponent;
  }
  // mantissa in [1, 2): bracket it on a short grid so the series stays cheap.
  Rational m_lo = floor_to_bits(mantissa, kMantissaBits);
  Rational m_hi = ceil_to_bits(mantissa, kMantissaBits);
  if (m_hi > 2) m_hi = 2;
  Interval ln_lo = ln_enclosure(m_lo, terms);
  Interval ln_hi = ln_enclosure(m_hi, terms);
  Interval ln2 = ln2_enclosure(terms);
  // ln(mantissa) >= 0, so dividing by the ln 2 bracket is monotone.
  Rational lo = Rational(exponent) + ln_lo.lo / ln2.hi;
  Rational hi = Rational(exponent) + ln_hi.hi / ln2.lo;
  return {lo, hi};
}

}  // namespace hippo
