#include "hippo/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hippo/error.hpp"

namespace hippo {

Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto valid_int = [](std::string_view t) {
    if (!t.empty() && (t.front() == '-' || t.front() == '+')) t.remove_prefix(1);
    return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  auto slash = s.find('/');
  std::string num = s.substr(0, slash);
  std::string den = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(num) || !valid_int(den) || den.front() == '-' || den.front() == '+')
    throw FormatError("malformed rational '" + s + "'");
  if (num.front() == '+') num.erase(0, 1);
  Integer d(den);
  if (d == 0) throw FormatError("zero denominator in '" + s + "'");
  Rational q(Integer(num), d);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

Rational pow2(long e) {
  Integer p;
  mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e < 0 ? -e : e));
  if (e >= 0) return Rational(p);
  Rational q(Integer(1), p);
  return q;
}

double log2_approx(const Rational& q) {
  if (sgn(q) <= 0) return -std::numeric_limits<double>::infinity();
  long en = 0;
  long ed = 0;
  double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log2(mn) - std::log2(md) + static_cast<double>(en - ed);
}

BitString::BitString(std::string_view text) {
  bits_.reserve(text.size());
  for (char c : text) {
    if (c != '0' && c != '1') throw FormatError(std::string("invalid bit character '") + c + "'");
    bits_.push_back(static_cast<std::uint8_t>(c - '0'));
  }
}

BitString::BitString(std::initializer_list<int> bits) {
  for (int b : bits) push_back(b);
}

BitString BitString::from_raw(std::vector<std::uint8_t> bits) {
  for (auto b : bits)
    if (b > 1) throw InvariantError("bit value outside {0,1}");
  BitString s;
  s.bits_ = std::move(bits);
  return s;
}

BitString BitString::from_span(std::span<const std::uint8_t> bits) {
  return from_raw(std::vector<std::uint8_t>(bits.begin(), bits.end()));
}

int BitString::bit(std::size_t i) const {
  if (i == 0 || i > bits_.size()) throw DomainError("bit index out of range");
  return bits_[i - 1];
}

BitString BitString::prefix(std::size_t k) const {
  if (k > bits_.size()) throw DomainError("prefix longer than string");
  BitString s;
  s.bits_.assign(bits_.begin(), bits_.begin() + static_cast<std::ptrdiff_t>(k));
  return s;
}

BitString BitString::slice(std::size_t start, std::size_t count) const {
  if (start == 0 || start - 1 + count > bits_.size()) throw DomainError("slice out of range");
  BitString s;
  auto first = bits_.begin() + static_cast<std::ptrdiff_t>(start - 1);
  s.bits_.assign(first, first + static_cast<std::ptrdiff_t>(count));
  return s;
}

void BitString::push_back(int b) {
  if (b != 0 && b != 1) throw InvariantError("bit value outside {0,1}");
  bits_.push_back(static_cast<std::uint8_t>(b));
}

BitString BitString::appended(int b) const {
  BitString s = *this;
  s.push_back(b);
  return s;
}

BitString BitString::concat(const BitString& tail) const {
  BitString s = *this;
  s.bits_.insert(s.bits_.end(), tail.bits_.begin(), tail.bits_.end());
  return s;
}

bool BitString::is_prefix_of(const BitString& other) const noexcept {
  return bits_.size() <= other.bits_.size() && std::equal(bits_.begin(), bits_.end(), other.bits_.begin());
}

std::size_t BitString::count_ones() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::string BitString::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

Rational bits_to_rational(std::span<const std::uint8_t> bits) {
  Integer num = 0;
  const std::size_t n = bits.size();
  for (std::size_t i = 0; i < n; ++i)
    if (bits[i]) mpz_setbit(num.get_mpz_t(), n - 1 - i);
  Rational q(num, Integer(1));
  q /= pow2(static_cast<long>(n));
  return q;
}

Rational bits_to_rational(const BitString& sigma) { return bits_to_rational(sigma.raw()); }

std::strong_ordering compare_dyadic(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t x = i < a.size() ? a[i] : 0;
    const std::uint8_t y = i < b.size() ? b[i] : 0;
    if (x != y) return x <=> y;
  }
  return std::strong_ordering::equal;
}

BitString binary_digits(const Rational& x, std::size_t k) {
  if (sgn(x) < 0 || x >= 1) throw DomainError("binary_digits expects x in [0,1)");
  Rational scaled = x * pow2(static_cast<long>(k));
  Integer whole;
  mpz_fdiv_q(whole.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  std::vector<std::uint8_t> bits(k, 0);
  for (std::size_t i = 0; i < k; ++i)
    bits[k - 1 - i] = static_cast<std::uint8_t>(mpz_tstbit(whole.get_mpz_t(), i));
  return BitString::from_raw(std::move(bits));
}

long ceil_log2(const Rational& x) {
  if (sgn(x) <= 0) throw DomainError("ceil_log2 expects x > 0");
  long t = 0;
  Rational p = 1;
  if (x <= 1) return 0;
  // Start near the answer using bit lengths, then correct.
  long guess = static_cast<long>(mpz_sizeinbase(x.get_num_mpz_t(), 2)) -
               static_cast<long>(mpz_sizeinbase(x.get_den_mpz_t(), 2)) - 1;
  t = std::max(0L, guess);
  p = pow2(t);
  while (p < x) {
    p *= 2;
    ++t;
  }
  while (t > 0 && p / 2 >= x) {
    p /= 2;
    --t;
  }
  return t;
}

}  // namespace hippo
