#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace hippo {

/// Exact arbitrary-precision rational, always kept canonical.
using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "num/den" or an integer literal; the result is canonicalized.
/// Throws FormatError on malformed input or a zero denominator.
Rational parse_rational(std::string_view text);

/// "num/den" (or "num" when the denominator is 1).
std::string to_string(const Rational& q);

/// 2^e for any signed exponent.
Rational pow2(long e);

/// Approximate log2 of a non-negative rational; -inf for 0. Informational only.
double log2_approx(const Rational& q);

/// n(n-1)/2.
constexpr std::uint64_t triangular(std::uint64_t n) noexcept { return n * (n - (n > 0 ? 1 : 0)) / 2; }

/// Finite word over {0,1}. Every public accessor is 1-indexed.
class BitString {
 public:
  BitString() = default;
  /// From text of '0'/'1'. Throws FormatError on any other character.
  explicit BitString(std::string_view text);
  BitString(std::initializer_list<int> bits);
  static BitString from_raw(std::vector<std::uint8_t> bits);
  static BitString from_span(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }

  /// sigma(i), 1 <= i <= size().
  int bit(std::size_t i) const;

  /// sigma restricted to its first k bits.
  BitString prefix(std::size_t k) const;
  /// Bits start .. start+count-1 (1-indexed).
  BitString slice(std::size_t start, std::size_t count) const;

  void push_back(int b);
  BitString appended(int b) const;
  BitString concat(const BitString& tail) const;

  bool is_prefix_of(const BitString& other) const noexcept;

  std::size_t count_ones() const noexcept;

  std::span<const std::uint8_t> raw() const noexcept { return bits_; }
  std::string str() const;

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString& a, const BitString& b) { return a.bits_ <=> b.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
};

/// sum sigma(i) 2^-i.
Rational bits_to_rational(const BitString& sigma);
Rational bits_to_rational(std::span<const std::uint8_t> bits);

/// Compares 0.a with 0.b as dyadic rationals, padding the shorter with zeros.
std::strong_ordering compare_dyadic(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;
inline std::strong_ordering compare_dyadic(const BitString& a, const BitString& b) noexcept {
  return compare_dyadic(a.raw(), b.raw());
}

/// The first k binary digits of x in [0,1): floor(x * 2^k) written on k bits.
BitString binary_digits(const Rational& x, std::size_t k);

/// Smallest t >= 0 with 2^t >= x (x > 0).
long ceil_log2(const Rational& x);

}  // namespace hippo
