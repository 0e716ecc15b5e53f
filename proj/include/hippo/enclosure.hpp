#pragma once

#include <optional>
#include <compare>

#include "hippo/core.hpp"

namespace hippo {

/// Closed interval [lo, hi] with rational endpoints.
struct Interval {
  Rational lo;
  Rational hi;

  bool contains(const Rational& x) const { return lo <= x && x <= hi; }
  /// Strictly below / above x: conclusive comparisons only.
  bool below(const Rational& x) const { return hi < x; }
  bool above(const Rational& x) const { return lo > x; }
};

/// Rational lower endpoint used wherever e^2 appears in a "<= e^2 * X" check.
inline const Rational kE2Lower = parse_rational("7389056/1000000");
/// Rational upper endpoint for ln 2, used to keep growth bounds conservative.
inline const Rational kLn2Upper = parse_rational("6931472/10000000");

/// e^s for s >= 0 from the truncated series sum_{k<terms} s^k/k! plus a remainder bound.
Interval exp_enclosure(const Rational& s, int terms);

/// ln x for x > 0 via ln x = 2 atanh((x-1)/(x+1)); needs x reasonably close to 1.
Interval ln_enclosure(const Rational& x, int terms);

Interval ln2_enclosure(int terms);

/// log2 x for x > 0. Splits off the binary exponent first, so huge capitals are cheap.
Interval log2_enclosure(const Rational& x, int terms);

/// Compares `lhs` with `rhs` using an enclosure that is refined by doubling the
/// term count up to `max_depth` times. Returns nullopt if still inconclusive.
template <class EnclosureFn>
std::optional<std::strong_ordering> compare_refined(EnclosureFn&& enclose, const Rational& rhs, int terms = 8,
                                                    int max_depth = 8) {
  for (int depth = 0; depth <= max_depth; ++depth, terms *= 2) {
    Interval iv = enclose(terms);
    if (iv.above(rhs)) return std::strong_ordering::greater;
    if (iv.below(rhs)) return std::strong_ordering::less;
  }
  return std::nullopt;
}

}  // namespace hippo
