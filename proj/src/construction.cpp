#include "hippo/construction.hpp"

#include "hippo/error.hpp"
#include "hippo/kernels.hpp"

namespace hippo {

int q_bit_thm1(std::span<const std::uint8_t> alpha, std::size_t n) {
  if (n == 0) throw DomainError("Q is indexed from 1");
  const std::size_t base = triangular(n);
  if (alpha.size() < base + n)
    throw InsufficientBits("Q_" + std::to_string(n) + " needs " + std::to_string(base + n) + " alpha bits, have " +
                           std::to_string(alpha.size()));
  return compare_dyadic(alpha.subspan(base, n), alpha.first(n)) >= 0 ? 0 : 1;
}

int q_bit_thm2(std::span<const std::uint8_t> beta, std::span<const std::uint8_t> fresh) {
  if (beta.size() != fresh.size()) throw LengthMismatch("beta^k and the fresh block must both have length k");
  if (beta.empty()) throw DomainError("Q is indexed from 1");
  return compare_dyadic(beta, fresh) >= 0 ? 1 : 0;
}

std::size_t determined_q_bits(std::size_t alpha_length) noexcept {
  // n' + n = (n+1)' is increasing in n; walk up from the last fit.
  std::size_t n = 0;
  while (triangular(n + 2) <= alpha_length) ++n;
  return n;
}

BitString gamma(std::span<const std::uint8_t> alpha_prefix) {
  return reference::build_q_thm1(alpha_prefix, determined_q_bits(alpha_prefix.size()));
}

BitString gamma(const BitString& alpha_prefix) { return gamma(alpha_prefix.raw()); }

Rational slow_scheme_value(const Rational& p, const Rational& c, std::size_t k) {
  if (k == 0) throw DomainError("slow_scheme is indexed from 1");
  const long depth = ceil_log2(Rational(static_cast<long>(k) + 2));
  Rational x = p + c / depth;
  const Rational lo = pow2(-static_cast<long>(k));
  const Rational hi = 1 - lo;
  if (x < lo) x = lo;
  if (x > hi) x = hi;
  // floor(x 2^k) / 2^k
  Rational scaled = x / lo;
  Integer f;
  mpz_fdiv_q(f.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  return Rational(f) * lo;
}

BitString slow_scheme(const Rational& p, const Rational& c, std::size_t k) {
  return binary_digits(slow_scheme_value(p, c, k), k);
}

ApproximationScheme ApproximationScheme::explicit_list(std::vector<BitString> strings) {
  for (std::size_t k = 1; k <= strings.size(); ++k)
    if (strings[k - 1].size() != k)
      throw InvariantError("explicit scheme entry " + std::to_string(k) + " must have length " + std::to_string(k));
  return ApproximationScheme(ExplicitList{std::move(strings)});
}

ApproximationScheme ApproximationScheme::slow_drift(const Rational& p, const Rational& c) {
  if (sgn(p) <= 0 || p >= 1) throw DomainError("slow-drift target p must lie in (0,1)");
  if (sgn(c) < 0) throw DomainError("slow-drift coefficient c must be >= 0");
  return ApproximationScheme(SlowDrift{p, c});
}

BitString ApproximationScheme::at(std::size_t k, std::span<const std::uint8_t> alpha) const {
  if (k == 0) throw DomainError("approximation schemes are indexed from 1");
  if (const auto* list = std::get_if<ExplicitList>(&kind_)) {
    if (k > list->strings.size()) throw DomainError("explicit scheme has no entry " + std::to_string(k));
    return list->strings[k - 1];
  }
  if (const auto* drift = std::get_if<SlowDrift>(&kind_)) return slow_scheme(drift->p, drift->c, k);
  if (alpha.size() < k) throw InsufficientBits("prefix scheme needs alpha_1..alpha_" + std::to_string(k));
  return BitString::from_span(alpha.first(k));
}

Rational ApproximationScheme::value(std::size_t k, std::span<const std::uint8_t> alpha) const {
  if (const auto* drift = std::get_if<SlowDrift>(&kind_)) {
    if (k == 0) throw DomainError("approximation schemes are indexed from 1");
    return slow_scheme_value(drift->p, drift->c, k);
  }
  return bits_to_rational(at(k, alpha));
}

BitString build_q(const QConstruction& c, std::span<const std::uint8_t> alpha, std::size_t n_max) {
  if (alpha.size() < triangular(n_max) + n_max)
    throw InsufficientBits("building " + std::to_string(n_max) + " Q bits needs " +
                           std::to_string(triangular(n_max) + n_max) + " alpha bits");
  if (c.variant == QVariant::theorem1) return kernels::build_q_thm1(alpha, n_max);
  return kernels::build_q_thm2(c.scheme, alpha, n_max);
}

BitString build_q(const QConstruction& c, BitSource& alpha, std::size_t n_max) {
  const BitString prefix = alpha.prefix(triangular(n_max) + n_max);
  return build_q(c, prefix.raw(), n_max);
}

}  // namespace hippo
