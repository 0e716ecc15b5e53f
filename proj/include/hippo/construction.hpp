#pragma once

#include <span>
#include <variant>
#include <vector>

#include "hippo/bit_source.hpp"
#include "hippo/core.hpp"

namespace hippo {

/// Q_n for the monotone-betting construction: 0 iff
/// 0.alpha_{n'+1}...alpha_{n'+n} >= 0.alpha_1...alpha_n. Needs |alpha| >= n' + n.
int q_bit_thm1(std::span<const std::uint8_t> alpha, std::size_t n);
inline int q_bit_thm1(const BitString& alpha, std::size_t n) { return q_bit_thm1(alpha.raw(), n); }

/// Q_k for the stochasticity construction: 1 iff 0.beta^k >= 0.(fresh block).
/// Note the inverted output convention relative to q_bit_thm1.
int q_bit_thm2(std::span<const std::uint8_t> beta, std::span<const std::uint8_t> fresh);
inline int q_bit_thm2(const BitString& beta, const BitString& fresh) { return q_bit_thm2(beta.raw(), fresh.raw()); }

/// Largest n with n' + n <= length, i.e. the number of fully determined Q bits.
std::size_t determined_q_bits(std::size_t alpha_length) noexcept;

/// Gamma: alpha prefix -> Q_1...Q_n with every consumed alpha bit present.
BitString gamma(const BitString& alpha_prefix);
BitString gamma(std::span<const std::uint8_t> alpha_prefix);

/// The clamped slowly converging approximation: first k digits of
/// clamp(p + c / ceil(log2(k+2)), 2^-k, 1 - 2^-k).
BitString slow_scheme(const Rational& p, const Rational& c, std::size_t k);
/// 0.slow_scheme(p, c, k) without materialising the string.
Rational slow_scheme_value(const Rational& p, const Rational& c, std::size_t k);

/// A computable sequence of approximations beta^k, |beta^k| = k.
class ApproximationScheme {
 public:
  struct Theorem1Prefix {};
  struct ExplicitList {
    std::vector<BitString> strings;  // strings[k-1] = beta^k
  };
  struct SlowDrift {
    Rational p;
    Rational c;
  };

  /// beta^k := alpha_1...alpha_k.
  static ApproximationScheme theorem1_prefix() { return ApproximationScheme(Theorem1Prefix{}); }
  /// Throws InvariantError unless strings[k-1] has length k.
  static ApproximationScheme explicit_list(std::vector<BitString> strings);
  /// Throws DomainError unless 0 < p < 1 and c >= 0.
  static ApproximationScheme slow_drift(const Rational& p, const Rational& c);

  /// beta^k. `alpha` is consulted only by the prefix kind (needs k bits).
  BitString at(std::size_t k, std::span<const std::uint8_t> alpha = {}) const;
  /// 0.beta^k.
  Rational value(std::size_t k, std::span<const std::uint8_t> alpha = {}) const;

  const auto& kind() const noexcept { return kind_; }

 private:
  using Kind = std::variant<Theorem1Prefix, ExplicitList, SlowDrift>;
  explicit ApproximationScheme(Kind k) : kind_(std::move(k)) {}
  Kind kind_;
};

enum class QVariant { theorem1, theorem2 };

struct QConstruction {
  QVariant variant = QVariant::theorem1;
  ApproximationScheme scheme = ApproximationScheme::theorem1_prefix();  // theorem2 only
};

/// Q_1...Q_{n_max}. Reads alpha_1 ... alpha_{n_max' + n_max} from the source.
BitString build_q(const QConstruction& c, BitSource& alpha, std::size_t n_max);
/// Same, from an alpha prefix already in memory.
BitString build_q(const QConstruction& c, std::span<const std::uint8_t> alpha, std::size_t n_max);

}  // namespace hippo
