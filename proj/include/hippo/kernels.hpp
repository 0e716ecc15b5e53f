#pragma once

// Data-parallel kernels (OpenMP) and the serial reference versions they are
// tested against. Outputs are written to pre-indexed slots, so results do not
// depend on thread count or scheduling.

#include <cstdint>
#include <span>
#include <vector>

#include "hippo/construction.hpp"
#include "hippo/core.hpp"
#include "hippo/martingale.hpp"

namespace hippo {

/// One Hippocratic battery cell: a strategy run on one Q with one bias.
struct BatteryJob {
  const StakeFunction* strategy;
  const Rational* bias;
  std::span<const std::uint8_t> q;
};

/// Minimal antichain U'_j restricted to triangular lengths <= k_max'.
struct TestLevelQuery {
  const StakeFunction* strategy;
  BitString rho;
  long j = 0;
  std::size_t k_max = 0;
  std::uint64_t node_budget = std::uint64_t{1} << 22;
};

namespace kernels {

int max_threads() noexcept;

BitString build_q_thm1(std::span<const std::uint8_t> alpha, std::size_t n_max);
BitString build_q_thm2(const ApproximationScheme& scheme, std::span<const std::uint8_t> alpha, std::size_t n_max);
std::vector<CapitalSummary> run_battery(std::span<const BatteryJob> jobs);
/// Members in lexicographic order. Throws SizeLimitError past the node budget.
std::vector<BitString> enumerate_test_level(const TestLevelQuery& query);

}  // namespace kernels

namespace reference {

BitString build_q_thm1(std::span<const std::uint8_t> alpha, std::size_t n_max);
BitString build_q_thm2(const ApproximationScheme& scheme, std::span<const std::uint8_t> alpha, std::size_t n_max);
std::vector<CapitalSummary> run_battery(std::span<const BatteryJob> jobs);
std::vector<BitString> enumerate_test_level(const TestLevelQuery& query);

}  // namespace reference

/// True when X qualifies for U'_j: 0.X > 0 and M^{0.X}(Gamma(X)) > 2^j.
bool qualifies_for_test_level(const StakeFunction& S, const BitString& x, const Rational& threshold);

/// Largest k with k' == length (1 for length 0); throws DomainError when length is not triangular.
std::size_t triangular_level(std::size_t length);

}  // namespace hippo
