#include "hippo/kernels.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "hippo/error.hpp"

namespace hippo {

namespace {

// Collects the first exception thrown inside a parallel region so it can be
// rethrown on the calling thread once the region ends.
class ExceptionSink {
 public:
  template <class F>
  void run(F&& f) noexcept {
    try {
      f();
    } catch (...) {
      std::lock_guard lock(mu_);
      if (!first_) first_ = std::current_exception();
    }
  }
  void rethrow() {
    if (first_) std::rethrow_exception(first_);
  }

 private:
  std::mutex mu_;
  std::exception_ptr first_;
};

void check_alpha(std::span<const std::uint8_t> alpha, std::size_t n_max) {
  if (alpha.size() < triangular(n_max) + n_max)
    throw InsufficientBits("need " + std::to_string(triangular(n_max) + n_max) + " alpha bits");
}

std::uint8_t thm2_bit(const ApproximationScheme& scheme, std::span<const std::uint8_t> alpha, std::size_t k) {
  const BitString beta = scheme.at(k, alpha);
  return static_cast<std::uint8_t>(q_bit_thm2(beta.raw(), alpha.subspan(triangular(k), k)));
}

// Serial DFS shared by both enumerators: appends qualifying strings under `x`
// (which sits at level k) in lexicographic order.
void enumerate_subtree(const StakeFunction& S, const Rational& threshold, BitString& x, std::size_t k,
                       std::size_t k_max, std::uint64_t budget, std::atomic<std::uint64_t>& nodes,
                       std::vector<BitString>& out) {
  if (nodes.fetch_add(1, std::memory_order_relaxed) + 1 > budget)
    throw SizeLimitError("test-level enumeration exceeded node budget of " + std::to_string(budget));
  if (qualifies_for_test_level(S, x, threshold)) {
    out.push_back(x);
    return;
  }
  if (k >= k_max) return;
  const std::uint64_t children = std::uint64_t{1} << k;
  for (std::uint64_t theta = 0; theta < children; ++theta) {
    BitString child = x;
    for (std::size_t b = k; b-- > 0;) child.push_back(static_cast<int>((theta >> b) & 1u));
    enumerate_subtree(S, threshold, child, k + 1, k_max, budget, nodes, out);
  }
}

void validate_query(const TestLevelQuery& q) {
  if (q.strategy == nullptr) throw DomainError("test-level query has no strategy");
  if (q.j < 0) throw DomainError("test level j must be >= 0");
}

}  // namespace

std::size_t triangular_level(std::size_t length) {
  std::size_t k = 1;
  while (triangular(k + 1) <= length) ++k;
  if (triangular(k) != length) throw DomainError(std::to_string(length) + " is not a triangular length");
  return k;
}

bool qualifies_for_test_level(const StakeFunction& S, const BitString& x, const Rational& threshold) {
  if (x.count_ones() == 0) return false;  // bias 0: the martingale is undefined
  const Rational bias = bits_to_rational(x);
  return martingale_value(S, bias, gamma(x)) > threshold;
}

namespace kernels {

int max_threads() noexcept {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

BitString build_q_thm1(std::span<const std::uint8_t> alpha, std::size_t n_max) {
  check_alpha(alpha, n_max);
  std::vector<std::uint8_t> q(n_max);
  const auto n = static_cast<std::int64_t>(n_max);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto idx = static_cast<std::size_t>(i) + 1;
    q[idx - 1] = compare_dyadic(alpha.subspan(triangular(idx), idx), alpha.first(idx)) >= 0 ? 0 : 1;
  }
  return BitString::from_raw(std::move(q));
}

BitString build_q_thm2(const ApproximationScheme& scheme, std::span<const std::uint8_t> alpha, std::size_t n_max) {
  check_alpha(alpha, n_max);
  std::vector<std::uint8_t> q(n_max);
  ExceptionSink sink;
  const auto n = static_cast<std::int64_t>(n_max);
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i) {
    sink.run([&] { q[static_cast<std::size_t>(i)] = thm2_bit(scheme, alpha, static_cast<std::size_t>(i) + 1); });
  }
  sink.rethrow();
  return BitString::from_raw(std::move(q));
}

std::vector<CapitalSummary> run_battery(std::span<const BatteryJob> jobs) {
  std::vector<CapitalSummary> out(jobs.size());
  ExceptionSink sink;
  const auto n = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    sink.run([&] {
      const BatteryJob& job = jobs[static_cast<std::size_t>(i)];
      out[static_cast<std::size_t>(i)] = summarize_martingale(*job.strategy, *job.bias, job.q);
    });
  }
  sink.rethrow();
  return out;
}

std::vector<BitString> enumerate_test_level(const TestLevelQuery& query) {
  validate_query(query);
  const std::size_t k0 = triangular_level(query.rho.size());
  if (k0 > query.k_max) return {};
  const Rational threshold = pow2(query.j);
  std::atomic<std::uint64_t> nodes{1};
  if (query.node_budget < 1) throw SizeLimitError("node budget is zero");
  if (qualifies_for_test_level(*query.strategy, query.rho, threshold)) return {query.rho};
  if (k0 >= query.k_max) return {};

  // Fan out over the root's children; each subtree is a serial DFS.
  const std::uint64_t children = std::uint64_t{1} << k0;
  std::vector<std::vector<BitString>> parts(children);
  ExceptionSink sink;
  const auto n = static_cast<std::int64_t>(children);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::int64_t t = 0; t < n; ++t) {
    sink.run([&] {
      BitString child = query.rho;
      const auto theta = static_cast<std::uint64_t>(t);
      for (std::size_t b = k0; b-- > 0;) child.push_back(static_cast<int>((theta >> b) & 1u));
      enumerate_subtree(*query.strategy, threshold, child, k0 + 1, query.k_max, query.node_budget, nodes,
                        parts[static_cast<std::size_t>(t)]);
    });
  }
  sink.rethrow();
  std::vector<BitString> members;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(members));
  return members;
}

}  // namespace kernels

namespace reference {

BitString build_q_thm1(std::span<const std::uint8_t> alpha, std::size_t n_max) {
  check_alpha(alpha, n_max);
  BitString q;
  for (std::size_t n = 1; n <= n_max; ++n) q.push_back(q_bit_thm1(alpha, n));
  return q;
}

BitString build_q_thm2(const ApproximationScheme& scheme, std::span<const std::uint8_t> alpha, std::size_t n_max) {
  check_alpha(alpha, n_max);
  BitString q;
  for (std::size_t k = 1; k <= n_max; ++k) q.push_back(thm2_bit(scheme, alpha, k));
  return q;
}

std::vector<CapitalSummary> run_battery(std::span<const BatteryJob> jobs) {
  std::vector<CapitalSummary> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(summarize_martingale(*job.strategy, *job.bias, job.q));
  return out;
}

std::vector<BitString> enumerate_test_level(const TestLevelQuery& query) {
  validate_query(query);
  const std::size_t k0 = triangular_level(query.rho.size());
  if (k0 > query.k_max) return {};
  std::atomic<std::uint64_t> nodes{0};
  std::vector<BitString> members;
  BitString root = query.rho;
  enumerate_subtree(*query.strategy, pow2(query.j), root, k0, query.k_max, query.node_budget, nodes, members);
  return members;
}

}  // namespace reference

}  // namespace hippo
