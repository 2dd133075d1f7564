#pragma once

// Shifted correlation sums sum_{n <= N} f(n) g(n + h), the U-split
// decomposition of their Ramanujan double series, and the error envelope.

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "parseval/arith_core.hpp"
#include "parseval/closed_forms.hpp"
#include "parseval/detail/compensated.hpp"
#include "parseval/detail/parallel.hpp"
#include "parseval/ramanujan.hpp"

namespace parseval {

/// Terms per reduction chunk. Fixed, so sums do not depend on thread count.
inline constexpr std::uint64_t kCorrelationChunk = std::uint64_t{1} << 16;

/// Compensated sum of f(n) g(n + h) over 1 <= n <= N. Chunks are reduced
/// in index order, so the result is bit-identical for any thread count.
template <typename ScalarF, typename ScalarG>
double correlate_direct(const FunctionTable<ScalarF>& f,
                        const FunctionTable<ScalarG>& g, std::uint64_t h,
                        std::uint64_t N, unsigned threads = 1) {
  if (f.limit() < N || g.limit() < N + h) {
    throw TableTooShort("correlate_direct: tables must reach N and N + h");
  }
  const std::uint64_t chunks = (N + kCorrelationChunk - 1) / kCorrelationChunk;
  std::vector<detail::CompensatedSum> partial(chunks);
  detail::parallel_for(chunks, threads, [&](std::size_t c) {
    const std::uint64_t lo = 1 + c * kCorrelationChunk;
    const std::uint64_t hi = std::min(N, lo + kCorrelationChunk - 1);
    detail::CompensatedSum acc;
    for (std::uint64_t n = lo; n <= hi; ++n) {
      acc.add(static_cast<double>(f(n)) * static_cast<double>(g(n + h)));
    }
    partial[c] = acc;
  });
  detail::CompensatedSum total;
  for (const auto& p : partial) total.add(p.value());
  return total.value();
}

/// Sieved table of the function whose Ramanujan coefficients `family`
/// holds. Only the sigma and phi families have one.
RealTable family_table(const CoefficientFamily& family, std::uint64_t limit,
                       const Budget& budget = default_budget());

/// U = N^{2/(1+2 delta)} (log N)^{4/(1+2 delta)}. Requires N >= 3,
/// delta > 1/2.
double optimal_U(std::uint64_t N, double delta);

/// C N^{2/(1+2 delta)} (log N)^{(5+2 delta)/(1+2 delta)}.
double error_bound(std::uint64_t N, double delta, double C);

struct CorrelationOptions {
  std::uint64_t r_max = kDefaultSeriesTruncation;
  std::uint64_t prime_limit = kDefaultPrimeLimit;
  /// Constant in bound_value; 1 until fitted.
  double bound_constant = 1.0;
  Budget budget = default_budget();
};

struct CorrelationReport {
  std::uint64_t N = 0;
  std::uint64_t h = 0;
  double direct_sum = 0.0;
  MainTermPrediction prediction;
  /// direct_sum - N * prediction.value
  double residual = 0.0;
  double bound_value = 0.0;
  double bound_constant = 1.0;
  /// min of the two family deltas
  double delta = 0.0;
  nlohmann::json f_descriptor;
  nlohmann::json g_descriptor;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Sieves both functions, evaluates the correlation sum, and compares it
/// with the predicted main term.
CorrelationReport correlate(const CoefficientFamily& f,
                            const CoefficientFamily& g, std::uint64_t h,
                            std::uint64_t N,
                            const CorrelationOptions& options = {});

/// Builds reports for several N from one pair of sieved tables.
std::vector<CorrelationReport> correlate_grid(
    const CoefficientFamily& f, const CoefficientFamily& g, std::uint64_t h,
    const std::vector<std::uint64_t>& N_grid,
    const CorrelationOptions& options = {});

/// Terms of the split of sum_n sum_{r,s} f^(r) g^(s) c_r(n) c_s(n+h) at
/// rs <= U (A) and rs > U (B).
struct USplitDiagnostics {
  std::uint64_t N = 0;
  std::uint64_t h = 0;
  double U = 0.0;
  std::uint64_t r_cap = 0;
  double delta = 0.0;
  double direct_sum = 0.0;
  /// Exact pair sums weighted by the coefficients, over rs <= U.
  double A = 0.0;
  /// direct_sum - A.
  double B = 0.0;
  /// N times the full main term.
  double C = 0.0;
  /// -N times the part of the main term with r^2 > U.
  double D = 0.0;
  double recomposition_error = 0.0;
  /// A - C - D, the O(U log U) remainder.
  double a_remainder = 0.0;
  /// Weighted pair sums over U < rs <= r_cap, for comparison with B.
  double b_enumerated = 0.0;
  std::uint64_t pair_count = 0;
  /// N / U^delta
  double d_envelope = 0.0;
  /// sqrt(N (N + h)) (log U)^3 / U^{delta - 1/2}
  double b_envelope = 0.0;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

inline constexpr std::uint64_t kMaxPairCap = 200'000;

/// Throws CapExceeded when U > r_cap or r_cap > kMaxPairCap, and
/// DomainError when U < 4 or a family has delta <= 1/2.
USplitDiagnostics u_split(const CoefficientFamily& f,
                          const CoefficientFamily& g, std::uint64_t h,
                          std::uint64_t N, double U, std::uint64_t r_cap,
                          const CorrelationOptions& options = {});

}  // namespace parseval
