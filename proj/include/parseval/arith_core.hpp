#pragma once

// Sieved arithmetic functions and the summation utilities built on them.
//
// Tables are 1-based: values(n) holds f(n) for 1 <= n <= limit and
// values(0) is an unused zero slot. Integer kinds are exact; the two ratio
// kinds are double precision with relative error at most 1e-12 * d(n).

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "parseval/config.hpp"
#include "parseval/errors.hpp"

namespace parseval {

enum class TableKind : std::uint8_t {
  mobius = 0,
  euler_phi = 1,
  divisor_k = 2,    // d_k(n); parameter holds k
  sigma_ratio = 3,  // sigma_s(n) / n^s
  phi_ratio = 4,    // phi_s(n) / n^s
  constant = 5,     // every value equal to the parameter
};

std::string_view to_string(TableKind kind);
TableKind table_kind_from_string(std::string_view name);

template <typename Scalar>
class FunctionTable {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  FunctionTable(TableKind kind, std::uint64_t limit, double parameter,
                Vector values)
      : kind_(kind),
        limit_(limit),
        parameter_(parameter),
        values_(std::move(values)) {
    if (limit_ == 0 ||
        static_cast<std::uint64_t>(values_.size()) != limit_ + 1) {
      throw DomainError("function table needs limit + 1 slots");
    }
  }

  TableKind kind() const { return kind_; }
  std::uint64_t limit() const { return limit_; }
  double parameter() const { return parameter_; }

  Scalar operator()(std::uint64_t n) const {
    return values_(static_cast<Eigen::Index>(n));
  }

  /// Values f(first), ..., f(first + count - 1).
  auto segment(std::uint64_t first, std::uint64_t count) const {
    return values_.segment(static_cast<Eigen::Index>(first),
                           static_cast<Eigen::Index>(count));
  }

  const Vector& values() const { return values_; }

 private:
  TableKind kind_;
  std::uint64_t limit_;
  double parameter_;
  Vector values_;
};

using IntegerTable = FunctionTable<std::int64_t>;
using RealTable = FunctionTable<double>;

// --- prime helpers -------------------------------------------------------

/// Smallest prime factor of every n <= limit (spf[0] = spf[1] = 0).
std::vector<std::uint32_t> smallest_prime_factors(std::uint64_t limit);

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit);

/// Prime factorisation by trial division, as (prime, exponent) pairs.
std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n);

/// Divisors of n in increasing order.
std::vector<std::uint64_t> divisors(std::uint64_t n);

std::int64_t mobius(std::uint64_t n);

/// sigma_1(n), the sum of the divisors of n.
std::uint64_t divisor_sum(std::uint64_t n);

// --- sieves --------------------------------------------------------------

IntegerTable sieve_mobius(std::uint64_t limit,
                          const Budget& budget = default_budget());

IntegerTable sieve_euler_phi(std::uint64_t limit,
                             const Budget& budget = default_budget());

/// d_k(n), the number of ordered k-tuples with product n. Throws
/// OverflowError if a value leaves the 64-bit range.
IntegerTable sieve_dk(int k, std::uint64_t limit,
                      const Budget& budget = default_budget());

/// sigma_s(n) / n^s = sum over d | n of d^{-s}.
RealTable sieve_sigma_ratio(double s, std::uint64_t limit,
                            const Budget& budget = default_budget());

/// phi_s(n) / n^s = product over p | n of (1 - p^{-s}).
RealTable sieve_phi_ratio(double s, std::uint64_t limit,
                          const Budget& budget = default_budget());

RealTable constant_table(double value, std::uint64_t limit,
                         const Budget& budget = default_budget());

/// Exact sum of table(1..n), accumulated in 128 bits.
std::int64_t prefix_sum(const IntegerTable& table, std::uint64_t n);

// --- Mertens -------------------------------------------------------------

class MertensValues {
 public:
  using Vector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;

  explicit MertensValues(const IntegerTable& mobius_table);

  std::uint64_t limit() const { return limit_; }

  /// M(n) for 0 <= n <= limit; M(0) = 0.
  std::int64_t operator()(std::uint64_t n) const {
    return prefix_(static_cast<Eigen::Index>(n));
  }

  /// M(x) = sum over k <= x of mu(k), for real x (zero when x < 1).
  std::int64_t at(double x) const;

  const Vector& prefix() const { return prefix_; }

 private:
  std::uint64_t limit_;
  Vector prefix_;
};

MertensValues mertens_values(std::uint64_t limit,
                             const Budget& budget = default_budget());

// --- partial summation ---------------------------------------------------

using RealFunction = std::function<double(double)>;

/// Evaluates A(x) f(x) - integral_1^x A(t) f'(t) dt, where A(t) is the
/// partial sum of `a` (a[0] is a_1). A is constant on every [n, n+1), so
/// the integral is a sum of per-interval integrals of f', each done by
/// adaptive Simpson to 1e-10. Throws DomainError for x < 1 and
/// InconsistentDerivative when f_prime disagrees with central differences
/// of f at three sample points by more than 1e-6 relative.
double abel_sum(std::span<const double> a, const RealFunction& f,
                const RealFunction& f_prime, double x);

/// Integral of `fn` over [lo, hi] by adaptive Simpson.
double adaptive_simpson(const RealFunction& fn, double lo, double hi,
                        double tolerance);

}  // namespace parseval
