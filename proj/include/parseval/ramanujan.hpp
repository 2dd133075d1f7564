#pragma once

// Ramanujan sums c_r(n), their partial sums over r, and Ramanujan
// coefficient families.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"
#include "parseval/arith_core.hpp"

namespace parseval {

/// c_r(n) = sum over d | gcd(n, r) of mu(r/d) d. For n = 0 this is phi(r).
std::int64_t ramanujan_sum(std::uint64_t r, std::uint64_t n);

struct OracleValue {
  std::int64_t value;
  /// Distance between the real part of the exponential sum and `value`.
  double rounding_distance;
};

inline constexpr std::uint64_t kOracleMaxModulus = 10'000;

/// Evaluates the defining sum over a in (Z/rZ)^* of exp(2 pi i a n / r)
/// and rounds it to the nearest integer. Throws DomainError for
/// r > kOracleMaxModulus and NumericalFailure when the rounding distance
/// exceeds 1e-6.
OracleValue ramanujan_sum_oracle(std::uint64_t r, std::uint64_t n);

/// c_r(h) for r = 1..r_max from a smallest-prime-factor sieve, using
/// multiplicativity in r. Index 0 is unused.
std::vector<std::int64_t> ramanujan_sums_in_r(std::uint64_t h,
                                              std::uint64_t r_max);

/// sum over r <= x of c_r(h), evaluated as sum over d | h of d M(x/d).
std::int64_t ramanujan_partial_sum(std::uint64_t h, double x,
                                   const MertensValues& mertens);

std::int64_t ramanujan_partial_sum(std::uint64_t h, double x,
                                   const Budget& budget = default_budget());

/// The same quantity by summing c_r(h) term by term.
std::int64_t ramanujan_partial_sum_direct(std::uint64_t h, double x);

/// sum over 1 <= n <= N of c_r(n) c_s(n + h), evaluated exactly by expanding
/// both sums over divisors and counting the n in each residue class.
std::int64_t ramanujan_pair_sum(std::uint64_t r, std::uint64_t s,
                                std::uint64_t h, std::uint64_t N);

/// One nonzero term d -> mu(r/d) d of c_r(n) = sum over d | gcd(n, r).
struct DivisorTerm {
  std::uint64_t d;
  std::int64_t weight;
};

std::vector<DivisorTerm> ramanujan_divisor_terms(std::uint64_t r);

/// ramanujan_pair_sum with the divisor expansions of r and s precomputed.
std::int64_t ramanujan_pair_sum(std::span<const DivisorTerm> r_terms,
                                std::span<const DivisorTerm> s_terms,
                                std::uint64_t h, std::uint64_t N);

/// Dense grid of c_r(n) for 1 <= r <= r_max and 0 <= n <= n_max.
class RamanujanSumTable {
 public:
  using Matrix =
      Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

  RamanujanSumTable(std::uint64_t r_max, std::uint64_t n_max,
                    unsigned threads = 1);

  std::uint64_t r_max() const { return r_max_; }
  std::uint64_t n_max() const { return n_max_; }

  std::int64_t operator()(std::uint64_t r, std::uint64_t n) const {
    return values_(static_cast<Eigen::Index>(r - 1),
                   static_cast<Eigen::Index>(n));
  }

  const Matrix& values() const { return values_; }

  /// Rows "r,n,value" for every cell, r-major.
  void write_csv(std::ostream& out) const;

 private:
  std::uint64_t r_max_;
  std::uint64_t n_max_;
  Matrix values_;
};

// --- coefficient families ------------------------------------------------

enum class FamilyKind { sigma, phi, custom };

/// A Ramanujan coefficient rule r -> f^(r) with a declared decay bound
/// |f^(r)| <= C r^{-(1 + delta)}, verified for r <= kDecayCheckLimit.
class CoefficientFamily {
 public:
  using Rule = std::function<double(std::uint64_t)>;

  static constexpr std::uint64_t kDecayCheckLimit = 10'000;

  /// Coefficients of sigma_s(n)/n^s: zeta(s+1) / r^{s+1}, delta = s,
  /// C = zeta(s+1).
  static CoefficientFamily sigma(double s);

  /// Coefficients of phi_s(n)/n^s: mu(r) / (zeta(s+1) phi_{s+1}(r)),
  /// delta = s, C = 1.
  static CoefficientFamily phi(double s);

  /// A user rule. Throws DomainError unless delta > 0, C > 0 and the bound
  /// holds for every r <= kDecayCheckLimit.
  static CoefficientFamily custom(std::string name, Rule rule,
                                  double tail_constant, double delta);

  /// Rebuilds a sigma or phi family from {family, s, delta, C}.
  static CoefficientFamily from_descriptor(const nlohmann::json& descriptor);

  double operator()(std::uint64_t r) const;

  /// f^(1..r_max) in one pass; index 0 is zero.
  Eigen::VectorXd coefficients(std::uint64_t r_max) const;

  FamilyKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double s() const { return s_; }
  double delta() const { return delta_; }
  double tail_constant() const { return tail_constant_; }
  /// zeta(s+1) for the built-in families, cached at construction.
  double zeta_shift() const { return zeta_shift_; }

  /// Largest |f^(r)| r^{1+delta} / C over r <= limit; at most 1 when the
  /// declared bound holds.
  double decay_ratio(std::uint64_t limit = kDecayCheckLimit) const;

  nlohmann::json descriptor() const;

 private:
  CoefficientFamily() = default;

  FamilyKind kind_ = FamilyKind::custom;
  std::string name_;
  double s_ = 0.0;
  double delta_ = 0.0;
  double tail_constant_ = 0.0;
  double zeta_shift_ = 0.0;
  Rule rule_;
};

/// Upper bound on sum over r > R of r^{-(1 + exponent)}: R^{-exponent}/exponent.
double power_tail(std::uint64_t R, double exponent);

struct ExpansionValue {
  double value;
  double tail_bound;
};

/// Partial sum over r <= R of f^(r) c_r(n), with a rigorous bound
/// C sigma(n) R^{-delta} / delta on the omitted terms (|c_r(n)| <= sigma(n)).
ExpansionValue truncated_expansion(const CoefficientFamily& family,
                                   std::uint64_t n, std::uint64_t R);

}  // namespace parseval
