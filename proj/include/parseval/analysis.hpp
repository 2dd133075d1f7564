#pragma once

// Verification drivers: Ramanujan-sum correlation lemmas, average orders,
// partial sums of c_r(h) over r, and log-log fitting of error terms.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "parseval/config.hpp"
#include "parseval/correlation.hpp"

namespace parseval {

/// Normalised residuals may exceed the value fitted at the smallest grid
/// point by at most this factor before they count as growing.
inline constexpr double kGrowthSlack = 1.25;

/// True when every |ratios[i]| <= slack * |ratios[0]|.
bool no_growth(std::span<const double> ratios, double slack = kGrowthSlack);

// --- Ramanujan-sum correlation lemmas ------------------------------------

struct LemmaResidual {
  std::uint64_t r = 0;
  std::uint64_t s = 0;
  std::uint64_t h = 0;
  std::uint64_t N = 0;
  /// sum over n <= N of c_r(n) c_s(n + h), exact.
  std::int64_t sum = 0;
  /// [r == s] N c_r(h)
  double main = 0.0;
  double residual = 0.0;
  double bound = 0.0;
  /// lemma2_grid records: |sum| <= bound, decided in exact integer arithmetic.
  bool holds = true;

  nlohmann::json to_json() const;
  static std::string csv_header();
  std::string csv_row() const;
};

/// Residuals sum - [r == s] N c_r(h) with bound r s log(r s + 2), for every
/// cell of [1, r_max] x [1, s_max] x h_set x N_set, ordered (N, h, r, s).
std::vector<LemmaResidual> lemma1_grid(std::uint64_t r_max,
                                       std::uint64_t s_max,
                                       std::span<const std::uint64_t> h_set,
                                       std::span<const std::uint64_t> N_set,
                                       const Budget& budget = default_budget());

/// Records with bound d(r) d(s) sqrt(r s N (N + h)); same ordering.
std::vector<LemmaResidual> lemma2_grid(std::uint64_t r_max,
                                       std::uint64_t s_max,
                                       std::span<const std::uint64_t> h_set,
                                       std::span<const std::uint64_t> N_set,
                                       const Budget& budget = default_budget());

struct Lemma1Stability {
  std::uint64_t fit_N = 0;
  /// max |residual| / (r s log(r s + 2)) over the cells at fit_N.
  double fitted_constant = 0.0;
  std::map<std::uint64_t, double> per_shift_constant;
  /// max of the same ratio over the cells at larger N.
  double worst_later_ratio = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

/// Fits the constant at the smallest N in `records` and checks that no
/// record at a larger N exceeds it.
Lemma1Stability lemma1_stability(std::span<const LemmaResidual> records);

struct Lemma2Summary {
  std::size_t records = 0;
  std::size_t violations = 0;
  /// max |sum| / bound, reported for tightness.
  double max_ratio = 0.0;
};

Lemma2Summary summarize_lemma2(std::span<const LemmaResidual> records);

// --- average orders ------------------------------------------------------

inline constexpr double kPhiResidualLimit = 1.0;

struct AverageOrderRow {
  std::uint64_t x = 0;
  std::int64_t phi_sum = 0;
  /// (sum phi - 3 x^2 / pi^2) / (x log x)
  double phi_ratio = 0.0;
  std::int64_t d4_sum = 0;
  /// (sum d_4 - x (log x)^3 / 6) / (x (log x)^2)
  double d4_ratio = 0.0;
  std::int64_t mertens = 0;
  /// |M(x)| e^{c sqrt(log x)} / x with the fitted c
  double mertens_ratio = 0.0;
};

struct AverageOrderReport {
  std::vector<AverageOrderRow> rows;
  double mertens_constant = 0.0;
  bool phi_bounded = false;
  bool d4_bounded = false;
  bool mertens_bounded = false;

  bool pass() const { return phi_bounded && d4_bounded && mertens_bounded; }
  nlohmann::json to_json() const;
  static std::string csv_header();
  std::vector<std::string> csv_rows() const;
};

/// Largest c with |M(x)| <= x e^{-c sqrt(log x)} at every grid point where
/// M(x) != 0 and x > 1. Returns +inf when no point constrains c.
double fit_mertens_constant(const MertensValues& mertens,
                            std::span<const std::uint64_t> x_grid);

AverageOrderReport average_order_checks(
    std::span<const std::uint64_t> x_grid,
    const Budget& budget = default_budget());

// --- partial sums of c_r(h) ----------------------------------------------

struct CrhRow {
  std::uint64_t h = 0;
  std::uint64_t x = 0;
  std::int64_t identity_value = 0;
  std::int64_t direct_value = 0;
  /// |sum_{r <= x} c_r(h)| / (x e^{-c sqrt(log x)})
  double growth_ratio = 0.0;
  /// e^{c sqrt(log h)} d(h), the allowed size of growth_ratio
  double shift_envelope = 0.0;
};

struct CrhReport {
  std::vector<CrhRow> rows;
  double mertens_constant = 0.0;
  bool routes_agree = false;
  bool bounded = false;

  bool pass() const { return routes_agree && bounded; }
  nlohmann::json to_json() const;
  static std::string csv_header();
  std::vector<std::string> csv_rows() const;
};

/// For each (h, x), evaluates sum_{r <= x} c_r(h) through Mertens values
/// and term by term, and compares its growth with x e^{-c sqrt(log x)}
/// using the Mertens constant fitted on x_grid.
CrhReport crh_growth_check(std::span<const std::uint64_t> h_set,
                           std::span<const std::uint64_t> x_grid,
                           const Budget& budget = default_budget());

// --- exponent fitting ----------------------------------------------------

struct ErrorFit {
  /// (N, |residual|) pairs used in the fit.
  std::vector<std::pair<double, double>> points;
  double alpha = 0.0;
  double log_c = 0.0;
  double r_squared = 0.0;
  /// Set when every residual was zero; alpha is then meaningless.
  bool exact_match = false;

  nlohmann::json to_json() const;
};

/// Least squares of log|E| = alpha log N + log c. Zero residuals are
/// dropped. Throws DegenerateInput with fewer than four distinct N.
ErrorFit fit_error_exponent(std::span<const std::pair<double, double>> points);

ErrorFit fit_error_exponent(std::span<const CorrelationReport> reports);

/// Slack allowed above the exponent 2 / (1 + 2 delta).
inline constexpr double kExponentSlack = 0.1;

struct ExponentCheck {
  ErrorFit fit;
  double delta = 0.0;
  double theoretical_alpha = 0.0;
  /// |E| / (N^{2/(1+2 delta)} (log N)^{(5+2 delta)/(1+2 delta)}) per N.
  std::vector<double> normalized_residuals;
  bool alpha_ok = false;
  bool no_growth_ok = false;

  bool pass() const { return alpha_ok && no_growth_ok; }
  nlohmann::json to_json() const;
};

ExponentCheck exponent_check(std::span<const CorrelationReport> reports);

}  // namespace parseval
