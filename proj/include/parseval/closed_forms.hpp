#pragma once

// Real zeta values, divisor sums with negative exponent, and the main-term
// constants of the shifted correlation sums.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>

#include "json.hpp"
#include "parseval/ramanujan.hpp"

namespace parseval {

/// zeta(z) for real z > 1 + 1e-6, by Euler-Maclaurin summation.
/// Relative error below 1e-12 for z >= 1.5 and below 1e-9 near z = 1.
double zeta_real(double z);

/// Relative error bound used for zeta_real values in tail estimates.
double zeta_relative_error(double z);

/// sigma_{-z}(h) = sum over d | h of d^{-z}. Rejects h = 0.
double sigma_neg(std::uint64_t h, double z);

enum class Route { series_thm1, series_thm2, closed_cor1, euler_cor2 };

std::string_view to_string(Route route);

/// A predicted coefficient of N in sum over n <= N of f(n) g(n + h).
struct MainTermPrediction {
  std::uint64_t h = 0;
  double value = 0.0;
  Route route = Route::series_thm1;
  /// R_max for the series routes, the prime limit P for the Euler product,
  /// zero for the zeta closed form.
  std::uint64_t truncation = 0;
  /// Rigorous bound on |value - exact constant|.
  double tail_estimate = 0.0;
  std::map<std::string, double> params;

  nlohmann::json to_json() const;
};

/// zeta(s+1) zeta(t+1) sigma_{-(s+t+1)}(h) / zeta(s+t+2), the constant for
/// the sigma_s / sigma_t correlation. Requires s, t > 1/2 and h >= 1.
MainTermPrediction cor1_constant(double s, double t, std::uint64_t h);

inline constexpr std::uint64_t kDefaultPrimeLimit = 1'000'000;

/// Euler product for the phi_s / phi_t correlation constant:
///   prod_{p | h}  [(1 - p^{-(s+1)})(1 - p^{-(t+1)}) + (p - 1) p^{-(s+t+2)}]
///   prod_{p !| h} [(1 - p^{-(s+1)})(1 - p^{-(t+1)}) - p^{-(s+t+2)}]
/// with the second product cut at primes <= prime_limit. Primes dividing h
/// are always included; h = 0 counts every prime as a divisor. Requires
/// s, t > 1/2 and prime_limit >= 100.
MainTermPrediction euler_delta(double s, double t, std::uint64_t h,
                               std::uint64_t prime_limit = kDefaultPrimeLimit);

inline constexpr std::uint64_t kDefaultSeriesTruncation = 100'000;

/// sum over r <= r_max of f^(r) g^(r) w(r) with w = phi at h = 0 and
/// w = c_r(h) otherwise. Rejects families with delta <= 1/2 and r_max < 10.
MainTermPrediction main_term_series(
    const CoefficientFamily& f, const CoefficientFamily& g, std::uint64_t h,
    std::uint64_t r_max = kDefaultSeriesTruncation);

/// Closed form when one exists (sigma x sigma or phi x phi with h >= 1),
/// otherwise the series.
MainTermPrediction predict_main_term(
    const CoefficientFamily& f, const CoefficientFamily& g, std::uint64_t h,
    std::uint64_t r_max = kDefaultSeriesTruncation,
    std::uint64_t prime_limit = kDefaultPrimeLimit);

}  // namespace parseval
