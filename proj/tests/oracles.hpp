#pragma once

// Naive reference implementations. Nothing here calls into the library.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <vector>

namespace oracle {

inline std::int64_t mobius(std::uint64_t n) {
  std::int64_t sign = 1;
  for (std::uint64_t p = 2; p * p <= n; ++p) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  return n > 1 ? -sign : sign;
}

inline std::int64_t euler_phi(std::uint64_t n) {
  std::int64_t count = 0;
  for (std::uint64_t k = 1; k <= n; ++k) count += std::gcd(k, n) == 1;
  return count;
}

inline std::int64_t divisor_count(std::uint64_t n) {
  std::int64_t count = 0;
  for (std::uint64_t d = 1; d <= n; ++d) count += n % d == 0;
  return count;
}

// Ordered k-tuples with product n, by recursion on the first factor.
inline std::int64_t dk(int k, std::uint64_t n) {
  if (k == 1) return 1;
  std::int64_t total = 0;
  for (std::uint64_t d = 1; d <= n; ++d) {
    if (n % d == 0) total += dk(k - 1, n / d);
  }
  return total;
}

inline double sigma_ratio(double s, std::uint64_t n) {
  double total = 0.0;
  for (std::uint64_t d = 1; d <= n; ++d) {
    if (n % d == 0) total += std::pow(static_cast<double>(d), -s);
  }
  return total;
}

inline double phi_ratio(double s, std::uint64_t n) {
  double product = 1.0;
  for (std::uint64_t p = 2; p <= n; ++p) {
    if (n % p != 0) continue;
    bool prime = true;
    for (std::uint64_t q = 2; q * q <= p; ++q) prime &= p % q != 0;
    if (prime) product *= 1.0 - std::pow(static_cast<double>(p), -s);
  }
  return product;
}

// Real part of the sum of e^{2 pi i a n / r} over a coprime to r.
inline double ramanujan_exponential(std::uint64_t r, std::uint64_t n) {
  double total = 0.0;
  for (std::uint64_t a = 1; a <= r; ++a) {
    if (std::gcd(a, r) != 1) continue;
    const double angle = 2.0 * std::numbers::pi *
                         static_cast<double>((a * n) % r) /
                         static_cast<double>(r);
    total += std::cos(angle);
  }
  return total;
}

// Direct sum to M plus the integral tail and the half-term correction, with
// M large enough that the remaining error is far below 1e-12.
inline double zeta(double z, std::uint64_t M = 200'000) {
  double total = 0.0;
  for (std::uint64_t n = M; n >= 1; --n) total += std::pow(static_cast<double>(n), -z);
  const double m = static_cast<double>(M);
  return total + std::pow(m, 1.0 - z) / (z - 1.0) - 0.5 * std::pow(m, -z) +
         z * std::pow(m, -z - 1.0) / 12.0;
}

}  // namespace oracle
