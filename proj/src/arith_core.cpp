#include "parseval/arith_core.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>

#include <fmt/format.h>

#include "parseval/detail/compensated.hpp"
#include "parseval/detail/parallel.hpp"

namespace parseval {

// --- configuration -------------------------------------------------------

std::uint64_t parse_byte_count(const char* text) {
  if (text == nullptr || *text == '\0') {
    throw DomainError("empty byte count");
  }
  char* end = nullptr;
  const unsigned long long base = std::strtoull(text, &end, 10);
  if (end == text) throw DomainError(fmt::format("bad byte count '{}'", text));
  std::uint64_t scale = 1;
  if (*end != '\0') {
    switch (std::toupper(static_cast<unsigned char>(*end))) {
      case 'K': scale = std::uint64_t{1} << 10; break;
      case 'M': scale = std::uint64_t{1} << 20; break;
      case 'G': scale = std::uint64_t{1} << 30; break;
      default: throw DomainError(fmt::format("bad byte count '{}'", text));
    }
    if (end[1] != '\0') {
      throw DomainError(fmt::format("bad byte count '{}'", text));
    }
  }
  if (base > std::numeric_limits<std::uint64_t>::max() / scale) {
    throw DomainError(fmt::format("byte count '{}' too large", text));
  }
  return base * scale;
}

Budget default_budget() {
  Budget budget;
  if (const char* env = std::getenv(kMemoryBudgetEnv)) {
    budget.memory_bytes = parse_byte_count(env);
  }
  return budget;
}

std::string_view to_string(TableKind kind) {
  switch (kind) {
    case TableKind::mobius: return "mobius";
    case TableKind::euler_phi: return "euler_phi";
    case TableKind::divisor_k: return "d_k";
    case TableKind::sigma_ratio: return "sigma_ratio";
    case TableKind::phi_ratio: return "phi_ratio";
    case TableKind::constant: return "constant";
  }
  return "unknown";
}

TableKind table_kind_from_string(std::string_view name) {
  for (auto kind : {TableKind::mobius, TableKind::euler_phi,
                    TableKind::divisor_k, TableKind::sigma_ratio,
                    TableKind::phi_ratio, TableKind::constant}) {
    if (to_string(kind) == name) return kind;
  }
  throw DomainError(fmt::format("unknown table kind '{}'", name));
}

namespace {

void require_limit(std::uint64_t limit, const char* what) {
  if (limit == 0) throw DomainError(fmt::format("{}: limit must be >= 1", what));
}

void check_budget(std::uint64_t limit, std::uint64_t bytes_per_entry,
                  const Budget& budget, const char* what) {
  const std::uint64_t slots = limit + 1;
  if (slots > budget.memory_bytes / bytes_per_entry) {
    throw LimitExceeded(fmt::format(
        "{}: N = {} needs about {} bytes, above the memory budget of {}",
        what, limit, static_cast<double>(slots) * bytes_per_entry,
        budget.memory_bytes));
  }
}

bool use_segmented(std::uint64_t limit, const Budget& budget) {
  return limit > budget.segment_threshold ||
         limit >= std::numeric_limits<std::uint32_t>::max();
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_mul_overflow(a, b, &out)) {
    throw OverflowError("integer table value exceeds 64 bits");
  }
  return out;
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t out;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("integer table value exceeds 64 bits");
  }
  return out;
}

// Linear (Euler) sieve for a multiplicative function. prime_value(p, i)
// gives f(p) for the i-th prime; extend(f(m), p, i, p_divides_m) gives
// f(m p) where p is at most the smallest prime factor of m.
template <typename Scalar, typename PrimeValue, typename Extend>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> linear_sieve(std::uint64_t limit,
                                                      PrimeValue prime_value,
                                                      Extend extend) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(limit + 1);
  v.setZero();
  v(1) = Scalar(1);
  std::vector<std::uint32_t> spf(limit + 1, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      spf[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
      v(i) = prime_value(i, primes.size() - 1);
    }
    for (std::size_t j = 0; j < primes.size(); ++j) {
      const std::uint64_t p = primes[j];
      if (p > spf[i] || i * p > limit) break;
      spf[i * p] = static_cast<std::uint32_t>(p);
      v(i * p) = extend(v(i), p, j, p == spf[i]);
    }
  }
  return v;
}

// Segmented factorisation sieve for a multiplicative function given by its
// prime-power values. Segments are independent and written in place.
template <typename Scalar, typename PrimePower, typename Multiply>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> segmented_sieve(
    std::uint64_t limit, const Budget& budget, PrimePower prime_power,
    Multiply multiply) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v(limit + 1);
  v.setZero();
  const auto root = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(limit))) + 1;
  const std::vector<std::uint64_t> small = primes_up_to(root);
  const std::uint64_t length = std::max<std::uint64_t>(budget.segment_length, 64);
  const std::uint64_t segments = (limit + length - 1) / length;

  detail::parallel_for(segments, budget.threads, [&](std::size_t seg) {
    const std::uint64_t lo = 1 + seg * length;
    const std::uint64_t hi = std::min(limit + 1, lo + length);
    std::vector<std::uint64_t> rem(hi - lo);
    std::iota(rem.begin(), rem.end(), lo);
    for (std::uint64_t n = lo; n < hi; ++n) v(n) = Scalar(1);
    for (std::uint64_t p : small) {
      if (p * p >= hi) break;
      for (std::uint64_t m = (lo + p - 1) / p * p; m < hi; m += p) {
        std::uint64_t& r = rem[m - lo];
        unsigned e = 0;
        while (r % p == 0) {
          r /= p;
          ++e;
        }
        v(m) = multiply(v(m), prime_power(p, e));
      }
    }
    for (std::uint64_t n = lo; n < hi; ++n) {
      if (rem[n - lo] > 1) v(n) = multiply(v(n), prime_power(rem[n - lo], 1u));
    }
  });
  return v;
}

std::int64_t binomial_checked(std::int64_t n, std::int64_t k) {
  std::int64_t b = 1;
  for (std::int64_t j = 1; j <= k; ++j) {
    b = checked_mul(b, n - k + j) / j;
  }
  return b;
}

}  // namespace

// --- prime helpers -------------------------------------------------------

std::vector<std::uint32_t> smallest_prime_factors(std::uint64_t limit) {
  if (limit >= std::numeric_limits<std::uint32_t>::max()) {
    throw LimitExceeded("smallest_prime_factors: limit must fit 32 bits");
  }
  std::vector<std::uint32_t> spf(limit + 1, 0);
  std::vector<std::uint32_t> primes;
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (spf[i] == 0) {
      spf[i] = static_cast<std::uint32_t>(i);
      primes.push_back(static_cast<std::uint32_t>(i));
    }
    for (std::uint32_t p : primes) {
      if (p > spf[i] || i * p > limit) break;
      spf[i * p] = p;
    }
  }
  return spf;
}

std::vector<std::uint64_t> primes_up_to(std::uint64_t limit) {
  std::vector<std::uint64_t> primes;
  if (limit < 2) return primes;
  std::vector<bool> composite(limit + 1, false);
  for (std::uint64_t i = 2; i <= limit; ++i) {
    if (composite[i]) continue;
    primes.push_back(i);
    for (std::uint64_t m = i * i; m <= limit; m += i) composite[m] = true;
  }
  return primes;
}

std::vector<std::pair<std::uint64_t, unsigned>> factorize(std::uint64_t n) {
  std::vector<std::pair<std::uint64_t, unsigned>> out;
  for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    unsigned e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1u);
  return out;
}

std::vector<std::uint64_t> divisors(std::uint64_t n) {
  std::vector<std::uint64_t> low, high;
  for (std::uint64_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    low.push_back(d);
    if (d != n / d) high.push_back(n / d);
  }
  low.insert(low.end(), high.rbegin(), high.rend());
  return low;
}

std::int64_t mobius(std::uint64_t n) {
  std::int64_t sign = 1;
  for (const auto& [p, e] : factorize(n)) {
    if (e > 1) return 0;
    sign = -sign;
  }
  return sign;
}

std::uint64_t divisor_sum(std::uint64_t n) {
  std::uint64_t total = 0;
  for (std::uint64_t d : divisors(n)) total += d;
  return total;
}

// --- sieves --------------------------------------------------------------

IntegerTable sieve_mobius(std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "sieve_mobius");
  if (use_segmented(limit, budget)) {
    check_budget(limit, 8, budget, "sieve_mobius");
    auto v = segmented_sieve<std::int64_t>(
        limit, budget,
        [](std::uint64_t, unsigned e) -> std::int64_t { return e == 1 ? -1 : 0; },
        [](std::int64_t a, std::int64_t b) { return a * b; });
    return {TableKind::mobius, limit, 0.0, std::move(v)};
  }
  check_budget(limit, 12, budget, "sieve_mobius");
  auto v = linear_sieve<std::int64_t>(
      limit, [](std::uint64_t, std::size_t) { return std::int64_t{-1}; },
      [](std::int64_t m, std::uint64_t, std::size_t, bool divides) {
        return divides ? std::int64_t{0} : -m;
      });
  return {TableKind::mobius, limit, 0.0, std::move(v)};
}

IntegerTable sieve_euler_phi(std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "sieve_euler_phi");
  if (use_segmented(limit, budget)) {
    check_budget(limit, 8, budget, "sieve_euler_phi");
    auto v = segmented_sieve<std::int64_t>(
        limit, budget,
        [](std::uint64_t p, unsigned e) {
          std::int64_t value = static_cast<std::int64_t>(p) - 1;
          for (unsigned j = 1; j < e; ++j) value *= static_cast<std::int64_t>(p);
          return value;
        },
        [](std::int64_t a, std::int64_t b) { return a * b; });
    return {TableKind::euler_phi, limit, 0.0, std::move(v)};
  }
  check_budget(limit, 12, budget, "sieve_euler_phi");
  auto v = linear_sieve<std::int64_t>(
      limit,
      [](std::uint64_t p, std::size_t) { return static_cast<std::int64_t>(p) - 1; },
      [](std::int64_t m, std::uint64_t p, std::size_t, bool divides) {
        const auto ip = static_cast<std::int64_t>(p);
        return divides ? m * ip : m * (ip - 1);
      });
  return {TableKind::euler_phi, limit, 0.0, std::move(v)};
}

IntegerTable sieve_dk(int k, std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "sieve_dk");
  if (k < 2) throw DomainError("sieve_dk: k must be >= 2");
  if (use_segmented(limit, budget)) {
    check_budget(limit, 8, budget, "sieve_dk");
    auto v = segmented_sieve<std::int64_t>(
        limit, budget,
        [k](std::uint64_t, unsigned e) {
          return binomial_checked(static_cast<std::int64_t>(e) + k - 1, e);
        },
        checked_mul);
    return {TableKind::divisor_k, limit, static_cast<double>(k), std::move(v)};
  }
  check_budget(limit, 16, budget, "sieve_dk");
  // d_j = d_{j-1} * 1 (Dirichlet convolution), starting from d_1 = 1.
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> current(limit + 1);
  current.setOnes();
  current(0) = 0;
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> next(limit + 1);
  for (int j = 2; j <= k; ++j) {
    next.setZero();
    for (std::uint64_t a = 1; a <= limit; ++a) {
      const std::int64_t w = current(a);
      for (std::uint64_t m = a; m <= limit; m += a) {
        next(m) = checked_add(next(m), w);
      }
    }
    current.swap(next);
  }
  return {TableKind::divisor_k, limit, static_cast<double>(k), std::move(current)};
}

RealTable sieve_sigma_ratio(double s, std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "sieve_sigma_ratio");
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("sieve_sigma_ratio: s must be > 0");
  }
  if (use_segmented(limit, budget)) {
    check_budget(limit, 8, budget, "sieve_sigma_ratio");
    auto v = segmented_sieve<double>(
        limit, budget,
        [s](std::uint64_t p, unsigned e) {
          const double w = std::exp(-s * std::log(static_cast<double>(p)));
          double term = 1.0, sum = 1.0;
          for (unsigned j = 0; j < e; ++j) {
            term *= w;
            sum += term;
          }
          return sum;
        },
        [](double a, double b) { return a * b; });
    return {TableKind::sigma_ratio, limit, s, std::move(v)};
  }
  check_budget(limit, 16, budget, "sieve_sigma_ratio");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(limit + 1));
  for (std::uint64_t d = 1; d <= limit; ++d) {
    const double w = std::exp(-s * std::log(static_cast<double>(d)));
    for (std::uint64_t m = d; m <= limit; m += d) v(m) += w;
  }
  return {TableKind::sigma_ratio, limit, s, std::move(v)};
}

RealTable sieve_phi_ratio(double s, std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "sieve_phi_ratio");
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("sieve_phi_ratio: s must be > 0");
  }
  auto factor = [s](std::uint64_t p) {
    return 1.0 - std::exp(-s * std::log(static_cast<double>(p)));
  };
  if (use_segmented(limit, budget)) {
    check_budget(limit, 8, budget, "sieve_phi_ratio");
    auto v = segmented_sieve<double>(
        limit, budget, [&](std::uint64_t p, unsigned) { return factor(p); },
        [](double a, double b) { return a * b; });
    return {TableKind::phi_ratio, limit, s, std::move(v)};
  }
  check_budget(limit, 12, budget, "sieve_phi_ratio");
  std::vector<double> prime_factor;
  auto v = linear_sieve<double>(
      limit,
      [&](std::uint64_t p, std::size_t) {
        prime_factor.push_back(factor(p));
        return prime_factor.back();
      },
      [&](double m, std::uint64_t, std::size_t index, bool divides) {
        return divides ? m : m * prime_factor[index];
      });
  return {TableKind::phi_ratio, limit, s, std::move(v)};
}

RealTable constant_table(double value, std::uint64_t limit, const Budget& budget) {
  require_limit(limit, "constant_table");
  check_budget(limit, 8, budget, "constant_table");
  Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(limit + 1), value);
  v(0) = 0.0;
  return {TableKind::constant, limit, value, std::move(v)};
}

std::int64_t prefix_sum(const IntegerTable& table, std::uint64_t n) {
  if (n > table.limit()) throw LimitExceeded("prefix_sum: n beyond table limit");
  __int128 acc = 0;
  for (std::uint64_t k = 1; k <= n; ++k) acc += table(k);
  if (acc > std::numeric_limits<std::int64_t>::max() ||
      acc < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError("prefix_sum exceeds 64 bits");
  }
  return static_cast<std::int64_t>(acc);
}

// --- Mertens -------------------------------------------------------------

MertensValues::MertensValues(const IntegerTable& mobius_table)
    : limit_(mobius_table.limit()), prefix_(mobius_table.limit() + 1) {
  if (mobius_table.kind() != TableKind::mobius) {
    throw DomainError("MertensValues needs a Mobius table");
  }
  prefix_(0) = 0;
  for (std::uint64_t n = 1; n <= limit_; ++n) {
    prefix_(n) = prefix_(n - 1) + mobius_table(n);
  }
}

std::int64_t MertensValues::at(double x) const {
  if (!(x >= 1.0)) return 0;
  const double floor_x = std::floor(x);
  if (floor_x > static_cast<double>(limit_)) {
    throw LimitExceeded(fmt::format("M({}) needs a table beyond {}", x, limit_));
  }
  return (*this)(static_cast<std::uint64_t>(floor_x));
}

MertensValues mertens_values(std::uint64_t limit, const Budget& budget) {
  return MertensValues(sieve_mobius(limit, budget));
}

// --- partial summation ---------------------------------------------------

namespace {

double simpson_step(const RealFunction& fn, double lo, double hi, double f_lo,
                    double f_mid, double f_hi, double whole, double tolerance,
                    int depth) {
  const double mid = 0.5 * (lo + hi);
  const double left_mid = 0.5 * (lo + mid);
  const double right_mid = 0.5 * (mid + hi);
  const double f_lm = fn(left_mid);
  const double f_rm = fn(right_mid);
  const double left = (mid - lo) / 6.0 * (f_lo + 4.0 * f_lm + f_mid);
  const double right = (hi - mid) / 6.0 * (f_mid + 4.0 * f_rm + f_hi);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tolerance) {
    return left + right + delta / 15.0;
  }
  return simpson_step(fn, lo, mid, f_lo, f_lm, f_mid, left, 0.5 * tolerance,
                      depth - 1) +
         simpson_step(fn, mid, hi, f_mid, f_rm, f_hi, right, 0.5 * tolerance,
                      depth - 1);
}

void check_derivative(const RealFunction& f, const RealFunction& f_prime,
                      double x) {
  constexpr double kRelTol = 1e-6;
  const double eps = std::numeric_limits<double>::epsilon();
  for (double frac : {0.25, 0.5, 0.75}) {
    const double t = 1.0 + (x - 1.0) * frac;
    const double step = 1e-4 * std::max(1.0, std::abs(t));
    const double up = f(t + step);
    const double down = f(t - step);
    const double fd = (up - down) / (2.0 * step);
    const double fp = f_prime(t);
    const double roundoff = 64.0 * eps * std::max(std::abs(up), std::abs(down)) / step;
    const double allowed = kRelTol * std::max(std::abs(fp), std::abs(fd)) + roundoff;
    if (!std::isfinite(fp) || std::abs(fd - fp) > allowed) {
      throw InconsistentDerivative(fmt::format(
          "f'({}) = {} but central difference gives {}", t, fp, fd));
    }
  }
}

}  // namespace

double adaptive_simpson(const RealFunction& fn, double lo, double hi,
                        double tolerance) {
  if (hi <= lo) return 0.0;
  const double f_lo = fn(lo);
  const double f_hi = fn(hi);
  const double f_mid = fn(0.5 * (lo + hi));
  const double whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi);
  return simpson_step(fn, lo, hi, f_lo, f_mid, f_hi, whole, tolerance, 48);
}

double abel_sum(std::span<const double> a, const RealFunction& f,
                const RealFunction& f_prime, double x) {
  if (!(x >= 1.0) || !std::isfinite(x)) {
    throw DomainError("abel_sum: x must be >= 1");
  }
  check_derivative(f, f_prime, x);
  constexpr double kIntervalTolerance = 1e-10;

  const auto last = static_cast<std::uint64_t>(std::floor(x));
  detail::CompensatedSum partial;  // A(n)
  detail::CompensatedSum integral;
  for (std::uint64_t n = 1; n <= last; ++n) {
    if (n <= a.size()) partial.add(a[n - 1]);
    const double A = partial.value();
    const double lo = static_cast<double>(n);
    const double hi = std::min(lo + 1.0, x);
    if (A == 0.0 || hi <= lo) continue;
    integral.add(A * adaptive_simpson(f_prime, lo, hi, kIntervalTolerance));
  }
  return partial.value() * f(x) - integral.value();
}

}  // namespace parseval
