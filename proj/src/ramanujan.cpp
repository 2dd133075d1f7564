#include "parseval/ramanujan.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <fmt/format.h>

#include "parseval/closed_forms.hpp"
#include "parseval/detail/compensated.hpp"
#include "parseval/detail/parallel.hpp"

namespace parseval {

namespace {

std::int64_t narrow(__int128 value, const char* what) {
  if (value > std::numeric_limits<std::int64_t>::max() ||
      value < std::numeric_limits<std::int64_t>::min()) {
    throw OverflowError(fmt::format("{} exceeds 64 bits", what));
  }
  return static_cast<std::int64_t>(value);
}

// mu(r / d) from the factorisation of r, for d | r.
std::int64_t mobius_of_quotient(
    const std::vector<std::pair<std::uint64_t, unsigned>>& r_factors,
    std::uint64_t d) {
  std::int64_t sign = 1;
  for (const auto& [p, e] : r_factors) {
    unsigned in_d = 0;
    while (d % p == 0) {
      d /= p;
      ++in_d;
    }
    const unsigned left = e - in_d;
    if (left > 1) return 0;
    if (left == 1) sign = -sign;
  }
  return sign;
}

// Inverse of a modulo m for gcd(a, m) = 1, m >= 2.
std::int64_t inverse_mod(std::int64_t a, std::int64_t m) {
  std::int64_t old_r = a % m, r = m, old_s = 1, s = 0;
  while (r != 0) {
    const std::int64_t q = old_r / r;
    std::tie(old_r, r) = std::make_pair(r, old_r - q * r);
    std::tie(old_s, s) = std::make_pair(s, old_s - q * s);
  }
  std::int64_t inv = old_s % m;
  return inv < 0 ? inv + m : inv;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// #{1 <= n <= N : a | n and b | n + h}
std::uint64_t count_residue_class(std::uint64_t a, std::uint64_t b,
                                  std::uint64_t h, std::uint64_t N) {
  const std::uint64_t g = std::gcd(a, b);
  if (h % g != 0) return 0;
  const std::uint64_t K = N / a;  // n = a k with 1 <= k <= K
  const std::uint64_t modulus = b / g;
  if (modulus == 1) return K;
  const auto m = static_cast<std::int64_t>(modulus);
  const auto rhs = static_cast<std::int64_t>((modulus - (h / g) % modulus) % modulus);
  const std::int64_t inv = inverse_mod(static_cast<std::int64_t>((a / g) % modulus), m);
  const auto k0 = static_cast<std::int64_t>((static_cast<__int128>(rhs) * inv) % m);
  const std::int64_t count =
      floor_div(static_cast<std::int64_t>(K) - k0, m) + (k0 > 0 ? 1 : 0);
  return count > 0 ? static_cast<std::uint64_t>(count) : 0;
}

}  // namespace

std::int64_t ramanujan_sum(std::uint64_t r, std::uint64_t n) {
  if (r == 0) throw DomainError("ramanujan_sum: r must be >= 1");
  const std::uint64_t g = std::gcd(n, r);
  const auto r_factors = factorize(r);
  __int128 total = 0;
  for (std::uint64_t d = 1; d * d <= g; ++d) {
    if (g % d != 0) continue;
    total += static_cast<__int128>(mobius_of_quotient(r_factors, d)) * d;
    const std::uint64_t e = g / d;
    if (e != d) total += static_cast<__int128>(mobius_of_quotient(r_factors, e)) * e;
  }
  return narrow(total, "ramanujan_sum");
}

OracleValue ramanujan_sum_oracle(std::uint64_t r, std::uint64_t n) {
  if (r == 0 || r > kOracleMaxModulus) {
    throw DomainError(fmt::format(
        "ramanujan_sum_oracle: r must be in [1, {}]", kOracleMaxModulus));
  }
  const std::uint64_t n_mod = n % r;
  detail::CompensatedSum re;
  for (std::uint64_t a = 1; a <= r; ++a) {
    if (std::gcd(a, r) != 1) continue;
    const std::uint64_t k = (a * n_mod) % r;
    re.add(std::cos(2.0 * std::numbers::pi * static_cast<double>(k) /
                    static_cast<double>(r)));
  }
  const double value = re.value();
  const double rounded = std::nearbyint(value);
  const double distance = std::abs(value - rounded);
  if (distance > 1e-6) {
    throw NumericalFailure(fmt::format(
        "exponential sum for c_{}({}) is {} units from an integer", r, n,
        distance));
  }
  return {static_cast<std::int64_t>(rounded), distance};
}

std::vector<std::int64_t> ramanujan_sums_in_r(std::uint64_t h,
                                              std::uint64_t r_max) {
  std::vector<std::int64_t> c(r_max + 1, 0);
  if (r_max == 0) return c;
  c[1] = 1;
  const auto spf = smallest_prime_factors(r_max);
  for (std::uint64_t r = 2; r <= r_max; ++r) {
    const std::uint64_t p = spf[r];
    std::uint64_t m = r, pe = 1;
    unsigned e = 0;
    while (m % p == 0) {
      m /= p;
      pe *= p;
      ++e;
    }
    // c_{p^e}(h): phi(p^e) if p^e | h, -p^{e-1} if exactly p^{e-1} | h, else 0.
    unsigned v = 0;
    if (h == 0) {
      v = e;
    } else {
      for (std::uint64_t hh = h; hh % p == 0 && v < e; hh /= p) ++v;
    }
    std::int64_t local = 0;
    const auto prev = static_cast<std::int64_t>(pe / p);
    if (v >= e) {
      local = static_cast<std::int64_t>(pe) - prev;
    } else if (v + 1 == e) {
      local = -prev;
    }
    c[r] = c[m] * local;
  }
  return c;
}

std::int64_t ramanujan_partial_sum(std::uint64_t h, double x,
                                   const MertensValues& mertens) {
  if (h == 0) throw DomainError("ramanujan_partial_sum: h must be >= 1");
  if (!(x >= 1.0)) throw DomainError("ramanujan_partial_sum: x must be >= 1");
  const auto X = static_cast<std::uint64_t>(std::floor(x));
  if (X > mertens.limit()) {
    throw LimitExceeded("ramanujan_partial_sum: Mertens table too short");
  }
  __int128 total = 0;
  for (std::uint64_t d : divisors(h)) {
    total += static_cast<__int128>(d) * mertens(X / d);
  }
  return narrow(total, "ramanujan_partial_sum");
}

std::int64_t ramanujan_partial_sum(std::uint64_t h, double x,
                                   const Budget& budget) {
  if (!(x >= 1.0)) throw DomainError("ramanujan_partial_sum: x must be >= 1");
  const auto X = static_cast<std::uint64_t>(std::floor(x));
  return ramanujan_partial_sum(h, x, mertens_values(X, budget));
}

std::int64_t ramanujan_partial_sum_direct(std::uint64_t h, double x) {
  if (h == 0) throw DomainError("ramanujan_partial_sum_direct: h must be >= 1");
  if (!(x >= 1.0)) throw DomainError("ramanujan_partial_sum_direct: x must be >= 1");
  const auto X = static_cast<std::uint64_t>(std::floor(x));
  const auto c = ramanujan_sums_in_r(h, X);
  __int128 total = 0;
  for (std::uint64_t r = 1; r <= X; ++r) total += c[r];
  return narrow(total, "ramanujan_partial_sum_direct");
}

std::vector<DivisorTerm> ramanujan_divisor_terms(std::uint64_t r) {
  if (r == 0) throw DomainError("ramanujan_divisor_terms: r must be >= 1");
  const auto r_factors = factorize(r);
  std::vector<DivisorTerm> terms;
  for (std::uint64_t d : divisors(r)) {
    const std::int64_t mu = mobius_of_quotient(r_factors, d);
    if (mu != 0) terms.push_back({d, mu * static_cast<std::int64_t>(d)});
  }
  return terms;
}

std::int64_t ramanujan_pair_sum(std::span<const DivisorTerm> r_terms,
                                std::span<const DivisorTerm> s_terms,
                                std::uint64_t h, std::uint64_t N) {
  __int128 total = 0;
  for (const auto& a : r_terms) {
    for (const auto& b : s_terms) {
      const std::uint64_t count = count_residue_class(a.d, b.d, h, N);
      if (count == 0) continue;
      total += static_cast<__int128>(a.weight) * b.weight *
               static_cast<__int128>(count);
    }
  }
  return narrow(total, "ramanujan_pair_sum");
}

std::int64_t ramanujan_pair_sum(std::uint64_t r, std::uint64_t s,
                                std::uint64_t h, std::uint64_t N) {
  if (r == 0 || s == 0) throw DomainError("ramanujan_pair_sum: r, s >= 1");
  const auto r_terms = ramanujan_divisor_terms(r);
  const auto s_terms = ramanujan_divisor_terms(s);
  return ramanujan_pair_sum(r_terms, s_terms, h, N);
}

// --- table ---------------------------------------------------------------

RamanujanSumTable::RamanujanSumTable(std::uint64_t r_max, std::uint64_t n_max,
                                     unsigned threads)
    : r_max_(r_max), n_max_(n_max) {
  if (r_max == 0) throw DomainError("RamanujanSumTable: r_max must be >= 1");
  const Budget budget = default_budget();
  const double bytes = 8.0 * static_cast<double>(r_max) *
                       (static_cast<double>(n_max) + 1.0);
  if (bytes > static_cast<double>(budget.memory_bytes)) {
    throw LimitExceeded("RamanujanSumTable: grid above the memory budget");
  }
  values_.resize(static_cast<Eigen::Index>(r_max),
                 static_cast<Eigen::Index>(n_max + 1));
  detail::parallel_for(r_max, threads, [&](std::size_t row) {
    const std::uint64_t r = row + 1;
    std::vector<std::int64_t> period(r);
    for (std::uint64_t n = 0; n < r; ++n) period[n] = ramanujan_sum(r, n);
    for (std::uint64_t n = 0; n <= n_max; ++n) {
      values_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(n)) =
          period[n % r];
    }
  });
}

void RamanujanSumTable::write_csv(std::ostream& out) const {
  out << "# parseval-csv v1 table=ramanujan_sums\n";
  out << "r,n,value\n";
  for (std::uint64_t r = 1; r <= r_max_; ++r) {
    for (std::uint64_t n = 0; n <= n_max_; ++n) {
      out << fmt::format("{},{},{}\n", r, n, (*this)(r, n));
    }
  }
}

// --- coefficient families ------------------------------------------------

double power_tail(std::uint64_t R, double exponent) {
  if (!(exponent > 0.0)) throw DomainError("power_tail: exponent must be > 0");
  if (R == 0) throw DomainError("power_tail: R must be >= 1");
  return std::pow(static_cast<double>(R), -exponent) / exponent;
}

CoefficientFamily CoefficientFamily::sigma(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("sigma family: s must be > 0");
  }
  CoefficientFamily family;
  family.kind_ = FamilyKind::sigma;
  family.name_ = "sigma";
  family.s_ = s;
  family.delta_ = s;
  family.zeta_shift_ = zeta_real(s + 1.0);
  family.tail_constant_ = family.zeta_shift_;
  const double zeta = family.zeta_shift_;
  family.rule_ = [zeta, s](std::uint64_t r) {
    return zeta * std::pow(static_cast<double>(r), -(s + 1.0));
  };
  return family;
}

CoefficientFamily CoefficientFamily::phi(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw DomainError("phi family: s must be > 0");
  }
  CoefficientFamily family;
  family.kind_ = FamilyKind::phi;
  family.name_ = "phi";
  family.s_ = s;
  family.delta_ = s;
  family.zeta_shift_ = zeta_real(s + 1.0);
  // r^{s+1} / phi_{s+1}(r) <= zeta(s+1), so |f^(r)| <= r^{-(s+1)}.
  family.tail_constant_ = 1.0;
  const double zeta = family.zeta_shift_;
  family.rule_ = [zeta, s](std::uint64_t r) {
    const double z = s + 1.0;
    double phi_z = std::pow(static_cast<double>(r), z);
    std::int64_t mu = 1;
    for (const auto& [p, e] : factorize(r)) {
      if (e > 1) return 0.0;
      mu = -mu;
      phi_z *= 1.0 - std::pow(static_cast<double>(p), -z);
    }
    return static_cast<double>(mu) / (zeta * phi_z);
  };
  return family;
}

CoefficientFamily CoefficientFamily::custom(std::string name, Rule rule,
                                            double tail_constant,
                                            double delta) {
  if (!rule) throw DomainError("custom family needs a rule");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("custom family: delta must be > 0");
  }
  if (!(tail_constant > 0.0) || !std::isfinite(tail_constant)) {
    throw DomainError("custom family: C must be > 0");
  }
  CoefficientFamily family;
  family.kind_ = FamilyKind::custom;
  family.name_ = std::move(name);
  family.delta_ = delta;
  family.tail_constant_ = tail_constant;
  family.rule_ = std::move(rule);
  const double ratio = family.decay_ratio();
  if (!(ratio <= 1.0 + 1e-12)) {
    throw DomainError(fmt::format(
        "custom family '{}' violates |f(r)| <= {} r^-(1+{}) (ratio {})",
        family.name_, tail_constant, delta, ratio));
  }
  return family;
}

CoefficientFamily CoefficientFamily::from_descriptor(
    const nlohmann::json& descriptor) {
  if (!descriptor.is_object() || !descriptor.contains("family") ||
      !descriptor.contains("s")) {
    throw FormatError("family descriptor needs 'family' and 's'");
  }
  const auto family_name = descriptor.at("family").get<std::string>();
  const double s = descriptor.at("s").get<double>();
  CoefficientFamily family = [&] {
    if (family_name == "sigma") return sigma(s);
    if (family_name == "phi") return phi(s);
    throw FormatError(fmt::format(
        "family '{}' cannot be rebuilt from a descriptor", family_name));
  }();
  if (descriptor.contains("delta") &&
      descriptor.at("delta").get<double>() != family.delta()) {
    throw FormatError("descriptor delta does not match the family");
  }
  return family;
}

double CoefficientFamily::operator()(std::uint64_t r) const {
  if (r == 0) throw DomainError("coefficients are indexed from r = 1");
  return rule_(r);
}

Eigen::VectorXd CoefficientFamily::coefficients(std::uint64_t r_max) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(r_max + 1));
  if (r_max == 0) return out;
  if (kind_ == FamilyKind::phi) {
    Budget budget = default_budget();
    const auto mu = sieve_mobius(r_max, budget);
    const auto ratio = sieve_phi_ratio(s_ + 1.0, r_max, budget);
    for (std::uint64_t r = 1; r <= r_max; ++r) {
      if (mu(r) == 0) continue;
      const double phi_z = std::pow(static_cast<double>(r), s_ + 1.0) * ratio(r);
      out(r) = static_cast<double>(mu(r)) / (zeta_shift_ * phi_z);
    }
    return out;
  }
  for (std::uint64_t r = 1; r <= r_max; ++r) out(r) = rule_(r);
  return out;
}

double CoefficientFamily::decay_ratio(std::uint64_t limit) const {
  const Eigen::VectorXd c = coefficients(limit);
  double worst = 0.0;
  for (std::uint64_t r = 1; r <= limit; ++r) {
    const double scaled = std::abs(c(r)) *
                          std::pow(static_cast<double>(r), 1.0 + delta_) /
                          tail_constant_;
    worst = std::max(worst, scaled);
  }
  return worst;
}

nlohmann::json CoefficientFamily::descriptor() const {
  nlohmann::json j;
  j["family"] = kind_ == FamilyKind::custom ? "custom" : name_;
  if (kind_ == FamilyKind::custom) j["name"] = name_;
  j["s"] = s_;
  j["delta"] = delta_;
  j["C"] = tail_constant_;
  return j;
}

ExpansionValue truncated_expansion(const CoefficientFamily& family,
                                   std::uint64_t n, std::uint64_t R) {
  if (n == 0) throw DomainError("truncated_expansion: n must be >= 1");
  if (R == 0) throw DomainError("truncated_expansion: R must be >= 1");
  const Eigen::VectorXd coeff = family.coefficients(R);
  const auto c = ramanujan_sums_in_r(n, R);
  detail::CompensatedSum acc;
  for (std::uint64_t r = 1; r <= R; ++r) {
    if (c[r] != 0) acc.add(coeff(r) * static_cast<double>(c[r]));
  }
  const double envelope = static_cast<double>(divisor_sum(n));
  const double rounding = 32.0 * std::numeric_limits<double>::epsilon() * acc.abs_total();
  return {acc.value(),
          family.tail_constant() * envelope * power_tail(R, family.delta()) +
              rounding};
}

}  // namespace parseval
