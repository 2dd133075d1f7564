#include "parseval/closed_forms.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "parseval/detail/compensated.hpp"

namespace parseval {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Euler-Maclaurin cut: terms n < kZetaCut are summed directly.
constexpr int kZetaCut = 20;

// B_2, B_4, ..., B_18 divided by (2k)!.
constexpr std::array<double, 9> kBernoulliOverFactorial = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
    -3617.0 / 510.0 / 20922789888000.0,
    43867.0 / 798.0 / 6402373705728000.0,
};

struct ZetaEvaluation {
  double value;
  double remainder;  // size of the first omitted correction
};

ZetaEvaluation evaluate_zeta(double z) {
  if (!(z > 1.0 + 1e-6) || !std::isfinite(z)) {
    throw DomainError(fmt::format("zeta_real: need z > 1 + 1e-6, got {}", z));
  }
  detail::CompensatedSum sum;
  for (int n = 1; n < kZetaCut; ++n) {
    sum.add(std::exp(-z * std::log(static_cast<double>(n))));
  }
  const double M = kZetaCut;
  const double M_pow = std::exp(-z * std::log(M));  // M^{-z}
  sum.add(M * M_pow / (z - 1.0));
  sum.add(0.5 * M_pow);
  // Rising factorial z (z+1) ... (z+2k-2) times M^{-z-2k+1}.
  double rising = z;
  double power = M_pow / M;
  const std::size_t corrections = kBernoulliOverFactorial.size() - 1;
  for (std::size_t k = 0; k < corrections; ++k) {
    sum.add(kBernoulliOverFactorial[k] * rising * power);
    rising *= (z + 2.0 * k + 1.0) * (z + 2.0 * k + 2.0);
    power /= M * M;
  }
  const double remainder =
      std::abs(kBernoulliOverFactorial[corrections] * rising * power);
  return {sum.value(), remainder};
}

void require_half(double s, double t, const char* what) {
  if (!(s > 0.5) || !(t > 0.5) || !std::isfinite(s) || !std::isfinite(t)) {
    throw DomainError(fmt::format("{}: need s, t > 1/2 (got {}, {})", what, s, t));
  }
}

}  // namespace

double zeta_real(double z) { return evaluate_zeta(z).value; }

double zeta_relative_error(double z) {
  const auto eval = evaluate_zeta(z);
  return 1e-13 + 2.0 * eval.remainder / eval.value;
}

double sigma_neg(std::uint64_t h, double z) {
  if (h == 0) throw DomainError("sigma_neg: h must be >= 1");
  detail::CompensatedSum sum;
  for (std::uint64_t d : divisors(h)) {
    sum.add(std::exp(-z * std::log(static_cast<double>(d))));
  }
  return sum.value();
}

std::string_view to_string(Route route) {
  switch (route) {
    case Route::series_thm1: return "series_thm1";
    case Route::series_thm2: return "series_thm2";
    case Route::closed_cor1: return "closed_cor1";
    case Route::euler_cor2: return "euler_cor2";
  }
  return "unknown";
}

nlohmann::json MainTermPrediction::to_json() const {
  nlohmann::json j;
  j["h"] = h;
  j["value"] = value;
  j["route"] = std::string(to_string(route));
  j["truncation"] = truncation;
  j["tail_estimate"] = tail_estimate;
  j["params"] = params;
  return j;
}

MainTermPrediction cor1_constant(double s, double t, std::uint64_t h) {
  require_half(s, t, "cor1_constant");
  if (h == 0) {
    throw DomainError(
        "cor1_constant: sigma_{-z}(0) is undefined; use main_term_series for h = 0");
  }
  const double zs = zeta_real(s + 1.0);
  const double zt = zeta_real(t + 1.0);
  const double zst = zeta_real(s + t + 2.0);
  const double sig = sigma_neg(h, s + t + 1.0);
  MainTermPrediction out;
  out.h = h;
  out.route = Route::closed_cor1;
  out.truncation = 0;
  out.value = zs * zt * sig / zst;
  const double rel = zeta_relative_error(s + 1.0) + zeta_relative_error(t + 1.0) +
                     zeta_relative_error(s + t + 2.0) +
                     (8.0 + 4.0 * static_cast<double>(divisors(h).size())) * kEps;
  out.tail_estimate = std::abs(out.value) * rel;
  out.params = {{"s", s}, {"t", t}};
  return out;
}

MainTermPrediction euler_delta(double s, double t, std::uint64_t h,
                               std::uint64_t prime_limit) {
  require_half(s, t, "euler_delta");
  if (prime_limit < 100) throw DomainError("euler_delta: prime limit must be >= 100");

  auto local_factor = [&](double p, bool divides_h) {
    const double a = std::pow(p, -(s + 1.0));
    const double b = std::pow(p, -(t + 1.0));
    const double c = std::pow(p, -(s + t + 2.0));
    return divides_h ? (1.0 - a) * (1.0 - b) + (p - 1.0) * c
                     : (1.0 - a) * (1.0 - b) - c;
  };

  double value = 1.0;
  std::size_t factors = 0;
  std::vector<std::uint64_t> h_primes;
  if (h != 0) {
    for (const auto& [p, e] : factorize(h)) h_primes.push_back(p);
  }
  for (std::uint64_t p : primes_up_to(prime_limit)) {
    const bool divides = (h == 0) || h % p == 0;
    value *= local_factor(static_cast<double>(p), divides);
    ++factors;
  }
  for (std::uint64_t p : h_primes) {
    if (p > prime_limit) {
      value *= local_factor(static_cast<double>(p), true);
      ++factors;
    }
  }

  // Each omitted factor lies within e_p = a + b + c + p c of 1, so the
  // omitted product is within exp(sum e_p) - 1 of 1 (relative).
  const double P = static_cast<double>(prime_limit);
  const double omitted = std::pow(P, -s) / s + std::pow(P, -t) / t +
                         std::pow(P, -(s + t + 1.0)) / (s + t + 1.0) +
                         std::pow(P, -(s + t)) / (s + t);
  MainTermPrediction out;
  out.h = h;
  out.route = Route::euler_cor2;
  out.truncation = prime_limit;
  out.value = value;
  out.tail_estimate = std::abs(value) * (std::expm1(omitted) +
                                         8.0 * static_cast<double>(factors) * kEps);
  out.params = {{"s", s}, {"t", t}};
  return out;
}

MainTermPrediction main_term_series(const CoefficientFamily& f,
                                    const CoefficientFamily& g,
                                    std::uint64_t h, std::uint64_t r_max) {
  if (!(f.delta() > 0.5) || !(g.delta() > 0.5)) {
    throw DomainError(fmt::format(
        "main_term_series: decay exponents must exceed 1/2 (got {}, {})",
        f.delta(), g.delta()));
  }
  if (r_max < 10) throw DomainError("main_term_series: R_max must be >= 10");

  const Eigen::VectorXd cf = f.coefficients(r_max);
  const Eigen::VectorXd cg = g.coefficients(r_max);
  std::vector<std::int64_t> weight;
  if (h == 0) {
    const auto phi = sieve_euler_phi(r_max);
    weight.assign(phi.values().data(), phi.values().data() + r_max + 1);
  } else {
    weight = ramanujan_sums_in_r(h, r_max);
  }
  detail::CompensatedSum sum;
  for (std::uint64_t r = 1; r <= r_max; ++r) {
    if (weight[r] == 0) continue;
    sum.add(cf(r) * cg(r) * static_cast<double>(weight[r]));
  }

  const double C = f.tail_constant() * g.tail_constant();
  const double exponents = f.delta() + g.delta();
  double truncation_tail;
  if (h == 0) {
    truncation_tail = C * power_tail(r_max, exponents);  // phi(r) <= r
  } else {
    truncation_tail = C * static_cast<double>(divisor_sum(h)) *
                      power_tail(r_max, 1.0 + exponents);
  }
  double coeff_rel = 64.0 * kEps;
  if (f.kind() != FamilyKind::custom) coeff_rel += zeta_relative_error(f.s() + 1.0);
  if (g.kind() != FamilyKind::custom) coeff_rel += zeta_relative_error(g.s() + 1.0);

  MainTermPrediction out;
  out.h = h;
  out.route = h == 0 ? Route::series_thm1 : Route::series_thm2;
  out.truncation = r_max;
  out.value = sum.value();
  out.tail_estimate = truncation_tail + coeff_rel * sum.abs_total();
  out.params = {{"s", f.s()}, {"t", g.s()}, {"delta_f", f.delta()},
                {"delta_g", g.delta()}, {"C_f", f.tail_constant()},
                {"C_g", g.tail_constant()}};
  return out;
}

MainTermPrediction predict_main_term(const CoefficientFamily& f,
                                     const CoefficientFamily& g,
                                     std::uint64_t h, std::uint64_t r_max,
                                     std::uint64_t prime_limit) {
  if (h >= 1 && f.kind() == FamilyKind::sigma && g.kind() == FamilyKind::sigma &&
      f.s() > 0.5 && g.s() > 0.5) {
    return cor1_constant(f.s(), g.s(), h);
  }
  if (h >= 1 && f.kind() == FamilyKind::phi && g.kind() == FamilyKind::phi &&
      f.s() > 0.5 && g.s() > 0.5) {
    return euler_delta(f.s(), g.s(), h, prime_limit);
  }
  return main_term_series(f, g, h, r_max);
}

}  // namespace parseval
