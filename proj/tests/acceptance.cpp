// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// limits are fixed here, not taken from the command line.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "parseval/analysis.hpp"
#include "parseval/closed_forms.hpp"
#include "parseval/correlation.hpp"
#include "parseval/ramanujan.hpp"

#ifndef PARSEVAL_CLI_PATH
#error "PARSEVAL_CLI_PATH must name the command-line binary"
#endif

namespace {

using namespace parseval;

constexpr double kOracleRounding = 1e-6;
constexpr double kSeconds1 = 5.0;
constexpr double kSecondsMinute = 60.0;
constexpr double kClosedConstantTolerance = 0.02;
constexpr double kClosedConstant = 2.5;
constexpr double kExponentLimit = 2.0 / 3.0 + kExponentSlack;

struct Verdict {
  bool pass = true;
  std::string detail;
};

Verdict fail(std::string detail) { return {false, std::move(detail)}; }

const std::vector<std::uint64_t> kGrid = {1'000, 10'000, 100'000, 1'000'000};
const std::vector<std::uint64_t> kShifts = {0, 1, 5};

Verdict oracle_equivalence() {
  std::size_t checked = 0;
  for (std::uint64_t r = 1; r <= 64; ++r) {
    for (std::uint64_t n = 0; n <= 256; ++n) {
      const std::int64_t value = ramanujan_sum(r, n);
      const double exponential = oracle::ramanujan_exponential(r, n);
      if (std::abs(exponential - static_cast<double>(value)) > kOracleRounding) {
        return fail(fmt::format("c_{}({}) = {} but the exponential sum is {}", r, n, value,
                                exponential));
      }
      const auto o = ramanujan_sum_oracle(r, n);
      if (o.value != value) {
        return fail(fmt::format("library oracle disagrees at r={}, n={}", r, n));
      }
      ++checked;
    }
  }
  return {true, fmt::format("{} pairs", checked)};
}

Verdict structural_identities() {
  const std::uint64_t limit = 200;
  for (std::uint64_t r = 1; r <= limit; ++r) {
    if (ramanujan_sum(r, 0) != oracle::euler_phi(r)) return fail(fmt::format("c_{}(0)", r));
    std::int64_t period = 0;
    for (std::uint64_t n = 1; n <= r; ++n) period += ramanujan_sum(r, n);
    if (r > 1 && period != 0) return fail(fmt::format("period sum at r={}", r));
    for (std::uint64_t n = 0; n <= 2 * limit; ++n) {
      if (ramanujan_sum(r, n) != ramanujan_sum(r, std::gcd(n, r))) {
        return fail(fmt::format("periodicity at r={}, n={}", r, n));
      }
    }
    for (std::uint64_t r2 = 1; r2 <= limit; ++r2) {
      if (std::gcd(r, r2) != 1) continue;
      for (std::uint64_t n = 0; n <= 2 * limit; n += 7) {
        if (ramanujan_sum(r * r2, n) != ramanujan_sum(r, n) * ramanujan_sum(r2, n)) {
          return fail(fmt::format("multiplicativity at {}, {}, n={}", r, r2, n));
        }
      }
    }
  }
  for (std::uint64_t r = 1; r <= 10'000; ++r) {
    if (ramanujan_sum(r, 1) != oracle::mobius(r)) return fail(fmt::format("c_{}(1)", r));
  }
  return {true, "r <= 200; c_r(1) = mu(r) for r <= 10^4"};
}

Verdict four_fold_divisors() {
  const std::uint64_t limit = 10'000;
  const auto d4 = sieve_dk(4, limit);
  std::vector<std::int64_t> d(limit + 1, 0);
  for (std::uint64_t a = 1; a <= limit; ++a) {
    for (std::uint64_t m = a; m <= limit; m += a) ++d[m];
  }
  for (std::uint64_t t = 1; t <= limit; ++t) {
    std::int64_t sum = 0;
    for (std::uint64_t r = 1; r * r <= t; ++r) {
      if (t % r != 0) continue;
      sum += d[r] * d[t / r] * (r * r == t ? 1 : 2);
    }
    if (sum != d4(t)) return fail(fmt::format("t = {}: {} vs {}", t, sum, d4(t)));
  }
  return {true, "t <= 10^4"};
}

Verdict lemma2_bound() {
  const std::vector<std::uint64_t> Ns = {1'000, 10'000};
  const auto records = lemma2_grid(12, 12, kShifts, Ns);
  const auto summary = summarize_lemma2(records);
  if (summary.records != 12u * 12u * 3u * 2u) return fail("wrong record count");
  if (summary.violations != 0) return fail(fmt::format("{} violations", summary.violations));
  return {true, fmt::format("{} cells, max |sum|/bound = {:.4f}", summary.records,
                            summary.max_ratio)};
}

Verdict lemma1_stable() {
  const std::vector<std::uint64_t> Ns = {1'000, 10'000, 100'000};
  const auto records = lemma1_grid(12, 12, kShifts, Ns);
  const auto s = lemma1_stability(records);
  if (s.fit_N != 1'000) return fail("constant not fitted at N = 10^3");
  const std::string detail = fmt::format("C = {:.6f}, worst later ratio = {:.6f}",
                                         s.fitted_constant, s.worst_later_ratio);
  return {s.pass, detail};
}

Verdict closed_sigma_constant() {
  const double constant = cor1_constant(1, 1, 1).value;
  if (std::abs(constant - kClosedConstant) > 1e-9) {
    return fail(fmt::format("closed constant {}", constant));
  }
  const auto f = CoefficientFamily::sigma(1.0);
  const std::vector<std::uint64_t> Ns = {10'000, 1'000'000};
  const auto reports = correlate_grid(f, f, 1, Ns);
  const double small = std::abs(reports[0].direct_sum / 1e4 - kClosedConstant);
  const double large = std::abs(reports[1].direct_sum / 1e6 - kClosedConstant);
  const std::string detail =
      fmt::format("|S/N - 2.5| = {:.3e} at 10^4, {:.3e} at 10^6", small, large);
  return {large <= kClosedConstantTolerance && large < small, detail};
}

Verdict route_agreement() {
  double worst = 0.0;
  for (double s : {0.75, 1.0, 2.0}) {
    for (double t : {0.75, 1.0, 2.0}) {
      for (std::uint64_t h : {1u, 2u, 6u}) {
        const auto ss = main_term_series(CoefficientFamily::sigma(s),
                                         CoefficientFamily::sigma(t), h);
        const auto cs = cor1_constant(s, t, h);
        const auto sp = main_term_series(CoefficientFamily::phi(s),
                                         CoefficientFamily::phi(t), h);
        const auto ep = euler_delta(s, t, h);
        const double a = std::abs(ss.value - cs.value) / (ss.tail_estimate + cs.tail_estimate);
        const double b = std::abs(sp.value - ep.value) / (sp.tail_estimate + ep.tail_estimate);
        worst = std::max({worst, a, b});
        if (a > 1.0 || b > 1.0) {
          return fail(fmt::format("s={}, t={}, h={}: gap/tail {:.3f}, {:.3f}", s, t, h, a, b));
        }
      }
    }
  }
  return {true, fmt::format("largest gap/tail ratio {:.3f}", worst)};
}

Verdict error_exponent() {
  const auto f = CoefficientFamily::sigma(1.0);
  std::string detail;
  bool pass = true;
  for (std::uint64_t h : {0u, 1u}) {
    const auto check = exponent_check(correlate_grid(f, f, h, kGrid));
    pass &= check.fit.alpha <= kExponentLimit && check.no_growth_ok;
    if (!detail.empty()) detail += ", ";
    detail += fmt::format("h={}: alpha={:.4f}{}", h, check.fit.alpha,
                          check.no_growth_ok ? "" : " (normalized residual grows)");
  }
  return {pass, detail};
}

Verdict average_orders() {
  const auto report = average_order_checks(kGrid);
  const auto M = mertens_values(10'000);
  std::int64_t running = 0;
  for (std::uint64_t x = 1; x <= 10'000; ++x) {
    running += oracle::mobius(x);
    if (M(x) != running) return fail(fmt::format("M({}) = {}, brute force {}", x, M(x), running));
  }
  const std::string detail = fmt::format("phi {}, d_4 {}, Mertens {} (c = {:.4f})",
                                         report.phi_bounded, report.d4_bounded,
                                         report.mertens_bounded, report.mertens_constant);
  return {report.pass(), detail};
}

Verdict expansion_convergence() {
  const std::uint64_t R = 10'000;
  double worst = 0.0;
  for (double s : {0.75, 1.0, 2.0}) {
    const auto sigma = CoefficientFamily::sigma(s);
    const auto phi = CoefficientFamily::phi(s);
    for (std::uint64_t n = 1; n <= 100; ++n) {
      const auto a = truncated_expansion(sigma, n, R);
      const auto b = truncated_expansion(phi, n, R);
      const double ea = std::abs(a.value - oracle::sigma_ratio(s, n)) / a.tail_bound;
      const double eb = std::abs(b.value - oracle::phi_ratio(s, n)) / b.tail_bound;
      worst = std::max({worst, ea, eb});
      if (ea > 1.0 || eb > 1.0) return fail(fmt::format("s={}, n={}", s, n));
    }
  }
  return {true, fmt::format("largest error/tail ratio {:.3f}", worst)};
}

std::string capture(const std::string& command) {
  std::string out;
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return "<popen failed>";
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) out.append(buffer.data(), n);
  const int status = ::pclose(pipe);
  return out + fmt::format("<exit {}>", status);
}

Verdict cli_determinism() {
  const std::vector<std::string> configs = {
      "correlate --family sigma --s 1 --t 1 --h 1 --grid 1e3,1e5,3e5",
      "correlate --family phi --s 0.75 --t 2 --h 6 --N 200000 --format json",
      "usplit --family sigma --s 1 --N 10000",
      "lemma2 --N-set 1e3,2e3",
      "crh --grid 1e3,1e4,1e5",
      "fit --family sigma --s 1 --h 0 --grid 1e3,1e4,1e5,2e5",
  };
  for (const auto& config : configs) {
    const std::string base = std::string(PARSEVAL_CLI_PATH) + " " + config;
    const std::string one = capture(base + " --threads 1");
    if (one.find("<exit 0>") == std::string::npos) return fail("'" + config + "' failed");
    if (capture(base + " --threads 1") != one || capture(base + " --threads 4") != one) {
      return fail("'" + config + "' output differs between runs");
    }
  }
  return {true, fmt::format("{} configurations, threads 1 and 4", configs.size())};
}

struct Criterion {
  int id;
  const char* name;
  double seconds_limit;
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "Ramanujan sums equal the exponential-sum oracle", kSeconds1, oracle_equivalence},
      {2, "Structural identities of c_r(n)", 0.0, structural_identities},
      {3, "Divisor convolution gives d_4", 0.0, four_fold_divisors},
      {4, "Pair-sum upper bound on the full grid", kSecondsMinute, lemma2_bound},
      {5, "Pair-sum residuals stay within the fitted constant", 0.0, lemma1_stable},
      {6, "sigma_1 correlation approaches 2.5", kSecondsMinute, closed_sigma_constant},
      {7, "Series and closed-form main terms agree", 0.0, route_agreement},
      {8, "Error exponent and normalized residual", 0.0, error_exponent},
      {9, "Average orders of phi, d_4 and mu", 0.0, average_orders},
      {10, "Truncated expansions within tail bounds", 0.0, expansion_convergence},
      {11, "CLI output independent of run and thread count", 0.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = fail(std::string("exception: ") + e.what());
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.seconds_limit > 0.0 && seconds >= c.seconds_limit) {
      v.pass = false;
      v.detail += fmt::format("; took longer than {} s", c.seconds_limit);
    }
    failures += v.pass ? 0 : 1;
    std::cout << fmt::format("[{}] {:>2}. {} ({}; {:.2f} s)\n", v.pass ? "PASS" : "FAIL", c.id,
                             c.name, v.detail, seconds)
              << std::flush;
  }
  std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failures,
                           criteria.size());
  return failures == 0 ? 0 : 1;
}
