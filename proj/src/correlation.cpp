#include "parseval/correlation.hpp"

#include <cmath>

#include <fmt/format.h>

namespace parseval {

namespace {

void require_delta(double delta, const char* what) {
  if (!(delta > 0.5) || !std::isfinite(delta)) {
    throw DomainError(fmt::format("{}: delta must exceed 1/2 (got {})", what, delta));
  }
}

void require_shift(std::uint64_t h, const Budget& budget) {
  if (h > budget.max_shift) {
    throw DomainError(fmt::format("shift h = {} above the configured maximum {}",
                                  h, budget.max_shift));
  }
}

// Exponents 2/(1+2 delta) and the log power of the error term.
double main_exponent(double delta) { return 2.0 / (1.0 + 2.0 * delta); }

}  // namespace

RealTable family_table(const CoefficientFamily& family, std::uint64_t limit,
                       const Budget& budget) {
  switch (family.kind()) {
    case FamilyKind::sigma: return sieve_sigma_ratio(family.s(), limit, budget);
    case FamilyKind::phi: return sieve_phi_ratio(family.s(), limit, budget);
    case FamilyKind::custom: break;
  }
  throw DomainError(fmt::format("family '{}' has no sieved table", family.name()));
}

double optimal_U(std::uint64_t N, double delta) {
  if (N < 3) throw DomainError("optimal_U: N must be >= 3");
  require_delta(delta, "optimal_U");
  const double e = main_exponent(delta);
  const double L = std::log(static_cast<double>(N));
  return std::pow(static_cast<double>(N), e) * std::pow(L, 2.0 * e);
}

double error_bound(std::uint64_t N, double delta, double C) {
  if (N < 3) throw DomainError("error_bound: N must be >= 3");
  require_delta(delta, "error_bound");
  if (!(C > 0.0)) throw DomainError("error_bound: C must be > 0");
  const double L = std::log(static_cast<double>(N));
  return C * std::pow(static_cast<double>(N), main_exponent(delta)) *
         std::pow(L, (5.0 + 2.0 * delta) / (1.0 + 2.0 * delta));
}

// --- reports -------------------------------------------------------------

nlohmann::json CorrelationReport::to_json() const {
  nlohmann::json j;
  j["N"] = N;
  j["h"] = h;
  j["direct_sum"] = direct_sum;
  j["prediction"] = prediction.to_json();
  j["residual"] = residual;
  j["bound_value"] = bound_value;
  j["bound_constant"] = bound_constant;
  j["delta"] = delta;
  j["f"] = f_descriptor;
  j["g"] = g_descriptor;
  return j;
}

std::string CorrelationReport::csv_header() {
  return "N,h,direct_sum,direct_over_N,main_value,route,truncation,"
         "tail_estimate,residual,bound_value,bound_constant,delta,f_family,f_s,"
         "g_family,g_s";
}

std::string CorrelationReport::csv_row() const {
  return fmt::format(
      "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", N, h, direct_sum,
      direct_sum / static_cast<double>(N), prediction.value,
      to_string(prediction.route), prediction.truncation,
      prediction.tail_estimate, residual, bound_value, bound_constant, delta,
      f_descriptor.value("family", std::string("custom")),
      f_descriptor.value("s", 0.0),
      g_descriptor.value("family", std::string("custom")),
      g_descriptor.value("s", 0.0));
}

namespace {

CorrelationReport make_report(const CoefficientFamily& f,
                              const CoefficientFamily& g, std::uint64_t h,
                              std::uint64_t N, double direct,
                              const MainTermPrediction& prediction,
                              const CorrelationOptions& options) {
  CorrelationReport report;
  report.N = N;
  report.h = h;
  report.direct_sum = direct;
  report.prediction = prediction;
  report.residual = direct - static_cast<double>(N) * prediction.value;
  report.delta = std::min(f.delta(), g.delta());
  report.bound_constant = options.bound_constant;
  report.bound_value = N >= 3 ? error_bound(N, report.delta, options.bound_constant)
                              : 0.0;
  report.f_descriptor = f.descriptor();
  report.g_descriptor = g.descriptor();
  return report;
}

}  // namespace

CorrelationReport correlate(const CoefficientFamily& f,
                            const CoefficientFamily& g, std::uint64_t h,
                            std::uint64_t N,
                            const CorrelationOptions& options) {
  return correlate_grid(f, g, h, {N}, options).front();
}

std::vector<CorrelationReport> correlate_grid(
    const CoefficientFamily& f, const CoefficientFamily& g, std::uint64_t h,
    const std::vector<std::uint64_t>& N_grid, const CorrelationOptions& options) {
  if (N_grid.empty()) throw DomainError("correlate_grid: empty N grid");
  require_shift(h, options.budget);
  require_delta(f.delta(), "correlate");
  require_delta(g.delta(), "correlate");
  std::uint64_t N_max = 0;
  for (auto N : N_grid) {
    if (N == 0) throw DomainError("correlate: N must be >= 1");
    N_max = std::max(N_max, N);
  }
  const RealTable f_table = family_table(f, N_max, options.budget);
  const RealTable g_table = family_table(g, N_max + h, options.budget);
  const MainTermPrediction prediction =
      predict_main_term(f, g, h, options.r_max, options.prime_limit);

  std::vector<CorrelationReport> reports;
  reports.reserve(N_grid.size());
  for (auto N : N_grid) {
    const double direct =
        correlate_direct(f_table, g_table, h, N, options.budget.threads);
    reports.push_back(make_report(f, g, h, N, direct, prediction, options));
  }
  return reports;
}

// --- U-split -------------------------------------------------------------

nlohmann::json USplitDiagnostics::to_json() const {
  nlohmann::json j;
  j["N"] = N;
  j["h"] = h;
  j["U"] = U;
  j["r_cap"] = r_cap;
  j["delta"] = delta;
  j["direct_sum"] = direct_sum;
  j["A"] = A;
  j["B"] = B;
  j["C"] = C;
  j["D"] = D;
  j["recomposition_error"] = recomposition_error;
  j["a_remainder"] = a_remainder;
  j["b_enumerated"] = b_enumerated;
  j["pair_count"] = pair_count;
  j["d_envelope"] = d_envelope;
  j["b_envelope"] = b_envelope;
  return j;
}

std::string USplitDiagnostics::csv_header() {
  return "N,h,U,r_cap,delta,direct_sum,A,B,C,D,recomposition_error,"
         "a_remainder,b_enumerated,pair_count,d_envelope,b_envelope";
}

std::string USplitDiagnostics::csv_row() const {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", N, h,
                     U, r_cap, delta, direct_sum, A, B, C, D,
                     recomposition_error, a_remainder, b_enumerated,
                     pair_count, d_envelope, b_envelope);
}

USplitDiagnostics u_split(const CoefficientFamily& f,
                          const CoefficientFamily& g, std::uint64_t h,
                          std::uint64_t N, double U, std::uint64_t r_cap,
                          const CorrelationOptions& options) {
  require_delta(f.delta(), "u_split");
  require_delta(g.delta(), "u_split");
  require_shift(h, options.budget);
  if (N == 0) throw DomainError("u_split: N must be >= 1");
  if (!(U >= 4.0) || !std::isfinite(U)) throw DomainError("u_split: U must be >= 4");
  if (U > static_cast<double>(r_cap)) {
    throw CapExceeded(fmt::format(
        "u_split: U = {} exceeds the pair cap R_cap = {}; lower U or raise R_cap",
        U, r_cap));
  }
  if (r_cap > kMaxPairCap) {
    throw CapExceeded(fmt::format(
        "u_split: R_cap = {} above the hard limit {}; lower U", r_cap, kMaxPairCap));
  }

  USplitDiagnostics out;
  out.N = N;
  out.h = h;
  out.U = U;
  out.r_cap = r_cap;
  out.delta = std::min(f.delta(), g.delta());

  const RealTable f_table = family_table(f, N, options.budget);
  const RealTable g_table = family_table(g, N + h, options.budget);
  out.direct_sum = correlate_direct(f_table, g_table, h, N, options.budget.threads);

  const Eigen::VectorXd cf = f.coefficients(r_cap);
  const Eigen::VectorXd cg = g.coefficients(r_cap);
  std::vector<std::vector<DivisorTerm>> terms(r_cap + 1);
  for (std::uint64_t r = 1; r <= r_cap; ++r) terms[r] = ramanujan_divisor_terms(r);

  // Row r collects the pairs (r, s) with r s <= r_cap.
  struct Row {
    detail::CompensatedSum inside;
    detail::CompensatedSum outside;
    std::uint64_t pairs = 0;
  };
  std::vector<Row> rows(r_cap + 1);
  detail::parallel_for(r_cap, options.budget.threads, [&](std::size_t i) {
    const std::uint64_t r = i + 1;
    Row& row = rows[r];
    for (std::uint64_t s = 1; r * s <= r_cap; ++s) {
      const std::int64_t pair = ramanujan_pair_sum(terms[r], terms[s], h, N);
      ++row.pairs;
      if (pair == 0) continue;
      const double weighted = cf(r) * cg(s) * static_cast<double>(pair);
      if (static_cast<double>(r * s) <= U) {
        row.inside.add(weighted);
      } else {
        row.outside.add(weighted);
      }
    }
  });
  detail::CompensatedSum A, B_enum;
  for (std::uint64_t r = 1; r <= r_cap; ++r) {
    A.add(rows[r].inside.value());
    B_enum.add(rows[r].outside.value());
    out.pair_count += rows[r].pairs;
  }
  out.A = A.value();
  out.b_enumerated = B_enum.value();
  out.B = out.direct_sum - out.A;
  out.recomposition_error = std::abs((out.A + out.B) - out.direct_sum);

  const double Nd = static_cast<double>(N);
  const MainTermPrediction full = main_term_series(f, g, h, options.r_max);
  out.C = Nd * full.value;

  const std::uint64_t r_max = options.r_max;
  const Eigen::VectorXd df = f.coefficients(r_max);
  const Eigen::VectorXd dg = g.coefficients(r_max);
  std::vector<std::int64_t> weight;
  if (h == 0) {
    const auto phi = sieve_euler_phi(r_max, options.budget);
    weight.assign(phi.values().data(), phi.values().data() + r_max + 1);
  } else {
    weight = ramanujan_sums_in_r(h, r_max);
  }
  detail::CompensatedSum tail;
  for (std::uint64_t r = 1; r <= r_max; ++r) {
    const double rd = static_cast<double>(r);
    if (rd * rd <= U || weight[r] == 0) continue;
    tail.add(df(r) * dg(r) * static_cast<double>(weight[r]));
  }
  out.D = -Nd * tail.value();
  out.a_remainder = out.A - out.C - out.D;

  const double logU = std::log(U);
  out.d_envelope = Nd / std::pow(U, out.delta);
  out.b_envelope = std::sqrt(Nd * (Nd + static_cast<double>(h))) * logU * logU *
                   logU / std::pow(U, out.delta - 0.5);
  return out;
}

}  // namespace parseval
