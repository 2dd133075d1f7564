#include "parseval/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/QR>
#include <fmt/format.h>

#include "parseval/detail/parallel.hpp"

namespace parseval {

bool no_growth(std::span<const double> ratios, double slack) {
  if (ratios.empty()) return true;
  const double reference = std::abs(ratios.front()) * slack;
  return std::all_of(ratios.begin(), ratios.end(),
                     [&](double r) { return std::abs(r) <= reference; });
}

// --- lemma grids ---------------------------------------------------------

nlohmann::json LemmaResidual::to_json() const {
  return {{"r", r},         {"s", s},       {"h", h},
          {"N", N},         {"sum", sum},   {"main", main},
          {"residual", residual}, {"bound", bound}, {"holds", holds}};
}

std::string LemmaResidual::csv_header() {
  return "r,s,h,N,sum,main,residual,bound,holds";
}

std::string LemmaResidual::csv_row() const {
  return fmt::format("{},{},{},{},{},{},{},{},{}", r, s, h, N, sum, main,
                     residual, bound, holds ? 1 : 0);
}

namespace {

constexpr double kMaxLemmaWork = 2e10;

struct Cell {
  std::uint64_t r, s, h, N;
};

std::vector<Cell> lemma_cells(std::uint64_t r_max, std::uint64_t s_max,
                              std::span<const std::uint64_t> h_set,
                              std::span<const std::uint64_t> N_set) {
  if (r_max == 0 || s_max == 0) throw DomainError("lemma grid: r_max, s_max >= 1");
  if (h_set.empty() || N_set.empty()) throw DomainError("lemma grid: empty h or N set");
  std::vector<std::uint64_t> Ns(N_set.begin(), N_set.end());
  std::vector<std::uint64_t> hs(h_set.begin(), h_set.end());
  std::sort(Ns.begin(), Ns.end());
  std::sort(hs.begin(), hs.end());
  Ns.erase(std::unique(Ns.begin(), Ns.end()), Ns.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  double work = 0.0;
  std::vector<Cell> cells;
  for (auto N : Ns) {
    if (N == 0) throw DomainError("lemma grid: N must be >= 1");
    for (auto h : hs) {
      for (std::uint64_t r = 1; r <= r_max; ++r) {
        for (std::uint64_t s = 1; s <= s_max; ++s) {
          cells.push_back({r, s, h, N});
          work += static_cast<double>(N);
        }
      }
    }
  }
  if (work > kMaxLemmaWork) {
    throw LimitExceeded(fmt::format(
        "lemma grid needs about {:.3g} term evaluations, above {:.3g}", work,
        kMaxLemmaWork));
  }
  return cells;
}

// Exact sum over n <= N of c_r(n) c_s(n + h), term by term.
std::int64_t direct_pair_sum(const std::vector<std::int64_t>& cr,
                             const std::vector<std::int64_t>& cs,
                             std::uint64_t h, std::uint64_t N) {
  const std::uint64_t r = cr.size();
  const std::uint64_t s = cs.size();
  std::uint64_t i = 1 % r;
  std::uint64_t j = (1 + h) % s;
  std::int64_t total = 0;
  for (std::uint64_t n = 1; n <= N; ++n) {
    total += cr[i] * cs[j];
    if (++i == r) i = 0;
    if (++j == s) j = 0;
  }
  return total;
}

std::vector<std::vector<std::int64_t>> periods(std::uint64_t limit) {
  std::vector<std::vector<std::int64_t>> out(limit + 1);
  for (std::uint64_t r = 1; r <= limit; ++r) {
    out[r].resize(r);
    for (std::uint64_t n = 0; n < r; ++n) out[r][n] = ramanujan_sum(r, n);
  }
  return out;
}

template <typename Finish>
std::vector<LemmaResidual> run_grid(std::uint64_t r_max, std::uint64_t s_max,
                                    std::span<const std::uint64_t> h_set,
                                    std::span<const std::uint64_t> N_set,
                                    const Budget& budget, Finish finish) {
  const auto cells = lemma_cells(r_max, s_max, h_set, N_set);
  const auto c = periods(std::max(r_max, s_max));
  std::vector<LemmaResidual> out(cells.size());
  detail::parallel_for(cells.size(), budget.threads, [&](std::size_t k) {
    const Cell& cell = cells[k];
    LemmaResidual rec;
    rec.r = cell.r;
    rec.s = cell.s;
    rec.h = cell.h;
    rec.N = cell.N;
    rec.sum = direct_pair_sum(c[cell.r], c[cell.s], cell.h, cell.N);
    const std::int64_t main_exact =
        cell.r == cell.s
            ? static_cast<std::int64_t>(cell.N) * c[cell.r][cell.h % cell.r]
            : 0;
    rec.main = static_cast<double>(main_exact);
    rec.residual = static_cast<double>(rec.sum - main_exact);
    finish(rec);
    out[k] = rec;
  });
  return out;
}

}  // namespace

std::vector<LemmaResidual> lemma1_grid(std::uint64_t r_max,
                                       std::uint64_t s_max,
                                       std::span<const std::uint64_t> h_set,
                                       std::span<const std::uint64_t> N_set,
                                       const Budget& budget) {
  return run_grid(r_max, s_max, h_set, N_set, budget, [](LemmaResidual& rec) {
    const double rs = static_cast<double>(rec.r * rec.s);
    rec.bound = rs * std::log(rs + 2.0);
    // Unit constant; the fitted constant is applied by lemma1_stability.
    rec.holds = std::abs(rec.residual) <= rec.bound;
  });
}

std::vector<LemmaResidual> lemma2_grid(std::uint64_t r_max,
                                       std::uint64_t s_max,
                                       std::span<const std::uint64_t> h_set,
                                       std::span<const std::uint64_t> N_set,
                                       const Budget& budget) {
  return run_grid(r_max, s_max, h_set, N_set, budget, [](LemmaResidual& rec) {
    const auto dr = static_cast<unsigned __int128>(divisors(rec.r).size());
    const auto ds = static_cast<unsigned __int128>(divisors(rec.s).size());
    const auto N = static_cast<unsigned __int128>(rec.N);
    // |sum| <= d(r) d(s) sqrt(r s N (N + h))  <=>  sum^2 <= d^2 d^2 r s N (N + h)
    const unsigned __int128 rhs = dr * dr * ds * ds * rec.r * rec.s * N * (N + rec.h);
    const auto mag = static_cast<unsigned __int128>(rec.sum < 0 ? -rec.sum : rec.sum);
    rec.holds = mag * mag <= rhs;
    rec.bound = static_cast<double>(dr * ds) *
                std::sqrt(static_cast<double>(rec.r * rec.s) *
                          static_cast<double>(rec.N) *
                          static_cast<double>(rec.N + rec.h));
  });
}

nlohmann::json Lemma1Stability::to_json() const {
  nlohmann::json per_shift = nlohmann::json::object();
  for (const auto& [h, c] : per_shift_constant) per_shift[std::to_string(h)] = c;
  return {{"fit_N", fit_N},
          {"fitted_constant", fitted_constant},
          {"per_shift_constant", per_shift},
          {"worst_later_ratio", worst_later_ratio},
          {"pass", pass}};
}

Lemma1Stability lemma1_stability(std::span<const LemmaResidual> records) {
  if (records.empty()) throw DegenerateInput("lemma1_stability: no records");
  Lemma1Stability out;
  out.fit_N = std::min_element(records.begin(), records.end(),
                               [](const auto& a, const auto& b) { return a.N < b.N; })
                  ->N;
  for (const auto& rec : records) {
    const double ratio = std::abs(rec.residual) / rec.bound;
    if (rec.N == out.fit_N) {
      out.fitted_constant = std::max(out.fitted_constant, ratio);
      auto& c = out.per_shift_constant[rec.h];
      c = std::max(c, ratio);
    } else {
      out.worst_later_ratio = std::max(out.worst_later_ratio, ratio);
    }
  }
  out.pass = out.worst_later_ratio <= out.fitted_constant * (1.0 + 1e-12);
  return out;
}

Lemma2Summary summarize_lemma2(std::span<const LemmaResidual> records) {
  Lemma2Summary out;
  out.records = records.size();
  for (const auto& rec : records) {
    if (!rec.holds) ++out.violations;
    if (rec.bound > 0.0) {
      out.max_ratio = std::max(out.max_ratio,
                               std::abs(static_cast<double>(rec.sum)) / rec.bound);
    }
  }
  return out;
}

// --- average orders ------------------------------------------------------

namespace {

std::vector<std::uint64_t> sorted_grid(std::span<const std::uint64_t> grid,
                                       std::uint64_t minimum, const char* what) {
  if (grid.empty()) throw DomainError(fmt::format("{}: empty grid", what));
  std::vector<std::uint64_t> xs(grid.begin(), grid.end());
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  if (xs.front() < minimum) {
    throw DomainError(fmt::format("{}: grid points must be >= {}", what, minimum));
  }
  return xs;
}

double mertens_scale(double x, double c) {
  return x * std::exp(-c * std::sqrt(std::log(x)));
}

}  // namespace

double fit_mertens_constant(const MertensValues& mertens,
                            std::span<const std::uint64_t> x_grid) {
  double c = std::numeric_limits<double>::infinity();
  for (auto x : x_grid) {
    if (x < 2) continue;
    const std::int64_t m = mertens(x);
    if (m == 0) continue;
    const double xd = static_cast<double>(x);
    const double bound =
        -std::log(std::abs(static_cast<double>(m)) / xd) / std::sqrt(std::log(xd));
    c = std::min(c, bound);
  }
  return c;
}

nlohmann::json AverageOrderReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    rows_json.push_back({{"x", row.x},
                         {"phi_sum", row.phi_sum},
                         {"phi_ratio", row.phi_ratio},
                         {"d4_sum", row.d4_sum},
                         {"d4_ratio", row.d4_ratio},
                         {"mertens", row.mertens},
                         {"mertens_ratio", row.mertens_ratio}});
  }
  return {{"rows", rows_json},
          {"mertens_constant", mertens_constant},
          {"phi_bounded", phi_bounded},
          {"d4_bounded", d4_bounded},
          {"mertens_bounded", mertens_bounded},
          {"pass", pass()}};
}

std::string AverageOrderReport::csv_header() {
  return "x,phi_sum,phi_ratio,d4_sum,d4_ratio,mertens,mertens_ratio";
}

std::vector<std::string> AverageOrderReport::csv_rows() const {
  std::vector<std::string> out;
  for (const auto& row : rows) {
    out.push_back(fmt::format("{},{},{},{},{},{},{}", row.x, row.phi_sum,
                              row.phi_ratio, row.d4_sum, row.d4_ratio,
                              row.mertens, row.mertens_ratio));
  }
  return out;
}

AverageOrderReport average_order_checks(std::span<const std::uint64_t> x_grid,
                                        const Budget& budget) {
  const auto xs = sorted_grid(x_grid, 3, "average_order_checks");
  const std::uint64_t X = xs.back();
  const IntegerTable phi = sieve_euler_phi(X, budget);
  const IntegerTable d4 = sieve_dk(4, X, budget);
  const MertensValues mertens = mertens_values(X, budget);

  AverageOrderReport report;
  const double c = fit_mertens_constant(mertens, xs);
  report.mertens_constant = std::isfinite(c) ? c : 0.0;

  __int128 phi_acc = 0, d4_acc = 0;
  std::uint64_t n = 0;
  for (auto x : xs) {
    for (; n < x; ) {
      ++n;
      phi_acc += phi(n);
      d4_acc += d4(n);
    }
    AverageOrderRow row;
    row.x = x;
    row.phi_sum = static_cast<std::int64_t>(phi_acc);
    row.d4_sum = static_cast<std::int64_t>(d4_acc);
    const double xd = static_cast<double>(x);
    const double L = std::log(xd);
    row.phi_ratio = (static_cast<double>(phi_acc) -
                     3.0 / (std::numbers::pi * std::numbers::pi) * xd * xd) /
                    (xd * L);
    row.d4_ratio = (static_cast<double>(d4_acc) - xd * L * L * L / 6.0) / (xd * L * L);
    row.mertens = mertens(x);
    row.mertens_ratio = std::abs(static_cast<double>(row.mertens)) /
                        mertens_scale(xd, report.mertens_constant);
    report.rows.push_back(row);
  }

  std::vector<double> d4_ratios;
  report.phi_bounded = true;
  report.mertens_bounded = true;
  for (const auto& row : report.rows) {
    report.phi_bounded &= std::abs(row.phi_ratio) <= kPhiResidualLimit;
    report.mertens_bounded &= row.mertens_ratio <= 1.0 + 1e-12;
    d4_ratios.push_back(row.d4_ratio);
  }
  report.d4_bounded = no_growth(d4_ratios);
  return report;
}

// --- partial sums of c_r(h) ----------------------------------------------

nlohmann::json CrhReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    rows_json.push_back({{"h", row.h},
                         {"x", row.x},
                         {"identity_value", row.identity_value},
                         {"direct_value", row.direct_value},
                         {"growth_ratio", row.growth_ratio},
                         {"shift_envelope", row.shift_envelope}});
  }
  return {{"rows", rows_json},
          {"mertens_constant", mertens_constant},
          {"routes_agree", routes_agree},
          {"bounded", bounded},
          {"pass", pass()}};
}

std::string CrhReport::csv_header() {
  return "h,x,identity_value,direct_value,growth_ratio,shift_envelope";
}

std::vector<std::string> CrhReport::csv_rows() const {
  std::vector<std::string> out;
  for (const auto& row : rows) {
    out.push_back(fmt::format("{},{},{},{},{},{}", row.h, row.x,
                              row.identity_value, row.direct_value,
                              row.growth_ratio, row.shift_envelope));
  }
  return out;
}

CrhReport crh_growth_check(std::span<const std::uint64_t> h_set,
                           std::span<const std::uint64_t> x_grid,
                           const Budget& budget) {
  if (h_set.empty()) throw DomainError("crh_growth_check: empty h set");
  const auto xs = sorted_grid(x_grid, 3, "crh_growth_check");
  const std::uint64_t X = xs.back();
  const MertensValues mertens = mertens_values(X, budget);
  CrhReport report;
  const double c = fit_mertens_constant(mertens, xs);
  report.mertens_constant = std::isfinite(c) ? c : 0.0;
  report.routes_agree = true;
  report.bounded = true;

  for (auto h : h_set) {
    if (h == 0) throw DomainError("crh_growth_check: h must be >= 1");
    const auto c_r = ramanujan_sums_in_r(h, X);
    const double envelope =
        std::exp(report.mertens_constant * std::sqrt(std::log(static_cast<double>(h)))) *
        static_cast<double>(divisors(h).size());
    __int128 running = 0;
    std::uint64_t r = 0;
    for (auto x : xs) {
      for (; r < x;) running += c_r[++r];
      CrhRow row;
      row.h = h;
      row.x = x;
      row.direct_value = static_cast<std::int64_t>(running);
      row.identity_value = ramanujan_partial_sum(h, static_cast<double>(x), mertens);
      row.growth_ratio = std::abs(static_cast<double>(row.identity_value)) /
                         mertens_scale(static_cast<double>(x), report.mertens_constant);
      row.shift_envelope = envelope;
      report.routes_agree &= row.identity_value == row.direct_value;
      report.bounded &= row.growth_ratio <= envelope * (1.0 + 1e-12);
      report.rows.push_back(row);
    }
  }
  return report;
}

// --- exponent fitting ----------------------------------------------------

nlohmann::json ErrorFit::to_json() const {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& [N, e] : points) pts.push_back({N, e});
  return {{"points", pts},
          {"alpha", alpha},
          {"log_c", log_c},
          {"r_squared", r_squared},
          {"exact_match", exact_match}};
}

ErrorFit fit_error_exponent(std::span<const std::pair<double, double>> points) {
  ErrorFit fit;
  std::set<double> distinct;
  for (const auto& [N, e] : points) {
    if (!(N > 1.0)) throw DomainError("fit_error_exponent: N must exceed 1");
    distinct.insert(N);
    if (std::abs(e) > 0.0) fit.points.emplace_back(N, std::abs(e));
  }
  if (distinct.size() < 4) {
    throw DegenerateInput("fit_error_exponent: need at least 4 distinct N");
  }
  if (fit.points.empty()) {
    fit.exact_match = true;
    return fit;
  }
  std::set<double> used;
  for (const auto& p : fit.points) used.insert(p.first);
  if (used.size() < 2) {
    throw DegenerateInput("fit_error_exponent: fewer than 2 nonzero residuals");
  }
  const auto m = static_cast<Eigen::Index>(fit.points.size());
  Eigen::MatrixXd design(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = std::log(fit.points[i].first);
    design(i, 1) = 1.0;
    y(i) = std::log(fit.points[i].second);
  }
  const Eigen::Vector2d beta = design.colPivHouseholderQr().solve(y);
  fit.alpha = beta(0);
  fit.log_c = beta(1);
  const double ss_res = (design * beta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return fit;
}

ErrorFit fit_error_exponent(std::span<const CorrelationReport> reports) {
  std::vector<std::pair<double, double>> points;
  for (const auto& rep : reports) {
    points.emplace_back(static_cast<double>(rep.N), rep.residual);
  }
  return fit_error_exponent(points);
}

nlohmann::json ExponentCheck::to_json() const {
  return {{"fit", fit.to_json()},
          {"alpha", fit.alpha},
          {"delta", delta},
          {"theoretical_alpha", theoretical_alpha},
          {"alpha_limit", theoretical_alpha + kExponentSlack},
          {"normalized_residuals", normalized_residuals},
          {"alpha_ok", alpha_ok},
          {"no_growth_ok", no_growth_ok},
          {"pass", pass()}};
}

ExponentCheck exponent_check(std::span<const CorrelationReport> reports) {
  if (reports.empty()) throw DegenerateInput("exponent_check: no reports");
  ExponentCheck check;
  check.delta = reports.front().delta;
  check.theoretical_alpha = 2.0 / (1.0 + 2.0 * check.delta);
  check.fit = fit_error_exponent(reports);
  std::vector<const CorrelationReport*> by_N;
  for (const auto& rep : reports) by_N.push_back(&rep);
  std::stable_sort(by_N.begin(), by_N.end(),
                   [](const auto* a, const auto* b) { return a->N < b->N; });
  for (const auto* rep_ptr : by_N) {
    const auto& rep = *rep_ptr;
    check.normalized_residuals.push_back(std::abs(rep.residual) /
                                         error_bound(rep.N, check.delta, 1.0));
  }
  check.alpha_ok = check.fit.exact_match ||
                   check.fit.alpha <= check.theoretical_alpha + kExponentSlack;
  check.no_growth_ok = no_growth(check.normalized_residuals);
  return check;
}

}  // namespace parseval
