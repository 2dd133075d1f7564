#include "parseval/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "parseval/analysis.hpp"
#include "parseval/closed_forms.hpp"
#include "parseval/correlation.hpp"
#include "parseval/ramanujan.hpp"

namespace parseval::cli {

namespace {

struct FlagSpec {
  const char* name;
  const char* help;
};

struct CommandSpec {
  Command command;
  const char* name;
  const char* summary;
  const char* explanation;
  OutputFormat default_format;
  std::vector<FlagSpec> flags;
};

const std::vector<CommandSpec>& command_specs() {
  static const std::vector<CommandSpec> specs = {
      {Command::csum, "csum", "Evaluate one Ramanujan sum c_r(n)",
       "c_r(n) = sum over d | gcd(n, r) of mu(r/d) d",
       OutputFormat::csv,
       {{"r", "modulus r >= 1"}, {"n", "argument n >= 0"}}},
      {Command::correlate, "correlate",
       "Shifted correlation sum against its predicted main term",
       "sum_{n<=N} f(n) g(n+h) = N sum_r f^(r) g^(r) c_r(h) + "
       "O(N^{2/(1+2d)} (log N)^{(5+2d)/(1+2d)}); closed constants "
       "zeta(s+1)zeta(t+1)sigma_{-(s+t+1)}(h)/zeta(s+t+2) for sigma and the "
       "Euler product Delta(h) for phi",
       OutputFormat::csv,
       {{"family", "sigma or phi (function f)"},
        {"family-g", "family of g (defaults to --family)"},
        {"s", "parameter of f, > 1/2"},
        {"t", "parameter of g, > 1/2 (defaults to --s)"},
        {"h", "shift h >= 0 (default 1)"},
        {"N", "length N (default 1e6)"},
        {"grid", "comma-separated N values instead of --N"},
        {"R-max", "series truncation (default 1e5)"},
        {"P", "prime limit for the Euler product (default 1e6)"},
        {"C", "constant in the reported error bound (default 1)"}}},
      {Command::usplit, "usplit", "Split of the Ramanujan double series at rs <= U",
       "A + B split with A = C + D + O(U log U), D = O(N / U^d), "
       "B = O(N (log U)^3 / U^{d-1/2}); U = N^{2/(1+2d)} (log N)^{4/(1+2d)}",
       OutputFormat::csv,
       {{"family", "sigma or phi"},
        {"family-g", "family of g"},
        {"s", "parameter of f"},
        {"t", "parameter of g"},
        {"h", "shift h >= 0 (default 0)"},
        {"N", "length N (default 1e4)"},
        {"U", "split point (default: optimal U)"},
        {"R-cap", "enumerate pairs with rs <= R-cap (default ceil(U))"},
        {"R-max", "series truncation for C and D (default 1e5)"}}},
      {Command::lemma1, "lemma1", "Residuals of sum c_r(n) c_s(n+h)",
       "sum_{n<=N} c_r(n) c_s(n+h) = [r=s] N c_r(h) + O(rs log rs); the "
       "constant is fitted at the smallest N and checked at larger N",
       OutputFormat::csv,
       {{"r-max", "largest r (default 12)"},
        {"s-max", "largest s (default 12)"},
        {"h-set", "shifts (default 0,1,5)"},
        {"N-set", "lengths (default 1e3,1e4,1e5)"}}},
      {Command::lemma2, "lemma2", "Upper bound on sum c_r(n) c_s(n+h)",
       "|sum_{n<=N} c_r(n) c_s(n+h)| <= d(r) d(s) sqrt(r s N (N+h))",
       OutputFormat::csv,
       {{"r-max", "largest r (default 12)"},
        {"s-max", "largest s (default 12)"},
        {"h-set", "shifts (default 0,1,5)"},
        {"N-set", "lengths (default 1e3,1e4)"}}},
      {Command::averages, "averages", "Average orders of phi, d_4 and mu",
       "sum phi(k) = 3x^2/pi^2 + O(x log x); sum d_4(n) = x (log x)^3/6 + "
       "O(x (log x)^2); M(x) = O(x exp(-c sqrt(log x)))",
       OutputFormat::csv,
       {{"grid", "x values (default 1e3,1e4,1e5,1e6)"}}},
      {Command::crh, "crh", "Partial sums of c_r(h) over r",
       "sum_{r<=x} c_r(h) = sum_{d|h} d M(x/d) = O(x exp(-c sqrt(log x)) "
       "exp(c sqrt(log h)) d(h))",
       OutputFormat::csv,
       {{"h-set", "shifts (default 1,2,6,24)"},
        {"grid", "x values (default 1e3,1e4,1e5,1e6)"}}},
      {Command::fit, "fit", "Log-log fit of correlation residuals",
       "fits |E(N)| ~ c N^alpha and checks alpha <= 2/(1+2d) + 0.1 and that "
       "|E| / (N^{2/(1+2d)} (log N)^{(5+2d)/(1+2d)}) does not grow",
       OutputFormat::json,
       {{"family", "sigma or phi"},
        {"family-g", "family of g"},
        {"s", "parameter of f"},
        {"t", "parameter of g"},
        {"h", "shift h >= 0 (default 1)"},
        {"grid", "N values (default 1e3,1e4,1e5,1e6)"},
        {"R-max", "series truncation (default 1e5)"},
        {"P", "prime limit (default 1e6)"}}},
      {Command::expand, "expand", "Truncated Ramanujan expansions",
       "sigma_s(n)/n^s = zeta(s+1) sum_r c_r(n)/r^{s+1}; phi_s(n)/n^s = "
       "(1/zeta(s+1)) sum_r mu(r) c_r(n)/phi_{s+1}(r)",
       OutputFormat::csv,
       {{"family", "sigma or phi"},
        {"s", "parameter s > 0"},
        {"n", "single argument n"},
        {"n-max", "check every n <= n-max (default 100)"},
        {"R", "single truncation R"},
        {"R-grid", "truncations (default 1e2,1e3,1e4)"}}},
  };
  return specs;
}

const CommandSpec& spec_for(Command command) {
  for (const auto& spec : command_specs()) {
    if (spec.command == command) return spec;
  }
  throw UsageError("unknown command");
}

// Typed, validated view of RunConfig::params.
class Params {
 public:
  Params(const RunConfig& config) : command_(config.command), raw_(config.params) {
    const auto& spec = spec_for(command_);
    for (const auto& [key, value] : raw_) {
      bool known = false;
      for (const auto& flag : spec.flags) known |= key == flag.name;
      if (!known) {
        throw UsageError(fmt::format("--{}: not a flag of '{}'", key, spec.name));
      }
    }
  }

  bool has(const std::string& key) const { return raw_.count(key) != 0; }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) const {
    return has(key) ? parse_count("--" + key, raw_.at(key)) : fallback;
  }

  double real(const std::string& key, double fallback) const {
    return has(key) ? parse_real("--" + key, raw_.at(key)) : fallback;
  }

  std::vector<std::uint64_t> list(const std::string& key,
                                  std::vector<std::uint64_t> fallback) const {
    return has(key) ? parse_count_list("--" + key, raw_.at(key)) : fallback;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? raw_.at(key) : fallback;
  }

  std::uint64_t required_count(const std::string& key) const {
    if (!has(key)) throw UsageError(fmt::format("--{} is required", key));
    return count(key, 0);
  }

 private:
  Command command_;
  const std::map<std::string, std::string>& raw_;
};

void require(bool ok, const std::string& flag, const std::string& message) {
  if (!ok) throw UsageError(fmt::format("{}: {}", flag, message));
}

CoefficientFamily make_family(const std::string& name, double s,
                              const std::string& flag) {
  if (name == "sigma") return CoefficientFamily::sigma(s);
  if (name == "phi") return CoefficientFamily::phi(s);
  throw UsageError(fmt::format("{}: expected 'sigma' or 'phi', got '{}'", flag, name));
}

struct FamilyPair {
  CoefficientFamily f;
  CoefficientFamily g;
};

FamilyPair family_pair(const Params& p) {
  const std::string f_name = p.text("family", "sigma");
  const std::string g_name = p.text("family-g", f_name);
  const double s = p.real("s", 1.0);
  const double t = p.real("t", s);
  require(s > 0.5, "--s", "must be > 1/2");
  require(t > 0.5, "--t", "must be > 1/2");
  return {make_family(f_name, s, "--family"), make_family(g_name, t, "--family-g")};
}

struct CommandOutput {
  std::string text;
  std::string plot;
  bool invariants_ok = true;
};

std::string csv_preamble(Command command) {
  return fmt::format("# parseval-csv v1 command={}\n", to_string(command));
}

nlohmann::json json_preamble(Command command) {
  return {{"schema", "parseval-json v1"}, {"command", std::string(to_string(command))}};
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

// --- commands ------------------------------------------------------------

CommandOutput run_csum(const Params& p, OutputFormat format) {
  const std::uint64_t r = p.required_count("r");
  const std::uint64_t n = p.required_count("n");
  require(r >= 1, "--r", "must be >= 1");
  const std::int64_t value = ramanujan_sum(r, n);
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::csum);
    j["r"] = r;
    j["n"] = n;
    j["value"] = value;
    return {dump(j), {}, true};
  }
  return {fmt::format("{}\n", value), {}, true};
}

CorrelationOptions correlation_options(const Params& p, const Budget& budget) {
  CorrelationOptions options;
  options.r_max = p.count("R-max", kDefaultSeriesTruncation);
  options.prime_limit = p.count("P", kDefaultPrimeLimit);
  options.bound_constant = p.real("C", 1.0);
  options.budget = budget;
  require(options.r_max >= 10, "--R-max", "must be >= 10");
  require(options.prime_limit >= 100, "--P", "must be >= 100");
  require(options.bound_constant > 0.0, "--C", "must be > 0");
  return options;
}

CommandOutput run_correlate(const Params& p, OutputFormat format,
                            const Budget& budget) {
  const auto families = family_pair(p);
  const std::uint64_t h = p.count("h", 1);
  std::vector<std::uint64_t> grid =
      p.has("grid") ? p.list("grid", {}) : std::vector<std::uint64_t>{p.count("N", 1'000'000)};
  for (auto N : grid) require(N >= 3, p.has("grid") ? "--grid" : "--N", "values must be >= 3");
  require(h <= budget.max_shift, "--h", "above the configured maximum shift");
  const auto options = correlation_options(p, budget);

  const auto reports = correlate_grid(families.f, families.g, h, grid, options);
  CommandOutput out;
  std::string plot = "x,y\n";
  for (const auto& rep : reports) {
    plot += fmt::format("{},{}\n", rep.N, rep.direct_sum / static_cast<double>(rep.N));
  }
  out.plot = plot;
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::correlate);
    j["reports"] = nlohmann::json::array();
    for (const auto& rep : reports) j["reports"].push_back(rep.to_json());
    out.text = dump(j);
  } else {
    out.text = csv_preamble(Command::correlate) + CorrelationReport::csv_header() + "\n";
    for (const auto& rep : reports) out.text += rep.csv_row() + "\n";
  }
  return out;
}

CommandOutput run_usplit(const Params& p, OutputFormat format, const Budget& budget) {
  const auto families = family_pair(p);
  const std::uint64_t h = p.count("h", 0);
  const std::uint64_t N = p.count("N", 10'000);
  require(N >= 3, "--N", "must be >= 3");
  const double delta = std::min(families.f.delta(), families.g.delta());
  const double U = p.real("U", optimal_U(N, delta));
  require(U >= 4.0, "--U", "must be >= 4");
  const std::uint64_t r_cap = p.count("R-cap", static_cast<std::uint64_t>(std::ceil(U)));
  require(static_cast<double>(r_cap) >= U, "--R-cap", "must be >= U");
  require(r_cap <= kMaxPairCap, "--R-cap",
          fmt::format("must be <= {}; lower U", kMaxPairCap));
  auto options = correlation_options(p, budget);

  const auto diag = u_split(families.f, families.g, h, N, U, r_cap, options);
  CommandOutput out;
  out.invariants_ok = diag.recomposition_error <= 1e-6 * std::abs(diag.direct_sum);
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::usplit);
    j["diagnostics"] = diag.to_json();
    j["recomposition_ok"] = out.invariants_ok;
    out.text = dump(j);
  } else {
    out.text = csv_preamble(Command::usplit) + USplitDiagnostics::csv_header() +
               "\n" + diag.csv_row() + "\n";
  }
  return out;
}

struct GridArgs {
  std::uint64_t r_max, s_max;
  std::vector<std::uint64_t> h_set, N_set;
};

GridArgs grid_args(const Params& p, std::vector<std::uint64_t> default_N) {
  GridArgs a{p.count("r-max", 12), p.count("s-max", 12), p.list("h-set", {0, 1, 5}),
             p.list("N-set", std::move(default_N))};
  require(a.r_max >= 1, "--r-max", "must be >= 1");
  require(a.s_max >= 1, "--s-max", "must be >= 1");
  for (auto N : a.N_set) require(N >= 1, "--N-set", "values must be >= 1");
  return a;
}

CommandOutput run_lemma(const Params& p, OutputFormat format, const Budget& budget,
                        bool first) {
  const Command command = first ? Command::lemma1 : Command::lemma2;
  const auto a = grid_args(p, first ? std::vector<std::uint64_t>{1'000, 10'000, 100'000}
                                    : std::vector<std::uint64_t>{1'000, 10'000});
  const auto records = first ? lemma1_grid(a.r_max, a.s_max, a.h_set, a.N_set, budget)
                             : lemma2_grid(a.r_max, a.s_max, a.h_set, a.N_set, budget);
  CommandOutput out;
  nlohmann::json summary;
  if (first) {
    const auto stability = lemma1_stability(records);
    out.invariants_ok = stability.pass;
    summary = stability.to_json();
  } else {
    const auto s = summarize_lemma2(records);
    out.invariants_ok = s.violations == 0;
    summary = {{"records", s.records}, {"violations", s.violations},
               {"max_ratio", s.max_ratio}, {"pass", out.invariants_ok}};
  }
  if (format == OutputFormat::json) {
    auto j = json_preamble(command);
    j["summary"] = summary;
    j["records"] = nlohmann::json::array();
    for (const auto& rec : records) j["records"].push_back(rec.to_json());
    out.text = dump(j);
  } else {
    out.text = csv_preamble(command) + LemmaResidual::csv_header() + "\n";
    for (const auto& rec : records) out.text += rec.csv_row() + "\n";
    out.text += "# summary " + summary.dump() + "\n";
  }
  return out;
}

const std::vector<std::uint64_t> kDefaultXGrid = {1'000, 10'000, 100'000, 1'000'000};

CommandOutput run_averages(const Params& p, OutputFormat format, const Budget& budget) {
  const auto grid = p.list("grid", kDefaultXGrid);
  for (auto x : grid) require(x >= 3, "--grid", "values must be >= 3");
  const auto report = average_order_checks(grid, budget);
  CommandOutput out;
  out.invariants_ok = report.pass();
  out.plot = "x,phi_ratio,d4_ratio,mertens_ratio\n";
  for (const auto& row : report.rows) {
    out.plot += fmt::format("{},{},{},{}\n", row.x, row.phi_ratio, row.d4_ratio,
                            row.mertens_ratio);
  }
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::averages);
    j["report"] = report.to_json();
    out.text = dump(j);
  } else {
    out.text = csv_preamble(Command::averages) + AverageOrderReport::csv_header() + "\n";
    for (const auto& row : report.csv_rows()) out.text += row + "\n";
    out.text += fmt::format("# summary mertens_constant={} pass={}\n",
                            report.mertens_constant, report.pass() ? 1 : 0);
  }
  return out;
}

CommandOutput run_crh(const Params& p, OutputFormat format, const Budget& budget) {
  const auto h_set = p.list("h-set", {1, 2, 6, 24});
  const auto grid = p.list("grid", kDefaultXGrid);
  for (auto h : h_set) require(h >= 1, "--h-set", "values must be >= 1");
  for (auto x : grid) require(x >= 3, "--grid", "values must be >= 3");
  const auto report = crh_growth_check(h_set, grid, budget);
  CommandOutput out;
  out.invariants_ok = report.pass();
  out.plot = "h,x,y\n";
  for (const auto& row : report.rows) {
    out.plot += fmt::format("{},{},{}\n", row.h, row.x, row.growth_ratio);
  }
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::crh);
    j["report"] = report.to_json();
    out.text = dump(j);
  } else {
    out.text = csv_preamble(Command::crh) + CrhReport::csv_header() + "\n";
    for (const auto& row : report.csv_rows()) out.text += row + "\n";
    out.text += fmt::format("# summary mertens_constant={} pass={}\n",
                            report.mertens_constant, report.pass() ? 1 : 0);
  }
  return out;
}

CommandOutput run_fit(const Params& p, OutputFormat format, const Budget& budget) {
  const auto families = family_pair(p);
  const std::uint64_t h = p.count("h", 1);
  const auto grid = p.list("grid", kDefaultXGrid);
  require(grid.size() >= 4, "--grid", "needs at least 4 values");
  for (auto N : grid) require(N >= 3, "--grid", "values must be >= 3");
  require(h <= budget.max_shift, "--h", "above the configured maximum shift");
  const auto options = correlation_options(p, budget);
  const auto reports = correlate_grid(families.f, families.g, h, grid, options);
  const auto check = exponent_check(reports);

  CommandOutput out;
  out.invariants_ok = check.pass();
  out.plot = "x,y\n";
  for (const auto& [N, e] : check.fit.points) {
    out.plot += fmt::format("{},{}\n", std::log(N), std::log(e));
  }
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::fit);
    j["check"] = check.to_json();
    j["alpha"] = check.fit.alpha;
    j["reports"] = nlohmann::json::array();
    for (const auto& rep : reports) j["reports"].push_back(rep.to_json());
    out.text = dump(j);
  } else {
    out.text = csv_preamble(Command::fit) + CorrelationReport::csv_header() + "\n";
    for (const auto& rep : reports) out.text += rep.csv_row() + "\n";
    out.text += fmt::format("# summary alpha={} log_c={} r_squared={} pass={}\n",
                            check.fit.alpha, check.fit.log_c, check.fit.r_squared,
                            check.pass() ? 1 : 0);
  }
  return out;
}

CommandOutput run_expand(const Params& p, OutputFormat format, const Budget& budget) {
  const double s = p.real("s", 1.0);
  require(s > 0.0, "--s", "must be > 0");
  const auto family = make_family(p.text("family", "sigma"), s, "--family");
  std::vector<std::uint64_t> ns;
  if (p.has("n")) {
    ns.push_back(p.count("n", 1));
  } else {
    const std::uint64_t n_max = p.count("n-max", 100);
    for (std::uint64_t n = 1; n <= n_max; ++n) ns.push_back(n);
  }
  for (auto n : ns) require(n >= 1, p.has("n") ? "--n" : "--n-max", "must be >= 1");
  const auto Rs = p.has("R") ? std::vector<std::uint64_t>{p.count("R", 1)}
                             : p.list("R-grid", {100, 1'000, 10'000});
  for (auto R : Rs) require(R >= 1, p.has("R") ? "--R" : "--R-grid", "must be >= 1");

  std::uint64_t n_max = 0;
  for (auto n : ns) n_max = std::max(n_max, n);
  const RealTable sieved = family_table(family, n_max, budget);

  CommandOutput out;
  nlohmann::json rows = nlohmann::json::array();
  std::string csv = csv_preamble(Command::expand) + "n,R,value,tail_bound,sieved,abs_error,within\n";
  out.plot = "n,R,y\n";
  for (auto R : Rs) {
    for (auto n : ns) {
      const auto e = truncated_expansion(family, n, R);
      const double error = std::abs(e.value - sieved(n));
      const bool within = error <= e.tail_bound;
      out.invariants_ok &= within;
      csv += fmt::format("{},{},{},{},{},{},{}\n", n, R, e.value, e.tail_bound,
                         sieved(n), error, within ? 1 : 0);
      out.plot += fmt::format("{},{},{}\n", n, R, error);
      rows.push_back({{"n", n}, {"R", R}, {"value", e.value}, {"tail_bound", e.tail_bound},
                      {"sieved", sieved(n)}, {"abs_error", error}, {"within", within}});
    }
  }
  if (format == OutputFormat::json) {
    auto j = json_preamble(Command::expand);
    j["family"] = family.descriptor();
    j["rows"] = rows;
    j["pass"] = out.invariants_ok;
    out.text = dump(j);
  } else {
    out.text = csv;
  }
  return out;
}

CommandOutput dispatch(const RunConfig& config, const Budget& budget) {
  const Params params(config);
  const OutputFormat format = config.format.value_or(spec_for(config.command).default_format);
  switch (config.command) {
    case Command::csum: return run_csum(params, format);
    case Command::correlate: return run_correlate(params, format, budget);
    case Command::usplit: return run_usplit(params, format, budget);
    case Command::lemma1: return run_lemma(params, format, budget, true);
    case Command::lemma2: return run_lemma(params, format, budget, false);
    case Command::averages: return run_averages(params, format, budget);
    case Command::crh: return run_crh(params, format, budget);
    case Command::fit: return run_fit(params, format, budget);
    case Command::expand: return run_expand(params, format, budget);
  }
  throw UsageError("unknown command");
}

void write_file(const std::string& path, const std::string& text, const char* flag) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw UsageError(fmt::format("{}: cannot open '{}'", flag, path));
  file << text;
}

}  // namespace

std::string_view to_string(Command command) {
  for (const auto& spec : command_specs()) {
    if (spec.command == command) return spec.name;
  }
  return "unknown";
}

std::uint64_t parse_count(std::string_view flag, std::string_view text) {
  const bool plain = !text.empty() && text.find_first_not_of("0123456789") == std::string_view::npos;
  if (plain) {
    std::uint64_t value = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
      throw UsageError(fmt::format("{}: '{}' is out of range", flag, text));
    }
    return value;
  }
  // Scientific forms such as 1e6 must denote an integer below 2^53.
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(fmt::format("{}: expected a count, got '{}'", flag, text));
  }
  if (used != s.size() || !std::isfinite(value) || value < 0.0 ||
      value != std::floor(value) || value > 9.007199254740992e15) {
    throw UsageError(fmt::format("{}: expected a non-negative integer, got '{}'", flag, text));
  }
  return static_cast<std::uint64_t>(value);
}

double parse_real(std::string_view flag, std::string_view text) {
  const std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw UsageError(fmt::format("{}: expected a number, got '{}'", flag, text));
  }
  if (used != s.size() || !std::isfinite(value)) {
    throw UsageError(fmt::format("{}: expected a number, got '{}'", flag, text));
  }
  return value;
}

std::vector<std::uint64_t> parse_count_list(std::string_view flag, std::string_view text) {
  std::vector<std::uint64_t> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError(fmt::format("{}: empty list entry", flag));
    out.push_back(parse_count(flag, item));
  }
  if (out.empty()) throw UsageError(fmt::format("{}: empty list", flag));
  return out;
}

std::string explain_text() {
  std::string text;
  for (const auto& spec : command_specs()) {
    text += fmt::format("{:<10} {}\n", spec.name, spec.explanation);
  }
  return text;
}

std::optional<RunConfig> parse_command_line(int argc, const char* const* argv,
                                            std::ostream& out) {
  CLI::App app{"Numerical checks of Parseval-type formulas for Ramanujan expansions",
               "parseval"};
  app.fallthrough();
  app.set_help_flag("--help", "print usage");
  std::string format, output, plot, threads = "1", memory;
  bool explain = false;
  app.add_option("--format", format, "csv or json");
  app.add_option("--output", output, "write results to this path instead of stdout");
  app.add_option("--plot", plot, "write x,y plot data to this path");
  app.add_option("--threads", threads, "worker threads (results do not depend on it)");
  app.add_option("--memory-budget", memory,
                 "bytes per table, e.g. 2G (overrides PARSEVAL_MEMORY_BUDGET)");
  app.add_flag("--explain", explain, "print what each subcommand checks");

  std::map<std::string, std::map<std::string, std::string>> values;
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (const auto& spec : command_specs()) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.summary);
    // -h would clash with the shift flag --h.
    sub->set_help_flag("--help", "print usage");
    auto& store = values[spec.name];
    for (const auto& flag : spec.flags) {
      sub->add_option(std::string("--") + flag.name, store[flag.name], flag.help);
    }
    subs.emplace_back(sub, spec.command);
  }
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return std::nullopt;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }
  if (explain) {
    out << explain_text();
    return std::nullopt;
  }

  RunConfig config;
  bool chosen = false;
  for (const auto& [sub, command] : subs) {
    if (!sub->parsed()) continue;
    chosen = true;
    config.command = command;
    const auto& spec = spec_for(command);
    for (const auto& flag : spec.flags) {
      if (sub->count(std::string("--") + flag.name) > 0) {
        config.params[flag.name] = values[spec.name][flag.name];
      }
    }
  }
  if (!chosen) throw UsageError("missing subcommand (try --help or --explain)");
  if (!format.empty()) {
    if (format == "csv") {
      config.format = OutputFormat::csv;
    } else if (format == "json") {
      config.format = OutputFormat::json;
    } else {
      throw UsageError(fmt::format("--format: expected csv or json, got '{}'", format));
    }
  }
  config.output = output;
  config.plot = plot;
  const std::uint64_t t = parse_count("--threads", threads);
  if (t < 1 || t > 1024) throw UsageError("--threads: must be in [1, 1024]");
  config.threads = static_cast<unsigned>(t);
  if (!memory.empty()) {
    try {
      config.memory_budget = parse_byte_count(memory.c_str());
    } catch (const DomainError& e) {
      throw UsageError(fmt::format("--memory-budget: {}", e.what()));
    }
  }
  return config;
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    Budget budget = default_budget();
    if (config.memory_budget) budget.memory_bytes = *config.memory_budget;
    budget.threads = std::max(config.threads, 1u);
    const CommandOutput result = dispatch(config, budget);
    if (config.output.empty()) {
      out << result.text;
    } else {
      write_file(config.output, result.text, "--output");
    }
    if (!config.plot.empty()) {
      write_file(config.plot, result.plot.empty() ? "x,y\n" : result.plot, "--plot");
    }
    if (!result.invariants_ok) {
      err << fmt::format("{}: invariant check failed\n", to_string(config.command));
      return kExitInvariantFailure;
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::optional<RunConfig> config;
  try {
    config = parse_command_line(argc, argv, out);
  } catch (const Error& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }
  if (!config) return kExitOk;
  return run(*config, out, err);
}

}  // namespace parseval::cli
