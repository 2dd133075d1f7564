#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "parseval/cli.hpp"

namespace {

using namespace parseval::cli;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "parseval");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int count_lines(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

TEST(Cli, CsumPrintsValue) {
  const auto r = invoke({"csum", "--r", "5", "--n", "10"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_EQ(r.out, "4\n");
  const auto j = nlohmann::json::parse(invoke({"csum", "--r", "4", "--n", "2", "--format", "json"}).out);
  EXPECT_EQ(j.at("value"), -2);
}

TEST(Cli, CorrelateCsv) {
  const auto r = invoke({"correlate", "--family", "sigma", "--s", "1", "--t", "1", "--h", "1",
                         "--N", "1000000"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::istringstream in(r.out);
  std::string version, header, row;
  std::getline(in, version);
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(version, "# parseval-csv v1 command=correlate");
  EXPECT_EQ(header.substr(0, 24), "N,h,direct_sum,direct_ov");
  const auto first = row.find(',');
  const auto second = row.find(',', first + 1);
  const auto third = row.find(',', second + 1);
  const auto fourth = row.find(',', third + 1);
  const double ratio = std::stod(row.substr(third + 1, fourth - third - 1));
  EXPECT_NEAR(ratio, 2.5, 0.02);
}

TEST(Cli, FitJson) {
  const auto r = invoke({"fit", "--family", "sigma", "--s", "1", "--t", "1", "--h", "1",
                         "--grid", "1e3,1e4,1e5,1e6"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_LE(j.at("alpha").get<double>(), 0.7667);
  EXPECT_EQ(j.at("command"), "fit");
}

TEST(Cli, UsageErrorsNameTheFlag) {
  struct Case {
    std::vector<std::string> args;
    std::string flag;
  };
  const std::vector<Case> cases = {
      {{"csum", "--r", "x", "--n", "1"}, "--r"},
      {{"csum", "--r", "0", "--n", "1"}, "--r"},
      {{"csum", "--n", "1"}, "--r"},
      {{"correlate", "--family", "zeta"}, "--family"},
      {{"correlate", "--s", "0.5"}, "--s"},
      {{"correlate", "--t", "0.25"}, "--t"},
      {{"correlate", "--grid", "1e3,,1e4"}, "--grid"},
      {{"correlate", "--N", "1.5"}, "--N"},
      {{"usplit", "--U", "2"}, "--U"},
      {{"usplit", "--N", "1000", "--U", "100", "--R-cap", "50"}, "--R-cap"},
      {{"fit", "--grid", "1e3,1e4"}, "--grid"},
      {{"csum", "--r", "1", "--n", "1", "--format", "xml"}, "--format"},
      {{"csum", "--r", "1", "--n", "1", "--threads", "0"}, "--threads"},
      {{"csum", "--r", "1", "--n", "1", "--memory-budget", "lots"}, "--memory-budget"},
      {{"csum", "--bogus", "1"}, "--bogus"},
  };
  for (const auto& c : cases) {
    const auto r = invoke(c.args);
    EXPECT_EQ(r.code, kExitUsage) << c.flag;
    EXPECT_EQ(count_lines(r.err), 1) << r.err;
    EXPECT_NE(r.err.find(c.flag), std::string::npos) << r.err;
    EXPECT_TRUE(r.out.empty()) << c.flag;
  }
  EXPECT_EQ(invoke({}).code, kExitUsage);
}

TEST(Cli, ProgrammaticConfigValidated) {
  RunConfig config;
  config.command = Command::csum;
  config.params = {{"r", "5"}, {"n", "10"}, {"grid", "1"}};
  std::ostringstream out, err;
  EXPECT_EQ(run(config, out, err), kExitUsage);
  EXPECT_NE(err.str().find("--grid"), std::string::npos);
}

TEST(Cli, ComputationErrorsExitOne) {
  const auto r = invoke({"correlate", "--N", "100000", "--memory-budget", "1K"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_EQ(count_lines(r.err), 1);
}

TEST(Cli, InvariantFailureExitsTwo) {
  // One (r, s) cell at the fit N makes the fitted constant zero, so any
  // nonzero residual later counts as growth.
  const auto r = invoke({"lemma1", "--r-max", "2", "--s-max", "1", "--h-set", "0",
                         "--N-set", "2,3"});
  EXPECT_EQ(r.code, kExitInvariantFailure) << r.out << r.err;
}

TEST(Cli, ExplainDescribesEveryCommand) {
  const auto r = invoke({"--explain"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* name : {"csum", "correlate", "usplit", "lemma1", "lemma2", "averages",
                           "crh", "fit", "expand"}) {
    EXPECT_NE(r.out.find(name), std::string::npos) << name;
  }
  EXPECT_NE(r.out.find("d(r) d(s) sqrt(r s N (N+h))"), std::string::npos);
}

TEST(Cli, OutputAndPlotFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "parseval_cli_test";
  std::filesystem::create_directories(dir);
  const auto out_path = (dir / "out.json").string();
  const auto plot_path = (dir / "plot.csv").string();
  const auto r = invoke({"averages", "--grid", "1e3,1e4,1e5", "--format", "json", "--output",
                         out_path, "--plot", plot_path});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream out_file(out_path);
  const auto j = nlohmann::json::parse(out_file);
  EXPECT_EQ(j.at("command"), "averages");
  std::ifstream plot_file(plot_path);
  std::string header;
  std::getline(plot_file, header);
  EXPECT_EQ(header.substr(0, 2), "x,");
  std::filesystem::remove_all(dir);
}

TEST(Cli, EveryCommandSucceedsOnSmallInputs) {
  const std::vector<std::vector<std::string>> runs = {
      {"usplit", "--family", "phi", "--s", "1", "--h", "1", "--N", "2000"},
      {"lemma1", "--N-set", "1e3,1e4"},
      {"lemma2"},
      {"crh", "--grid", "1e3,1e4,1e5"},
      {"expand", "--family", "phi", "--s", "0.75", "--n-max", "50", "--R-grid", "100,1000"},
      {"correlate", "--family", "phi", "--family-g", "sigma", "--s", "0.75", "--t", "2",
       "--h", "3", "--grid", "1e3,1e4", "--format", "json"},
  };
  for (const auto& args : runs) {
    const auto r = invoke(args);
    EXPECT_EQ(r.code, kExitOk) << args[0] << ": " << r.err;
  }
}

TEST(Cli, DeterministicAcrossThreads) {
  const std::vector<std::string> base = {"correlate", "--s", "1", "--h", "2", "--grid",
                                         "1e3,2e5"};
  auto one = base;
  one.insert(one.end(), {"--threads", "1"});
  auto four = base;
  four.insert(four.end(), {"--threads", "4"});
  const auto a = invoke(one);
  const auto b = invoke(four);
  ASSERT_EQ(a.code, kExitOk);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out, invoke(one).out);
}

TEST(ParseHelpers, Counts) {
  EXPECT_EQ(parse_count("--N", "1e6"), 1'000'000u);
  EXPECT_EQ(parse_count("--N", "18446744073709551615"), 18446744073709551615ull);
  EXPECT_THROW(parse_count("--N", "-1"), UsageError);
  EXPECT_THROW(parse_count("--N", "2.5"), UsageError);
  EXPECT_THROW(parse_count("--N", "10x"), UsageError);
  EXPECT_EQ(parse_count_list("--grid", "1e3,20").size(), 2u);
  EXPECT_DOUBLE_EQ(parse_real("--s", "0.75"), 0.75);
  EXPECT_THROW(parse_real("--s", "inf"), UsageError);
}

}  // namespace
