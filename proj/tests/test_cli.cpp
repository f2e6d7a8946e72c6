#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "fheston/cli/commands.hpp"
#include "fheston/cli/config.hpp"
#include "fheston/cli/csv.hpp"
#include "fheston/errors.hpp"

using namespace fheston;
using namespace fheston::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("fheston_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

RunConfig fast_validate_config() {
  RunConfig c;
  c.validate.covariance_paths = 5000;
  c.validate.covariance_steps = 16;
  c.validate.isometry_steps = 200;
  c.validate.scheme_steps = 2000;
  c.validate.moment_paths = 50;
  c.validate.moment_steps = 64;
  return c;
}

}  // namespace

TEST(Config, DefaultsMatchReferenceSetup) {
  const RunConfig c;
  EXPECT_EQ(c.model.horizon, 1.0);
  EXPECT_EQ(c.model.kappa, 1.0);
  EXPECT_EQ(c.model.theta, 1.0);
  EXPECT_EQ(c.model.nu, 0.14);
  EXPECT_EQ(c.model.mu, 0.5);
  EXPECT_EQ(c.model.rho, 0.0);
  EXPECT_EQ(c.model.hurst, 0.7);
  EXPECT_EQ(c.sigma, SigmaSpec::shifted_power(0.5, 0.01, 0.9));
}

TEST(Config, RoundTripDefault) {
  const RunConfig c;
  EXPECT_EQ(from_json_string(to_json_string(c)), c);
}

TEST(Config, RoundTripCustom) {
  RunConfig c;
  c.model.rho = -0.35;
  c.model.hurst = 0.1 + 0.2;  // not exactly representable
  c.model.lambda = 0.03;
  c.sigma = SigmaSpec::constant(1.0 / 3.0);
  c.payoff = PayoffSpec::indicator(0.25, std::numeric_limits<double>::infinity(), false, true);
  c.seed = 18446744073709551557ull;
  c.grid_sizes = {10, 20};
  c.estimator = Estimator::Both;
  c.scale = 0.2;
  c.converge.ladder = {4, 8};
  c.validate.moment_order = 49;
  const auto text = to_json_string(c);
  const auto back = from_json_string(text);
  EXPECT_EQ(back, c);
  EXPECT_EQ(to_json_string(back), text);

  c.payoff = PayoffSpec::reference_staircase();
  EXPECT_EQ(from_json_string(to_json_string(c)), c);
  c.payoff = PayoffSpec::piecewise_linear({0.0, 1.5}, {0.1, 0.7}, {0.4, 0.0});
  c.sigma = SigmaSpec::linear(0.2);
  EXPECT_EQ(from_json_string(to_json_string(c)), c);
}

TEST(Config, PartialFileKeepsDefaults) {
  const auto c = from_json_string(R"({"model": {"hurst": 0.8}, "paths": 10})");
  EXPECT_EQ(c.model.hurst, 0.8);
  EXPECT_EQ(c.paths, 10u);
  EXPECT_EQ(c.model.nu, 0.14);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(from_json_string(R"({"modle": {}})"), UsageError);
  EXPECT_THROW(from_json_string(R"({"paths": "many"})"), UsageError);
  EXPECT_THROW(from_json_string("{not json"), UsageError);
  EXPECT_THROW(from_json_string(R"({"payoff": {"type": "put", "strike": 1}})"), UsageError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), UsageError);
}

TEST(Config, FileRoundTrip) {
  const auto dir = scratch_dir("config");
  fs::create_directories(dir);
  RunConfig c;
  c.seed = 99;
  save_config(c, dir / "run.json");
  EXPECT_EQ(load_config(dir / "run.json"), c);
}

TEST(Csv, Headers) {
  EXPECT_EQ(kSummariesHeader, "payoff,n,mean,sd,cv,min,q1,median,q3,max");
  EXPECT_EQ(kEstimatesHeader, "payoff,n,estimate_index,value");
  EXPECT_EQ(kConvergenceHeader, "level,n,delta,strong_err_L2,weak_err,slope");
}

TEST(Csv, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(0.2126), "0.2126");
  EXPECT_EQ(format_number(2.0), "2");
  for (double x : {1.0 / 3.0, 0.7019 * 1.000001, 1e-300, 123456789.123}) EXPECT_EQ(std::stod(format_number(x)), x);
}

TEST(Csv, SummaryRowLayout) {
  std::ostringstream os;
  write_summary_row(os, "call", 100, EstimateSummary{1, 2, 3, 4, 5, 6, 7, 8});
  EXPECT_EQ(os.str(), "call,100,1,2,3,4,5,6,7,8\n");
  std::ostringstream es;
  const std::vector<double> values{0.5, 0.25};
  write_estimate_rows(es, "indicator", 500, values);
  EXPECT_EQ(es.str(), "indicator,500,0,0.5\nindicator,500,1,0.25\n");
}

TEST(Commands, PriceWithZeroPathsIsUsageError) {
  RunConfig c;
  c.paths = 0;
  std::ostringstream out, err;
  EXPECT_EQ(run_guarded([&] { return cmd_price(c, out, err); }, err), kUsage);
}

TEST(Commands, InvalidModelIsUsageError) {
  RunConfig c;
  c.model.kappa = -1.0;
  c.paths = 10;
  c.estimates = 2;
  std::ostringstream out, err;
  EXPECT_EQ(run_guarded([&] { return cmd_price(c, out, err); }, err), kUsage);
  EXPECT_NE(err.str().find("kappa"), std::string::npos);
}

TEST(Commands, NumericalErrorMapsToFour) {
  std::ostringstream err;
  EXPECT_EQ(run_guarded([]() -> int { throw NumericalError("not positive definite"); }, err), kNumericalFailure);
}

TEST(Commands, PriceWritesCsvWhenRequested) {
  RunConfig c;
  c.paths = 50;
  c.estimates = 4;
  c.n = 20;
  c.write_estimates = true;
  c.out_dir = scratch_dir("price").string();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_price(c, out, err), kOk);
  EXPECT_NE(out.str().find("smoothed: mean="), std::string::npos);
  EXPECT_EQ(first_line(fs::path(c.out_dir) / "summaries.csv"), kSummariesHeader);
  EXPECT_EQ(first_line(fs::path(c.out_dir) / "estimates.csv"), kEstimatesHeader);
}

TEST(Commands, TablesSchemaAndDeterminism) {
  RunConfig c;
  c.paths = 20;
  c.estimates = 10;
  c.scale = 0.5;
  c.grid_sizes = {10, 20};
  std::ostringstream out, err;
  c.out_dir = scratch_dir("tables_a").string();
  c.threads = 1;
  ASSERT_EQ(cmd_tables(c, out, err), kOk);
  const fs::path a(c.out_dir);
  c.out_dir = scratch_dir("tables_b").string();
  c.threads = 4;
  ASSERT_EQ(cmd_tables(c, out, err), kOk);
  const fs::path b(c.out_dir);

  const auto summaries = slurp(a / "summaries.csv");
  EXPECT_EQ(summaries, slurp(b / "summaries.csv"));
  EXPECT_EQ(slurp(a / "estimates.csv"), slurp(b / "estimates.csv"));
  EXPECT_EQ(first_line(a / "summaries.csv"), kSummariesHeader);
  EXPECT_EQ(std::count(summaries.begin(), summaries.end(), '\n'), 1 + 3 * 2);
  const auto raw = slurp(a / "estimates.csv");
  EXPECT_EQ(std::count(raw.begin(), raw.end(), '\n'), 1 + 3 * 2 * 5);
}

TEST(Commands, ValidateDefaultPasses) {
  const auto c = fast_validate_config();
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(c, out, err), kOk) << out.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
}

TEST(Commands, ValidateExploratoryRegime) {
  auto c = fast_validate_config();
  c.model.hurst = 0.3;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(c, out, err), kOk) << out.str();
  EXPECT_NE(err.str().find("WARN: exploratory H regime"), std::string::npos);
  EXPECT_NE(out.str().find("SKIP kernel_isometry"), std::string::npos);
  EXPECT_NE(out.str().find("SKIP increment_exponent"), std::string::npos);
}

TEST(Commands, ValidateReportsFailingParameterCondition) {
  auto c = fast_validate_config();
  c.validate.moment_order = 49;
  std::ostringstream out, err;
  cmd_validate(c, out, err);
  EXPECT_NE(out.str().find("3p+1<=bound: false (margin -2.22"), std::string::npos) << out.str();
  EXPECT_NE(err.str().find("WARN: parameter condition"), std::string::npos);
}

TEST(Commands, ValidateFailsOnInadmissibleSigma) {
  auto c = fast_validate_config();
  c.sigma = SigmaSpec::linear(0.5);
  c.model.rho = 0.5;
  std::ostringstream out, err;
  EXPECT_EQ(cmd_validate(c, out, err), kValidationFailure);
}

TEST(Commands, ConvergeZeroErrorRows) {
  RunConfig c;
  c.converge.ladder = {16, 16};
  c.converge.paths = 50;
  c.out_dir = scratch_dir("converge").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_converge(c, out, err), kOk);
  std::ifstream in(fs::path(c.out_dir) / "convergence.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kConvergenceHeader);
  std::getline(in, line);
  EXPECT_EQ(line, "0,16,0.0625,0,0,nan");
}

TEST(Commands, ConvergeDefaultLadderHasFiniteSlope) {
  RunConfig c;
  c.converge.ladder = {8, 16, 32, 64};
  c.converge.paths = 200;
  c.out_dir = scratch_dir("converge_ladder").string();
  std::ostringstream out, err;
  ASSERT_EQ(cmd_converge(c, out, err), kOk);
  std::ifstream in(fs::path(c.out_dir) / "convergence.csv");
  std::string line;
  std::getline(in, line);
  std::getline(in, line);
  const double slope = std::stod(line.substr(line.rfind(',') + 1));
  EXPECT_TRUE(std::isfinite(slope));
}

TEST(Tool, ExitCodes) {
  const std::string tool = FHESTON_TOOL_PATH;
  auto code = [&](const std::string& args) {
    const int status = std::system((tool + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
  };
  EXPECT_EQ(code("price --paths 0"), 2);
  EXPECT_EQ(code("price --payoff put"), 2);
  EXPECT_EQ(code("frobnicate"), 2);
  EXPECT_EQ(code("price --config /nonexistent.json"), 2);
  EXPECT_EQ(code("price --paths 10 --estimates 2 --n 10"), 0);
}
