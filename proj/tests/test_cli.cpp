#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "vitalsforge/cli.hpp"

namespace fs = std::filesystem;
using vitalsforge::cli::run;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

std::size_t header_columns(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
}

// One scratch directory per test, holding a small synthetic cohort.
class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("vf_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ASSERT_EQ(cli({"synth", "--n-stays", "240", "--seed", "5", "--out", cohort()}).code, 0);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string cohort() const { return (dir_ / "cohort").string(); }
  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, SynthWritesBothTables) {
  EXPECT_TRUE(fs::exists(fs::path(cohort()) / "stays.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cohort()) / "observations.csv"));
  EXPECT_EQ(count_lines(fs::path(cohort()) / "stays.csv"), 241u);
}

TEST_F(CliTest, SynthIsDeterministic) {
  ASSERT_EQ(cli({"synth", "--n-stays", "240", "--seed", "5", "--out", path("again").string()}).code, 0);
  EXPECT_EQ(slurp(path("again") / "observations.csv"), slurp(fs::path(cohort()) / "observations.csv"));
  EXPECT_EQ(slurp(path("again") / "stays.csv"), slurp(fs::path(cohort()) / "stays.csv"));
}

TEST_F(CliTest, SynthEmptyCohort) {
  const auto r = cli({"synth", "--n-stays", "0", "--out", path("empty").string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(count_lines(path("empty") / "stays.csv"), 1u);
}

TEST_F(CliTest, FeaturizeColumnCounts) {
  ASSERT_EQ(cli({"featurize", "--cohort", cohort(), "--mode", "baseline", "--out", path("b.csv").string()}).code, 0);
  ASSERT_EQ(cli({"featurize", "--cohort", cohort(), "--mode", "quantiles", "--out", path("q.csv").string()}).code, 0);
  EXPECT_EQ(header_columns(path("b.csv")), 13u);
  EXPECT_EQ(header_columns(path("q.csv")), 34u);
  EXPECT_EQ(count_lines(path("q.csv")), count_lines(path("b.csv")));
}

TEST_F(CliTest, InvertedQuantilesRejected) {
  const auto r = cli({"featurize", "--cohort", cohort(), "--low-q", "0.6", "--high-q", "0.4", "--out",
                      path("x.csv").string()});
  EXPECT_NE(r.code, 0);
  EXPECT_FALSE(r.err.empty());
  EXPECT_FALSE(fs::exists(path("x.csv")));
}

TEST_F(CliTest, ClassifierOnRegressionTaskRejected) {
  const auto r = cli({"evaluate", "--cohort", cohort(), "--task", "los-days", "--algos", "rf", "--out",
                      path("r").string()});
  EXPECT_EQ(r.code, vitalsforge::cli::kExitUsage);
  EXPECT_NE(r.err.find("rf"), std::string::npos);
  EXPECT_EQ(cli({"evaluate", "--cohort", cohort(), "--algos", "nope", "--out", path("r").string()}).code,
            vitalsforge::cli::kExitUsage);
  EXPECT_EQ(cli({"evaluate", "--cohort", cohort(), "--k-folds", "1", "--out", path("r").string()}).code,
            vitalsforge::cli::kExitUsage);
}

TEST_F(CliTest, MissingCohortIsFailure) {
  const auto r = cli({"evaluate", "--cohort", path("absent").string(), "--out", path("r").string()});
  EXPECT_EQ(r.code, vitalsforge::cli::kExitFailure);
}

TEST_F(CliTest, EvaluateAllClassifiers) {
  const auto r = cli({"evaluate", "--cohort", cohort(), "--task", "mortality", "--k-folds", "2", "--out",
                      path("r").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("r") / "report.json"));
  EXPECT_EQ(j.at("format"), "vitalsforge.report");
  EXPECT_EQ(j.at("algorithms").size(), 6u);
  for (const char* name : {"lr", "lda", "rf", "knn", "svm_rbf", "gbt"}) {
    EXPECT_TRUE(fs::exists(path("r") / (std::string("roc_") + name + ".csv"))) << name;
    EXPECT_NE(r.out.find(name), std::string::npos);
  }
  EXPECT_TRUE(fs::exists(path("r") / "roc.svg"));
  EXPECT_TRUE(fs::exists(path("r") / "calibration.svg"));
}

TEST_F(CliTest, RegressionTaskWritesNoPlots) {
  const auto r = cli({"evaluate", "--cohort", cohort(), "--task", "los-days", "--k-folds", "0", "--out",
                      path("r").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(path("r") / "report.json"));
  EXPECT_EQ(j.at("algorithms").size(), 2u);
  EXPECT_FALSE(fs::exists(path("r") / "roc.svg"));
}

TEST_F(CliTest, DropOverlapRecordedInMetadata) {
  ASSERT_EQ(cli({"evaluate", "--cohort", cohort(), "--algos", "lr", "--k-folds", "0", "--drop-overlap", "--out",
                 path("r").string()})
                .code,
            0);
  const auto m = nlohmann::json::parse(slurp(path("r") / "report.json")).at("metadata");
  EXPECT_EQ(m.at("overlap_removed"), true);
  EXPECT_LE(m.at("n_test").get<int>(), m.at("n_test_before_overlap_removal").get<int>());
}

TEST_F(CliTest, TrainingOnlyImputationRecorded) {
  ASSERT_EQ(cli({"evaluate", "--cohort", cohort(), "--algos", "lr", "--k-folds", "0", "--impute-train-only", "--out",
                 path("r").string()})
                .code,
            0);
  const auto m = nlohmann::json::parse(slurp(path("r") / "report.json")).at("metadata");
  EXPECT_EQ(m.at("imputation"), "training");
}

TEST_F(CliTest, ConfigFileSuppliesDefaults) {
  {
    std::ofstream cfg(path("run.cfg"));
    cfg << "# evaluation defaults\ntask = los-binary\nalgos = lr\nk-folds = 0\nseed = 9\ndrop-overlap = true\n";
  }
  ASSERT_EQ(cli({"evaluate", "--config", path("run.cfg").string(), "--cohort", cohort(), "--seed", "11", "--out",
                 path("r").string()})
                .code,
            0);
  const auto j = nlohmann::json::parse(slurp(path("r") / "report.json"));
  EXPECT_EQ(j.at("task"), "los_binary");
  EXPECT_EQ(j.at("algorithms").size(), 1u);
  EXPECT_EQ(j.at("metadata").at("seed"), 11);
  EXPECT_EQ(j.at("metadata").at("overlap_removed"), true);

  {
    std::ofstream bad(path("bad.cfg"));
    bad << "colour = blue\n";
  }
  const auto r = cli({"evaluate", "--config", path("bad.cfg").string(), "--cohort", cohort(), "--out",
                      path("r2").string()});
  EXPECT_EQ(r.code, vitalsforge::cli::kExitUsage);
  EXPECT_NE(r.err.find("colour"), std::string::npos);
}

TEST_F(CliTest, SvgPointsMatchCsv) {
  ASSERT_EQ(cli({"evaluate", "--cohort", cohort(), "--algos", "lr", "--k-folds", "0", "--out", path("r").string()})
                .code,
            0);
  const std::string svg = slurp(path("r") / "roc.svg");
  const std::string key = "data-points=\"";
  const auto at = svg.find(key);
  ASSERT_NE(at, std::string::npos);
  const auto end = svg.find('"', at + key.size());
  std::string from_svg = svg.substr(at + key.size(), end - at - key.size());
  std::replace(from_svg.begin(), from_svg.end(), ' ', '\n');

  std::string csv = slurp(path("r") / "roc_lr.csv");
  csv = csv.substr(csv.find('\n') + 1);
  EXPECT_EQ(from_svg + "\n", csv);
}

TEST_F(CliTest, ReportRerenderIsByteIdentical) {
  ASSERT_EQ(cli({"evaluate", "--cohort", cohort(), "--algos", "lr,knn", "--k-folds", "0", "--out",
                 path("r").string()})
                .code,
            0);
  const auto r = cli({"report", "--report", (path("r") / "report.json").string(), "--out", path("again").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"roc.svg", "calibration.svg", "roc_lr.csv", "calibration_knn.csv"})
    EXPECT_EQ(slurp(path("again") / f), slurp(path("r") / f)) << f;
}

TEST_F(CliTest, SeedFromEnvironment) {
  ::setenv("VITALSFORGE_SEED", "123", 1);
  const auto r = cli({"evaluate", "--cohort", cohort(), "--algos", "lr", "--k-folds", "0", "--out",
                      path("r").string()});
  ::unsetenv("VITALSFORGE_SEED");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r") / "report.json")).at("metadata").at("seed"), 123);
}

TEST(CliBinary, ExitCodes) {
  const std::string bin = VITALSFORGE_CLI_PATH;
  EXPECT_EQ(std::system((bin + " --help > /dev/null").c_str()), 0);
  const int usage = std::system((bin + " evaluate > /dev/null 2>&1").c_str());
  EXPECT_TRUE(WIFEXITED(usage));
  EXPECT_NE(WEXITSTATUS(usage), 0);
}
