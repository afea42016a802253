#include "cli.hpp"

#include "impgap/examples.hpp"
#include "impgap/pmp.hpp"
#include "impgap/problem_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

namespace impgap {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "impgap");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("impgap_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string str(const std::string& leaf = "") const { return (leaf.empty() ? path_ : path_ / leaf).string(); }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

double number_after(const std::string& text, const std::string& key) {
  std::smatch m;
  const std::regex re("(^|\n)" + key + " ([-+0-9.eE]+)");
  if (!std::regex_search(text, m, re)) return std::nan("");
  return std::stod(m[2]);
}

TEST(Cli, HelpPrintsDefaults) {
  CliRun r = run_cli({"solve", "--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("[80]"), std::string::npos);
  EXPECT_NE(r.out.find("--strict-eps"), std::string::npos);
  CliRun g = run_cli({"gap", "--help"});
  EXPECT_NE(g.out.find("0.0125"), std::string::npos);
  CliRun i = run_cli({"isolation", "--help"});
  EXPECT_NE(i.out.find("--delta FLOAT [0.5]"), std::string::npos);
}

TEST(Cli, BadArguments) {
  EXPECT_EQ(run_cli({}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"solve", "--N", "abc"}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"solve"}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"solve", "--example", "ex9"}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"solve", "--example", "ex1", "--problem", "x.yaml"}).code, cli::kInputError);
}

TEST(Cli, MalformedProblemFile) {
  TempDir d;
  std::ofstream(d.path() / "bad.yaml") << "name: bad\nn: 1\nm: 1\nf: [\"x1 +* 2\"]\n";
  CliRun r = run_cli({"solve", "--problem", d.str("bad.yaml"), "--out", d.str("out")});
  EXPECT_EQ(r.code, cli::kInputError);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Cli, ExamplesList) {
  CliRun r = run_cli({"examples", "list"});
  EXPECT_EQ(r.code, 0);
  for (const char* id : {"ex1", "ex2", "ex3"}) EXPECT_NE(r.out.find(std::string(id) + "  "), std::string::npos);
}

TEST(Cli, ExamplesExport) {
  TempDir d;
  CliRun r = run_cli({"examples", "export", "ex2", "--out", d.str()});
  ASSERT_EQ(r.code, 0) << r.err;
  ProblemSpec p = load_problem(d.str("ex2.yaml"));
  EXPECT_EQ(p.n(), 3);
  std::ifstream f(d.path() / "ex2_minimizer.csv");
  ExtendedProcess ep = read_extended_csv(f);
  EXPECT_EQ(ep.y, bundled_example("ex2").minimizer.y);
  EXPECT_TRUE(fs::exists(d.path() / "ex2_multipliers.csv"));
  EXPECT_EQ(run_cli({"examples", "export", "ex7", "--out", d.str()}).code, cli::kInputError);
}

TEST(Cli, ExportToUnwritableLocation) {
  TempDir d;
  std::ofstream(d.path() / "file") << "x";
  EXPECT_EQ(run_cli({"examples", "export", "ex1", "--out", d.str("file")}).code, cli::kInputError);
  fs::create_directories(d.path() / "ro");
  fs::permissions(d.path() / "ro", fs::perms::owner_read | fs::perms::owner_exec);
  std::ofstream probe(d.path() / "ro" / "probe");
  const bool writable = static_cast<bool>(probe);
  probe.close();
  if (!writable) {
    EXPECT_EQ(run_cli({"examples", "export", "ex1", "--out", d.str("ro")}).code, cli::kInputError);
  }
  fs::permissions(d.path() / "ro", fs::perms::owner_all);
}

TEST(Cli, CheckBundledCertificates) {
  EXPECT_EQ(run_cli({"check", "--example", "ex2"}).code, cli::kOk);
  EXPECT_EQ(run_cli({"check", "--example", "ex3"}).code, cli::kOk);
  CliRun r = run_cli({"check", "--example", "ex1", "--classify"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("Abnormal"), std::string::npos);
}

TEST(Cli, CheckEx1LambdaOneFails) {
  TempDir d;
  MultiplierSet ms = bundled_example("ex1").multipliers;
  ms.lambda = 1.0;
  {
    std::ofstream f(d.path() / "m.csv");
    write_multipliers_csv(f, ms);
  }
  CliRun r = run_cli({"check", "--example", "ex1", "--multipliers", d.str("m.csv")});
  EXPECT_EQ(r.code, cli::kResidualFail);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, CheckGridMismatch) {
  TempDir d;
  MultiplierSet ms = bundled_example("ex2").multipliers;
  ms.path.s(5) += 0.01;
  {
    std::ofstream f(d.path() / "m.csv");
    write_multipliers_csv(f, ms);
  }
  EXPECT_EQ(run_cli({"check", "--example", "ex2", "--multipliers", d.str("m.csv")}).code, cli::kInputError);
  EXPECT_EQ(run_cli({"check", "--example", "ex2", "--trajectory", d.str("missing.csv")}).code, cli::kInputError);
}

TEST(Cli, SolveEx1Extended) {
  TempDir d;
  CliRun r = run_cli({"solve", "--example", "ex1", "--out", d.str()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_LE(number_after(r.out, "cost"), -0.95);
  for (const char* f : {"candidate.csv", "solver.log", "manifest.txt"}) EXPECT_TRUE(fs::exists(d.path() / f)) << f;
  EXPECT_NE(slurp(d.path() / "manifest.txt").find("seed 1"), std::string::npos);
}

TEST(Cli, SolveEx1Strict) {
  TempDir d;
  CliRun r = run_cli({"solve", "--example", "ex1", "--strict-eps", "0.05", "--out", d.str()});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_GE(number_after(r.out, "cost"), -0.05);
  EXPECT_TRUE(fs::exists(d.path() / "strict.csv"));
}

TEST(Cli, SolveInfeasible) {
  TempDir d;
  const std::string yaml = std::string(bundled_example("ex1").problem_yaml);
  std::string bad = yaml;
  bad.replace(bad.find("x2: [free, {hi: 0}]"), 19, "x2: [{fixed: 5}, {fixed: 0}]");
  std::ofstream(d.path() / "p.yaml") << bad;
  CliRun r = run_cli({"solve", "--problem", d.str("p.yaml"), "--multistarts", "2", "--N", "20", "--out", d.str("o")});
  EXPECT_EQ(r.code, cli::kInfeasible) << r.out << r.err;
}

TEST(Cli, SolveIsReproducible) {
  TempDir a, b;
  const std::vector<std::string> flags{"--example", "ex2", "--N", "20", "--multistarts", "2", "--seed", "5"};
  auto args = [&](const TempDir& d) {
    std::vector<std::string> v{"solve"};
    v.insert(v.end(), flags.begin(), flags.end());
    v.push_back("--out");
    v.push_back(d.str());
    return v;
  };
  CliRun ra = run_cli(args(a));
  CliRun rb = run_cli(args(b));
  EXPECT_EQ(ra.out, rb.out);
  EXPECT_EQ(slurp(a.path() / "candidate.csv"), slurp(b.path() / "candidate.csv"));
  EXPECT_EQ(slurp(a.path() / "solver.log"), slurp(b.path() / "solver.log"));
}

TEST(Cli, GapEx1Detected) {
  TempDir d;
  CliRun r = run_cli({"gap", "--example", "ex1", "--out", d.str()});
  EXPECT_EQ(r.code, cli::kGapDetected) << r.out;
  EXPECT_TRUE(fs::exists(d.path() / "gap.csv"));
  EXPECT_TRUE(fs::exists(d.path() / "gap_report.txt"));
}

TEST(Cli, GapEx2CertifiedByNormality) {
  TempDir d;
  CliRun r = run_cli({"gap", "--example", "ex2", "--multistarts", "4", "--out", d.str()});
  EXPECT_EQ(r.code, cli::kOk) << r.out;
  EXPECT_NE(r.out.find("normality"), std::string::npos);
}

TEST(Cli, GapEx3CertifiedWithoutDrift) {
  TempDir d;
  CliRun r = run_cli({"gap", "--example", "ex3", "--multistarts", "4", "--out", d.str()});
  EXPECT_EQ(r.code, cli::kOk) << r.out;
  EXPECT_NE(r.out.find("no-drift"), std::string::npos);
}

TEST(Cli, IsolationPrintsDelta) {
  TempDir d;
  CliRun r = run_cli({"isolation", "--example", "ex1", "--delta", "0.1", "--multistarts", "1", "--N", "20", "--out", d.str()});
  EXPECT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_NE(r.out.find("delta 0.1"), std::string::npos);
  EXPECT_EQ(run_cli({"isolation", "--example", "ex1", "--delta", "-1"}).code, cli::kInputError);
}

}  // namespace
}  // namespace impgap
