#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "valq/cli.hpp"
#include "valq/errors.hpp"

using namespace valq;
using namespace valq::cli;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "valq");
  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) parts.push_back(item);
  return parts;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(split(line, ','));
  }
  return rows;
}

}  // namespace

TEST(GroupStructure, FromElementOrders) {
  EXPECT_EQ(group_structure({1}), "1");
  EXPECT_EQ(group_structure({1, 2}), "Z/2");
  EXPECT_EQ(group_structure({1, 4, 2, 4}), "Z/4");
  EXPECT_EQ(group_structure({1, 2, 2, 2}), "Z/2 x Z/2");
  EXPECT_EQ(group_structure({1, 2, 2, 2, 4, 4, 4, 4}), "Z/2 x Z/4");
  EXPECT_EQ(group_structure({1, 3, 3, 2, 6, 6}), "Z/6");
}

TEST(Config, DigitsLimitedByPrecision) {
  EXPECT_EQ(max_digits(192), 49);
  RunConfig cfg;
  cfg.precision_bits = 96;
  cfg.digits_out = max_digits(96);
  EXPECT_NO_THROW(cfg.validate());
  cfg.digits_out += 1;
  EXPECT_THROW(cfg.validate(), ParseError);
}

TEST(Config, EnvironmentPrecision) {
  setenv("VALQ_PREC", "80", 1);
  EXPECT_EQ(default_config().precision_bits, 80);
  setenv("VALQ_PREC", "eighty", 1);
  EXPECT_THROW(default_config(), ParseError);
  unsetenv("VALQ_PREC");
  EXPECT_EQ(default_config().precision_bits, 192);
}

TEST(Run, ExitCodes) {
  EXPECT_EQ(run_args({"val", "--cf", "[1]", "--prec", "64"}).code, kExitOk);
  EXPECT_EQ(run_args({"--help"}).code, kExitOk);
  EXPECT_EQ(run_args({"val", "--cf", "[0]"}).code, kExitParse);
  EXPECT_EQ(run_args({"val", "--surd", "sqrt(16)"}).code, kExitParse);
  EXPECT_EQ(run_args({"val"}).code, kExitParse);
  EXPECT_EQ(run_args({"val", "--cf", "[1]", "--form", "1,1,-1"}).code, kExitParse);
  EXPECT_EQ(run_args({"val", "--cf", "[1]", "--prec", "16"}).code, kExitParse);
  EXPECT_EQ(run_args({"val", "--cf", "[1]", "--prec", "64", "--digits", "40"}).code, kExitParse);
  EXPECT_EQ(run_args({"table", "8"}).code, kExitParse);
  EXPECT_EQ(run_args({"bogus"}).code, kExitParse);
  EXPECT_EQ(run_args({"val", "--cf", "[1]", "--prec", "100000"}).code, kExitResource);
  EXPECT_EQ(run_args({"markoff", "--depth", "9"}).code, kExitResource);
  const Outcome bad = run_args({"val", "--cf", "[1,x]"});
  EXPECT_EQ(bad.code, kExitParse);
  EXPECT_FALSE(bad.err.empty());
}

TEST(Run, ValTextShowsRequestedDigits) {
  const Outcome o = run_args({"val", "--cf", "[2,1]", "--prec", "96", "--digits", "20"});
  ASSERT_EQ(o.code, kExitOk);
  EXPECT_NE(o.out.find("709.79235900803201027"), std::string::npos) << o.out;
}

TEST(Run, CsvRoundTripThroughLibrary) {
  const Outcome o = run_args({"classes", "136", "--prec", "96", "--format", "csv"});
  ASSERT_EQ(o.code, kExitOk);
  const auto rows = csv_rows(o.out);
  ASSERT_EQ(rows.size(), 5u);
  EXPECT_EQ(rows[0][0], "D");
  EXPECT_EQ(rows[0].size(), 12u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const QuadIrr w = QuadIrr::make(Integer(r[1]), Integer(r[2]), Integer(r[3]));
    EXPECT_EQ(w.discriminant(), Integer(r[0]));
    const BigComplex again = val(w, 64).value;
    EXPECT_NEAR(again.re.to_double(), std::stod(r[4]), 1e-12);
    EXPECT_NEAR(again.im.to_double(), std::stod(r[5]), 1e-12);
  }
}

TEST(Run, JsonFieldsAreStrings) {
  const Outcome o = run_args({"val", "--surd", "(-1+sqrt(34))/11", "--prec", "96", "--format", "json"});
  ASSERT_EQ(o.code, kExitOk);
  const nlohmann::json j = nlohmann::json::parse(o.out);
  for (const auto& [key, value] : j.items()) EXPECT_TRUE(value.is_string()) << key;
  EXPECT_EQ(j.at("D"), "136");
  EXPECT_EQ(j.at("im_val").get<std::string>().substr(0, 8), "-0.51979");
}

TEST(Run, OutputFile) {
  const std::string path = ::testing::TempDir() + "valq_out.csv";
  ASSERT_EQ(run_args({"val", "--cf", "[1]", "--prec", "64", "--format", "csv", "--out", path}).code, kExitOk);
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header.substr(0, 9), "D,rep_a,r");
  EXPECT_EQ(row.substr(0, 2), "5,");
}

TEST(Sweep, SmallRange) {
  RunConfig cfg;
  cfg.precision_bits = 64;
  cfg.digits_out = 10;
  const SweepReport rep = cmd_sweep(136, cfg);
  std::size_t d136 = 0;
  for (const ValueRow& r : rep.rows) d136 += r.D == 136;
  EXPECT_EQ(d136, 4u);
  ASSERT_TRUE(rep.summary.min_real.has_value());
  EXPECT_EQ(rep.rows[*rep.summary.min_real].D, 5);
  EXPECT_EQ(rep.rows[rep.summary.min_re_all].D, 5);
  std::size_t total = rep.summary.outside;
  for (std::size_t c : rep.summary.histogram) total += c;
  EXPECT_EQ(total, rep.rows.size());
  // Rows are ordered by discriminant.
  for (std::size_t i = 1; i < rep.rows.size(); ++i) EXPECT_LE(rep.rows[i - 1].D, rep.rows[i].D);
  EXPECT_THROW(cmd_sweep(4, cfg), DomainError);
}

TEST(Tables, MarkoffTableLeadsWithSpecialNodes) {
  RunConfig cfg;
  cfg.precision_bits = 64;
  cfg.digits_out = 10;
  const Table t = cmd_table(7, cfg);
  ASSERT_EQ(t.markoff_m.size(), 10u);
  EXPECT_EQ(t.markoff_m[0], 1);
  EXPECT_EQ(t.markoff_m[1], 2);
  EXPECT_EQ(t.markoff_m[2], 5);
  EXPECT_EQ(t.markoff_m[9], 233);
  EXPECT_THROW(cmd_table(0, cfg), DomainError);
}

TEST(Binary, SmokeTest) {
  const char* exe = std::getenv("VALQ_CLI");
  if (!exe) GTEST_SKIP() << "VALQ_CLI not set";
  const std::string cmd = std::string(exe) + " val --cf '[1]' --prec 96 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  std::string out;
  std::array<char, 256> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  EXPECT_EQ(status, 0);
  EXPECT_NE(out.find("706.32481354081258206"), std::string::npos) << out;
  const std::string bad = std::string(exe) + " val --cf '[0]' >/dev/null 2>&1";
  EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), kExitParse);
}
