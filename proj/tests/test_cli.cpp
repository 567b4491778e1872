#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tailtest/cli/config.hpp"
#include "tailtest/cli/ingest.hpp"
#include "tailtest/cli/run.hpp"
#include "tailtest/distributions.hpp"
#include "tailtest/error.hpp"

namespace tailtest::cli {
namespace {

namespace fs = std::filesystem;

class Workspace {
 public:
  Workspace() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("tailtest_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_ / "cache");
  }
  ~Workspace() { fs::remove_all(root_); }

  std::string file(const std::string& name, const std::string& text) const {
    const auto path = root_ / name;
    std::ofstream(path) << text;
    return path.string();
  }
  std::string cache() const { return (root_ / "cache").string(); }
  Environment env() const { return {{std::string(kCacheEnvVar), cache()}}; }

 private:
  fs::path root_;
};

RunConfig parse_ok(const std::vector<std::string>& args, const Environment& env = {}) {
  const auto r = parse_config(args, env);
  EXPECT_TRUE(r.config.has_value()) << r.message;
  return r.config.value_or(RunConfig{});
}

std::string pareto_file(const Workspace& ws, bool huge_top) {
  RngStream rng(2015);
  const auto s = sample(ParetoParams{1.5, 1.0}, 300, rng);
  std::ostringstream out;
  for (std::size_t i = 0; i < s.size(); ++i) out << (i == 0 && huge_top ? s[0] * 1e6 : s[i]) << '\n';
  return ws.file(huge_top ? "pareto_top.txt" : "pareto.txt", out.str());
}

TEST(Parse, BlockTestHappyPath) {
  Workspace ws;
  const auto data = ws.file("data.csv", "4\n2\n1\n1\n");
  const auto c = parse_ok({"test", "--stat", "ss", "--r", "3", "--level", "0.1", data});
  EXPECT_EQ(c.command, Command::test);
  EXPECT_EQ(c.statistic, StatisticKind::sum_sum);
  EXPECT_EQ(c.r, 3u);
  EXPECT_DOUBLE_EQ(c.level, 0.1);
  EXPECT_EQ(c.inputs, std::vector<std::string>{data});
}

TEST(Parse, ListsEveryViolation) {
  Workspace ws;
  const auto data = ws.file("data.csv", "1\n");
  const auto r = parse_config({"test", "--level", "1.5", "--r", "0", data, "--transform", "excess"}, {});
  EXPECT_FALSE(r.config);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.message.find("--level must be in (0, 1)"), std::string::npos) << r.message;
  EXPECT_NE(r.message.find("--r must be >= 1"), std::string::npos) << r.message;
  EXPECT_NE(r.message.find("--transform excess needs --u"), std::string::npos) << r.message;
}

TEST(Parse, UnreadableInputAndUnknownCommand) {
  EXPECT_EQ(parse_config({"test", "/nonexistent/file.csv"}, {}).exit_code, 2);
  EXPECT_EQ(parse_config({"frobnicate"}, {}).exit_code, 2);
  EXPECT_EQ(parse_config({"--help"}, {}).exit_code, 0);
  EXPECT_EQ(parse_config({"--version"}, {}).exit_code, 0);
}

TEST(Parse, SeedAndCacheDefaults) {
  Workspace ws;
  const auto data = ws.file("d.csv", "1\n2\n3\n4\n5\n");
  const auto c = parse_ok({"mixture", data}, ws.env());
  EXPECT_TRUE(c.seed_from_entropy);
  EXPECT_EQ(c.cache_dir, ws.cache());
  const auto d = parse_ok({"mixture", "--seed", "7", "--cache-dir", "/tmp/elsewhere", data}, ws.env());
  EXPECT_FALSE(d.seed_from_entropy);
  EXPECT_EQ(d.seed, 7u);
  EXPECT_EQ(d.cache_dir, "/tmp/elsewhere");
}

TEST(Parse, CommandDefaults) {
  Workspace ws;
  const auto data = ws.file("d.csv", "1\n");
  EXPECT_EQ(parse_ok({"test", data}).statistic, StatisticKind::sum_sum);
  EXPECT_EQ(parse_ok({"outward", data}).statistic, StatisticKind::max_sum);
  const auto inward = parse_ok({"inward", data});
  EXPECT_EQ(inward.statistic, StatisticKind::max_robust_sum);
  EXPECT_EQ(effective_m(inward), 10u);
  EXPECT_EQ(effective_format(parse_ok({"ccdf", data})), OutputFormat::csv);
  EXPECT_EQ(parse_config({"test", "--format", "csv", data}, {}).exit_code, 2);
}

TEST(Parse, ConfigEchoRoundTrips) {
  Workspace ws;
  const auto data = ws.file("d.csv", "1\n");
  const auto c = parse_ok({"sweep", "--stat", "ms", "--m", "4", "--nmin", "5", "--nmax", "9", "--seed", "3",
                           "--tail-model", "exponential", "--u", "0.5", data});
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(config_from_json(nlohmann::json{{"command", "nope"}}), Error);
}

TEST(Ingest, PlainColumn) {
  std::istringstream in("4\n2\n1\n1\n");
  const auto r = ingest_sample(in, {});
  EXPECT_EQ(r.sample, OrderedSample({4, 2, 1, 1}));
  EXPECT_TRUE(r.skipped.empty());
}

TEST(Ingest, HeaderAndCommas) {
  std::istringstream in("id,value\r\n1,3.5\r\n2,1.5\r\n# comment\n\n3,2.5\n");
  const auto r = ingest_sample(in, {.column = "value"});
  EXPECT_EQ(r.sample, OrderedSample({3.5, 2.5, 1.5}));
  EXPECT_EQ(r.skipped.size(), 1u);
  EXPECT_EQ(r.skipped[0].reason, "header");
  EXPECT_EQ(r.header, "id,value");
  std::istringstream by_index("a b\n1 10\n2 20\n");
  EXPECT_EQ(ingest_sample(by_index, {.column = "2"}).sample, OrderedSample({20, 10}));
}

TEST(Ingest, ThresholdAndLogTransform) {
  std::istringstream in("0.5\n1\n2.718281828459045\n7.38905609893065\n");
  const auto r = ingest_sample(in, {.threshold = 1.0, .transform = Transform::log});
  EXPECT_EQ(r.below_threshold, 1u);
  ASSERT_EQ(r.sample.size(), 3u);
  EXPECT_NEAR(r.sample[0], 2.0, 1e-12);
  EXPECT_NEAR(r.sample[1], 1.0, 1e-12);
  EXPECT_GE(r.sample.smallest(), 0.0);
}

TEST(Ingest, LogTransformNamesBadRows) {
  std::istringstream in("3\n-1\n2\n0\n");
  try {
    ingest_sample(in, {.transform = Transform::log});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parameter_domain);
    EXPECT_NE(std::string(e.what()).find("2, 4"), std::string::npos) << e.what();
  }
}

TEST(Ingest, NoNumericRows) {
  std::istringstream in("# nothing\nname\n");
  try {
    ingest_sample(in, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::input);
  }
}

TEST(Ingest, PricesByDayWithDuplicates) {
  std::istringstream in("timestamp,price,day\n0,100,a\n30,101,a\n30,102,a\n60,103,a\n0,50,b\n30,49,b\n");
  const auto r = ingest_prices(in, 30.0);
  ASSERT_EQ(r.days.size(), 2u);
  EXPECT_EQ(r.days[0].day_id, "a");
  EXPECT_EQ(r.days[0].prices, (std::vector<double>{100, 102, 103}));
  EXPECT_EQ(r.duplicate_timestamps, 1u);
  EXPECT_EQ(r.days[1].prices, (std::vector<double>{50, 49}));
}

TEST(Run, CcdfCsv) {
  Workspace ws;
  const auto c = parse_ok({"ccdf", ws.file("d.csv", "4\n2\n1\n1\n")});
  const auto out = run_command(c);
  EXPECT_EQ(out.exit_code, 0);
  EXPECT_EQ(render(out), "value,probability\n4,0.25\n2,0.5\n1,0.75\n1,1\n");
}

TEST(Run, EnvelopeShape) {
  Workspace ws;
  const auto c = parse_ok({"test", "--stat", "dk", "--r", "1", "--format", "json", ws.file("d.csv", "4\n2\n1\n1\n")});
  const auto out = run_command(c);
  ASSERT_EQ(out.exit_code, 0) << out.envelope.dump(2);
  const auto& e = out.envelope;
  for (const char* key : {"tool", "version", "schema_version", "command", "config", "seed", "timing", "warnings",
                          "cache", "payload"}) {
    EXPECT_TRUE(e.contains(key)) << key;
  }
  EXPECT_EQ(e["tool"], "tailtest");
  EXPECT_NEAR(e["payload"]["result"]["p_value"].get<double>(), 27.0 / 64.0, 1e-12);
}

TEST(Run, CalibrateHitsCacheSecondTime) {
  Workspace ws;
  const auto c = parse_ok({"calibrate", "--stat", "ms", "--n", "30", "--r", "5", "--m", "5", "--a", "0.1"}, ws.env());
  const auto first = run_command(c);
  ASSERT_EQ(first.exit_code, 0) << first.envelope.dump(2);
  EXPECT_NEAR(first.envelope["payload"]["b"].get<double>(), 0.028, 0.01);
  EXPECT_FALSE(first.envelope["cache"]["calibration_hit"].get<bool>());
  const auto second = run_command(c);
  EXPECT_TRUE(second.envelope["cache"]["calibration_hit"].get<bool>());
  EXPECT_EQ(first.envelope["payload"]["b"], second.envelope["payload"]["b"]);
}

TEST(Run, SweepFindsDominatingPoint) {
  Workspace ws;
  const auto c = parse_ok({"sweep", "--stat", "mrs", "--m", "10", "--nmin", "10", "--nmax", "100", "--format", "json",
                           pareto_file(ws, true)},
                          ws.env());
  const auto out = run_command(c);
  ASSERT_EQ(out.exit_code, 0) << out.envelope.dump(2);
  const auto& sweep = out.envelope["payload"]["sweep"];
  EXPECT_TRUE(sweep["verdict"].get<bool>());
  EXPECT_EQ(sweep["trail"].size(), 91u);
  EXPECT_EQ(sweep["run_rule_c"], 10);
}

TEST(Run, DecisionsDoNotChangeExitCode) {
  Workspace ws;
  const auto quiet = run_command(parse_ok({"test", "--stat", "ss", "--r", "1", pareto_file(ws, false),
                                           "--transform", "log", "--u", "1"}, ws.env()));
  const auto loud = run_command(parse_ok({"test", "--stat", "ss", "--r", "1", pareto_file(ws, true),
                                          "--transform", "log", "--u", "1"}, ws.env()));
  EXPECT_EQ(quiet.exit_code, 0);
  EXPECT_EQ(loud.exit_code, 0);
  EXPECT_TRUE(loud.envelope["payload"]["result"]["rejected"].get<bool>());
}

TEST(Run, OperationalFailuresMapToExitCodes) {
  Workspace ws;
  const auto degenerate = run_command(parse_ok({"test", "--stat", "ms", ws.file("z.csv", "0\n0\n0\n")}, ws.env()));
  EXPECT_EQ(degenerate.exit_code, 3);
  EXPECT_TRUE(degenerate.envelope.contains("error"));
  EXPECT_TRUE(degenerate.envelope["payload"].is_null());
  const auto layering = run_command(parse_ok({"layers", "--breakpoints", "1,100,200", ws.file("l.csv", "2\n3\n4\n")}));
  EXPECT_EQ(layering.exit_code, 3);
  const auto tight = run_command(parse_ok({"calibrate", "--stat", "ms", "--n", "20", "--r", "3", "--tolerance", "1e-7",
                                           "--calibration-replicates", "997"}, ws.env()));
  EXPECT_EQ(tight.exit_code, 4);
  EXPECT_EQ(exit_code_for(ErrorCode::usage), 2);
  EXPECT_EQ(exit_code_for(ErrorCode::input), 3);
  EXPECT_EQ(exit_code_for(ErrorCode::numeric), 4);
}

TEST(Run, ReplayIsBitIdentical) {
  Workspace ws;
  const std::vector<std::vector<std::string>> commands{
      {"simulate", "--study", "mask-swamp", "--n", "30", "--k", "3", "--max-block", "4", "--replications", "60",
       "--mixture-replicates", "100", "--format", "json"},
      {"mixture", "--mixture-replicates", "200", ws.file("m.csv", "9\n8.8\n9.1\n1\n0.5\n0.2\n2\n1.4\n0.3\n0.9\n")},
  };
  for (const auto& args : commands) {
    const auto first = run_command(parse_ok(args, ws.env()));
    ASSERT_EQ(first.exit_code, 0) << first.envelope.dump(2);
    const auto report = ws.file("report.json", first.envelope.dump());
    const auto again = run_command(config_from_json(first.envelope["config"]));
    EXPECT_EQ(again.envelope["payload"].dump(), first.envelope["payload"].dump()) << args[0];
    const auto rerun = run_command(parse_ok({"rerun", report}));
    EXPECT_EQ(rerun.envelope["payload"].dump(), first.envelope["payload"].dump()) << args[0];
  }
}

}  // namespace
}  // namespace tailtest::cli
