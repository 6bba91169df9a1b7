#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "cli.hpp"

namespace qdoubling {
namespace {

namespace fs = std::filesystem;
using io::json;

struct Outcome {
  int code;
  std::string out, err;
};

Outcome run(std::vector<std::string> args) {
  args.insert(args.begin(), "qdoubling");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("qdoubling_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    io::write_text(path(name), text);
    return path(name);
  }
  static json read(const std::string& p) { return io::read_json_file(p); }

  fs::path dir_;
};

TEST_F(Cli, VerifyGroupPasses) {
  auto r = run({"verify", "--suite", "all", "--group", "cyclic:12", "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = json::parse(r.out);
  EXPECT_EQ(doc.at("command"), "verify");
  EXPECT_EQ(doc.at("aggregate").at("violation_count"), 0u);
  EXPECT_EQ(doc.at("aggregate").at("instances"), 6u * 4095u);
  EXPECT_EQ(doc.at("config").at("mode"), "exhaustive");
}

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"verify", "--group", "cyclic:4", "--nope"}).code, 1);
  EXPECT_EQ(run({"verify", "--group", "cyclic:20"}).code, 1);  // sampling needs a seed
  EXPECT_EQ(run({"verify", "--group", "cyclic:0"}).code, 1);
  EXPECT_EQ(run({"verify", "--instance", path("missing.json")}).code, 1);
  EXPECT_EQ(run({"construct", "--N", "2", "--h", "10", "--m", "26"}).code, 1);
  EXPECT_EQ(run({"extract", "--alpha", "1", "--group", "cyclic:4", "--subset", "0"}).code, 1);
  EXPECT_EQ(run({"replay"}).code, 1);
  EXPECT_EQ(run({"construct", "--help"}).code, 0);
}

TEST_F(Cli, SchemaErrorsNameThePointer) {
  const auto bad = write("bad.json", R"({"group":"cyclic:6","subgroup":{"elements":[0,3]},"subset":{"elements":[0,9]}})");
  auto r = run({"verify", "--instance", bad});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/subset/elements/1"), std::string::npos) << r.err;

  const auto cfg = write("scan.json", R"({"groups":"cyclic:4","mode":"random","trials":3})");
  r = run({"scan", "--config", cfg});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/seed"), std::string::npos);

  const auto wrong = write("sharp.json", R"({"group":"cyclic:4xgl2z","subgroup":{"project":[1]},
                                            "subset":{"construction":"sharpness","N":1,"h":4,"m":25}})");
  r = run({"verify", "--instance", wrong});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("/group"), std::string::npos);
}

TEST_F(Cli, ThreadsEnvironmentIsValidated) {
  ::setenv("QDOUBLING_THREADS", "zero", 1);
  EXPECT_EQ(run({"verify", "--group", "cyclic:4"}).code, 1);
  ::setenv("QDOUBLING_THREADS", "3", 1);
  EXPECT_EQ(run({"verify", "--group", "cyclic:4"}).code, 0);
  ::unsetenv("QDOUBLING_THREADS");
}

TEST_F(Cli, ConstructEmitsLoadableInstance) {
  const auto inst = path("inst.json"), report = path("construct.json");
  auto r = run({"construct", "--N", "1", "--h", "4", "--m", "25", "--emit", inst, "--out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto doc = read(report);
  EXPECT_EQ(doc.at("measures").at("mu_piA2").at("measured").at("value"), "5/1");
  EXPECT_EQ(doc.at("limit").at("value"), "5/1");
  EXPECT_EQ(doc.at("counts").at("matrix_square"), 5u);

  r = run({"verify", "--instance", inst});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("report").at("suites").at("fact41").at("applicable"), false);

  r = run({"replay", "--instance", inst});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("closed_forms").at("mu_A").at("closed_form").at("value"), "63/50");

  EXPECT_EQ(run({"replay", "--report", report}).code, 0);
  auto tampered = doc;
  tampered["K"]["value"] = "1/1";
  EXPECT_EQ(run({"replay", "--report", write("t.json", io::dump(tampered))}).code, 2);

  r = run({"extract", "--alpha", "2", "--instance", inst});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("certificates").size(), 1u);
}

TEST_F(Cli, ExtractOnSubgroupKeepsEverything) {
  const auto trace = path("trace.txt");
  auto r = run({"extract", "--alpha", "2", "--group", "cyclic:12", "--subgroup", "0,6", "--subset", "0,3,6,9",
                "--trace", trace});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto cert = json::parse(r.out).at("certificates").at(0);
  EXPECT_EQ(cert.at("measure_ratio").at("value"), "1/1");
  EXPECT_EQ(cert.at("B").size(), 4u);
  std::ifstream in(trace);
  std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_NE(text.find("chosen s"), std::string::npos);
}

TEST_F(Cli, ScanIsThreadIndependentAndReplays) {
  const auto cfg = write("scan.json", R"({"groups":["quaternion","dihedral:3xcyclic:2"],"mode":"random","trials":60})");
  const auto one = path("one.json"), eight = path("eight.json"), csv = path("one.csv");
  ASSERT_EQ(run({"scan", "--config", cfg, "--seed", "11", "--threads", "1", "--out", one, "--csv", csv}).code, 0);
  ASSERT_EQ(run({"scan", "--config", cfg, "--seed", "11", "--threads", "8", "--out", eight}).code, 0);
  std::ifstream a(one), b(eight);
  std::string ta((std::istreambuf_iterator<char>(a)), {}), tb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(ta, tb);
  EXPECT_EQ(read(one).at("config").at("seed"), 11u);

  auto r = run({"replay", "--report", one});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("replayed"), 60u + 20u);

  auto doc = read(one);
  doc["instances"][3]["size_A"] = 999;
  r = run({"replay", "--report", write("bad.json", io::dump(doc))});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("replay mismatch"), std::string::npos);
}

TEST_F(Cli, ReplayById) {
  auto r = run({"replay", "--id", "g=cyclic:12;H=41;w=c;A=47;B=47;C=47;x=0;y=0;s=all;a=2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("report").at("stats").at("K").at("value"), "2/1");
  EXPECT_EQ(run({"replay", "--id", "g=cyclic:12;H=1"}).code, 1);
}

TEST_F(Cli, ProjectionInstancesUseInlineIds) {
  const auto inst = write("p.json", R"({"group":"cyclic:2xcyclic:3","subgroup":{"project":[1]},
                                       "subset":{"elements":[[0,0],[1,1],[0,2]]},
                                       "companions":{"B":{"elements":[[1,0]]},"x":[1,2]}})");
  auto r = run({"verify", "--instance", inst, "--out", path("v.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = read(path("v.json")).at("report");
  const auto id = report.at("id").get<std::string>();
  ASSERT_EQ(id.rfind("instance:", 0), 0u);
  r = run({"replay", "--id", id});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out).at("report"), report);
  EXPECT_EQ(run({"replay", "--report", path("v.json")}).code, 0);
}

}  // namespace
}  // namespace qdoubling
