#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "support.hpp"

namespace {

const char* kFixtures[] = {"bubble_sort", "nested5", "sequential", "continue_loop", "inline_main"};

std::string cli() { return testsupport::cli_path(); }

int run_cli(const std::string& args, std::string* out = nullptr) {
    return testsupport::run(cli() + " " + args + " 2>/dev/null", out);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, AnalyzeIsByteIdenticalAcrossRuns) {
    for (const char* name : kFixtures) {
        std::string a, b;
        std::string args = "analyze " + testsupport::fixture(name) + " --source-root " + testsupport::fixture_source_dir();
        ASSERT_EQ(run_cli(args, &a), 0) << name;
        ASSERT_EQ(run_cli(args, &b), 0) << name;
        EXPECT_FALSE(a.empty());
        EXPECT_EQ(a, b) << name;
        auto j = nlohmann::json::parse(a);
        EXPECT_TRUE(j["report"].contains("disparate_loop_fraction")) << name;
    }
}

TEST(Cli, AnalyzeWritesJsonAndCsv) {
    std::string dir = ::testing::TempDir();
    std::string json_path = dir + "/asmlens_cli.json", csv_path = dir + "/asmlens_cli.csv";
    std::string out;
    ASSERT_EQ(run_cli("analyze " + testsupport::fixture("nested5") + " --json " + json_path + " --csv " + csv_path, &out), 0);
    EXPECT_TRUE(out.empty());
    auto j = nlohmann::json::parse(slurp(json_path));
    EXPECT_EQ(j["summary"]["no_debug_info"], false);
    EXPECT_EQ(slurp(csv_path).rfind("instructions_per_block,blocks\n", 0), 0u);
}

TEST(Cli, LayoutModes) {
    std::string mem, loop;
    ASSERT_EQ(run_cli("layout " + testsupport::fixture("nested5") + " --function nest5", &mem), 0);
    ASSERT_EQ(run_cli("layout " + testsupport::fixture("nested5") + " --function nest5 --mode loop", &loop), 0);
    auto m = nlohmann::json::parse(mem), l = nlohmann::json::parse(loop);
    EXPECT_EQ(m["ordering_mode"], "memory_address");
    EXPECT_EQ(l["ordering_mode"], "loop_structure");
    EXPECT_EQ(m["arcs"].size(), 5u);
    EXPECT_EQ(m["total_rows"], m["rows"].size());
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run_cli(""), 2);
    EXPECT_EQ(run_cli("bogus"), 2);
    EXPECT_EQ(run_cli("layout " + testsupport::fixture("nested5") + " --function no_such_fn"), 2);
    EXPECT_EQ(run_cli("layout " + testsupport::fixture("nested5") + " --function nest5 --mode sideways"), 2);
    EXPECT_EQ(run_cli("analyze /nonexistent/binary"), 3);
    EXPECT_EQ(run_cli("analyze " + testsupport::fixture_source_dir() + "/bubble_sort.c"), 3);
    EXPECT_EQ(run_cli("analyze " + testsupport::fixture("bubble_sort") + " --json /nonexistent/dir/out.json"), 1);
}

TEST(Cli, ErrorsGoToStderr) {
    std::string out;
    EXPECT_EQ(testsupport::run(cli() + " analyze /nonexistent/binary 2>&1 >/dev/null", &out), 3);
    EXPECT_NE(out.find("/nonexistent/binary"), std::string::npos) << out;
}
