#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct Run {
    int status = -1;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(VOXELBOT_CLI) + " " + args + " 2>&1";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    while (std::size_t n = fread(buf, 1, sizeof buf, p)) r.out.append(buf, n);
    const int st = pclose(p);
    r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) { return fs::temp_directory_path() / ("voxelbot_cli_" + name); }

}  // namespace

TEST(Cli, GenDataIsDeterministic) {
    const auto a = scratch("a.json");
    const auto b = scratch("b.json");
    ASSERT_EQ(run("gen-data -n 100 --seed 5 --out " + a.string()).status, 0);
    ASSERT_EQ(run("gen-data -n 100 --seed 5 --out " + b.string()).status, 0);
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(run("validate --kind parse " + a.string()).status, 0);
    fs::remove(a);
    fs::remove(b);
}

TEST(Cli, EmptyPlayScriptExitsZero) {
    const auto s = scratch("empty.play");
    std::ofstream(s) << "# nothing\n";
    const auto r = run("play " + s.string() + " --server 127.0.0.1:1");
    EXPECT_EQ(r.status, 0) << r.out;
    fs::remove(s);
}

TEST(Cli, UnreachableServerFails) {
    const auto s = scratch("one.play");
    std::ofstream(s) << "say hi\n";
    const auto r = run("play " + s.string() + " --server 127.0.0.1:1");
    EXPECT_NE(r.status, 0);
    EXPECT_FALSE(r.out.empty());
    fs::remove(s);
}

TEST(Cli, ValidateReportsLine) {
    const auto s = scratch("bad.jsonl");
    std::ofstream(s) << "[5, 1, [0, 0, 0], [1, 0], \"P\"]\n[4, 1, [0, 0, 0], [1, 0], \"B\"]\n";
    const auto r = run("validate --kind house " + s.string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.out.find("2"), std::string::npos) << r.out;
    fs::remove(s);
}

TEST(Cli, ReplayPrintsHash) {
    const auto s = scratch("log.jsonl");
    std::ofstream(s) << "[1, 1, [128, 63, 128], [5, 0], \"P\"]\n";
    const auto r = run("replay " + s.string());
    EXPECT_EQ(r.status, 0) << r.out;
    EXPECT_NE(r.out.find("hash"), std::string::npos);
    fs::remove(s);
}

TEST(Cli, UnknownSubcommand) { EXPECT_NE(run("frobnicate").status, 0); }
