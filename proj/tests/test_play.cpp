#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "voxelbot/agent.hpp"
#include "voxelbot/play.hpp"

using namespace voxelbot;
namespace pr = voxelbot::protocol;

namespace {

std::vector<PlayCommand> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_play_script(in);
}

// Runs a server and an agent on background threads, and a script over TCP.
struct Live {
    Live() : core(config()), server(core, 0) {
        server_thread = std::thread([this] { server.run(stop, 5); });
        agent_thread = std::thread([this] {
            TcpTransport link("127.0.0.1", server.port());
            Agent agent(link, AgentConfig{});
            agent.login();
            agent.run(stop, 5);
        });
    }
    ~Live() {
        stop = true;
        agent_thread.join();
        server_thread.join();
    }
    static ServerConfig config() {
        ServerConfig c;
        c.bounds = Bounds{64, 16, 64};
        c.ground_y = 5;
        return c;
    }
    PlayResult play(const std::string& script) {
        TcpTransport t("127.0.0.1", server.port());
        return run_play_script(t, parse(script));
    }

    WorldServer core;
    TcpServer server;
    std::atomic<bool> stop{false};
    std::thread server_thread;
    std::thread agent_thread;
};

}  // namespace

TEST(PlayScript, ParsesCommands) {
    const auto cmds = parse("# setup\nsay \"come here\"\n\nwait 20\nassert_near 2\nassert_block 1 2 3 35 11\n");
    ASSERT_EQ(cmds.size(), 4u);
    EXPECT_EQ(cmds[0].op, "say");
    EXPECT_EQ(cmds[0].args[0], "come here");
    EXPECT_EQ(cmds[1].line, 4);
    EXPECT_EQ(cmds[3].args.size(), 5u);
}

TEST(PlayScript, RejectsBadLines) {
    EXPECT_THROW(parse("jump 3\n"), ScriptError);
    EXPECT_THROW(parse("wait\n"), ScriptError);
    EXPECT_THROW(parse("wait soon\n"), ScriptError);
    try {
        parse("say hi\nassert_block 1 2 3\n");
        FAIL();
    } catch (const ScriptError& e) {
        EXPECT_EQ(e.line(), 2);
    }
}

TEST(PlayScript, EmptyScriptPasses) {
    WorldServer s;
    LocalTransport t(s);
    const auto r = run_play_script(t, {});
    EXPECT_TRUE(r.passed);
    EXPECT_TRUE(r.transcript.empty());
}

TEST(PlayScript, ComeHere) {
    Live live;
    const auto r = live.play("move 20 6 20\nwait 5\nsay \"come here\"\nassert_reply_contains Moving\nwait 80\nassert_near 2\n");
    for (const auto& line : r.transcript) SCOPED_TRACE(line);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.assertions, 2u);
}

TEST(PlayScript, FailedAssertionReported) {
    Live live;
    const auto r = live.play("wait 2\nassert_block 1 6 1 35 11\n");
    EXPECT_FALSE(r.passed);
    EXPECT_EQ(r.failures, 1u);
    EXPECT_NE(r.transcript.back().find("FAIL line 2 assert_block"), std::string::npos);
}
