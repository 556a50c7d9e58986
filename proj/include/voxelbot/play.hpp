#pragma once
// Scripted human client for end-to-end sessions.
//
// Script lines (blank lines and '#' comments ignored):
//   say TEXT                         send a chat (surrounding quotes optional)
//   wait N                           wait for N server ticks
//   assert_block X Y Z ID META       the mirrored world holds that block
//   assert_near D                    the agent stands within distance D of this player
//   assert_reply_contains "TEXT"     an agent chat since the last `say` contains TEXT (waits up to the reply timeout)
//   move X Y Z [YAW [PITCH]]         teleport this player
//   place X Y Z ID META              place a block as this player
//   break X Y Z                      clear a block as this player
//   assert_agent_near X Y Z D        the agent stands within distance D of the point
//   assert_hash                      record the mirrored world hash in the transcript

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "voxelbot/net.hpp"

namespace voxelbot {

struct PlayCommand {
    std::string op;
    std::vector<std::string> args;
    int line = 0;
};

class ScriptError : public std::runtime_error {
public:
    ScriptError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

// Validates argument counts and numbers. Throws ScriptError with the line number.
[[nodiscard]] std::vector<PlayCommand> parse_play_script(std::istream& in);

struct PlayOptions {
    std::string name = "player";
    std::string agent_name = "bot";
    int reply_timeout_ticks = 400;
    int login_timeout_ms = 5000;
    // Wall-clock cap on waiting for a single tick.
    int tick_timeout_ms = 5000;
};

struct PlayResult {
    bool passed = true;
    std::size_t assertions = 0;
    std::size_t failures = 0;
    std::vector<std::string> transcript;
};

// Logs in, runs the script, and reports. Connection problems count as failures.
[[nodiscard]] PlayResult run_play_script(Transport& transport, const std::vector<PlayCommand>& script,
                                         const PlayOptions& options = {});

}  // namespace voxelbot
