#pragma once
// The agent's event loop: mirror the world, hand chats to the dialogue manager, refresh perception,
// step the top task.

#include <atomic>
#include <cstdint>
#include <deque>
#include <memory>
#include <string>
#include <vector>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/dialogue.hpp"
#include "voxelbot/memory.hpp"
#include "voxelbot/net.hpp"
#include "voxelbot/parser.hpp"
#include "voxelbot/perception.hpp"
#include "voxelbot/schematic.hpp"
#include "voxelbot/tasks.hpp"
#include "voxelbot/world.hpp"

namespace voxelbot {

inline constexpr int kPerceptionPeriod = 5;

struct AgentConfig {
    std::string name = "bot";
    const Grammar* grammar = nullptr;  // defaults to the builtin grammar
    const BlockRegistry* registry = nullptr;
    const DanceRegistry* dances = nullptr;
    ProfanityFilter profanity = ProfanityFilter::builtin();
    PerceptionConfig perception;
    int perception_period = kPerceptionPeriod;
};

struct AgentSummary {
    std::size_t chats_handled = 0;
    std::size_t tasks_completed = 0;
    std::size_t tasks_interrupted = 0;
    std::size_t steps = 0;
};

enum class AgentState : std::uint8_t { connecting, running, disconnected };

class Agent {
public:
    Agent(Transport& transport, AgentConfig config);
    ~Agent();
    Agent(const Agent&) = delete;
    Agent& operator=(const Agent&) = delete;

    // Sends Login. The agent is running once the snapshot arrives.
    void login();
    // One iteration: drain messages, handle at most one chat, refresh perception when due, step the top task.
    void step();
    // Steps once per server tick until stop is set or the connection drops.
    AgentSummary run(const std::atomic<bool>& stop, int poll_ms = 20);

    [[nodiscard]] AgentState state() const { return state_; }
    [[nodiscard]] const AgentSummary& summary() const { return summary_; }
    [[nodiscard]] const std::string& name() const { return config_.name; }
    [[nodiscard]] MemoryStore& memory() { return memory_; }
    [[nodiscard]] const MemoryStore& memory() const { return memory_; }
    [[nodiscard]] const VoxelWorld& world() const { return world_; }
    [[nodiscard]] TaskStack& tasks() { return tasks_; }
    [[nodiscard]] DialogueManager& dialogue() { return *dialogue_; }
    [[nodiscard]] const Location& location() const { return ctx_.agent; }
    [[nodiscard]] std::size_t pending_chats() const { return chats_.size(); }

    // Sends a chat as the agent.
    void say(const std::string& text);
    // Runs perception over the area around the agent now.
    void refresh_perception();

private:
    class Link;

    void handle(const protocol::Message& m);
    void tag_built_object(const BuildTask& task);

    Transport& transport_;
    AgentConfig config_;
    const BlockRegistry& registry_;
    const DanceRegistry& dances_;
    SchematicLibrary schematics_;
    std::unique_ptr<Parser> parser_;
    std::unique_ptr<Link> link_;
    VoxelWorld world_;
    MemoryStore memory_;
    TaskStack tasks_;
    TaskContext ctx_;
    std::unique_ptr<DialogueManager> dialogue_;
    std::deque<std::pair<std::string, std::string>> chats_;
    AgentState state_ = AgentState::connecting;
    AgentSummary summary_;
    std::uint64_t steps_ = 0;
    bool perception_dirty_ = true;
};

}  // namespace voxelbot
