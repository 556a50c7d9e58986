#include "voxelbot/agent.hpp"

#include <iostream>

namespace voxelbot {

namespace pr = protocol;

// Sends the agent's actions to the server.
class Agent::Link : public Actuator {
public:
    explicit Link(Agent& a) : a_(a) {}

    void move(const Location& to, const Look& look) override {
        const Vec3 pos{to.x + 0.5, static_cast<double>(to.y), to.z + 0.5};
        for (auto& [id, p] : a_.world_.players) {
            if (p.name == a_.config_.name) {
                p.position = pos;
                p.look = look;
            }
        }
        send(pr::PlayerMove{"", pr::FixedPos::from(pos), pr::FixedLook::from(look)});
    }
    void set_block(const Location& loc, BlockId block, Provenance source) override {
        a_.perception_dirty_ = true;
        send(pr::BlockChange{loc, block, source});
    }
    void spawn_mob(MobKind kind, const Location& loc) override { send(pr::SpawnMob{kind, loc}); }

    void send(const pr::Message& m) {
        if (a_.state_ == AgentState::disconnected) return;
        try {
            a_.transport_.send(m);
        } catch (const NetError& e) {
            std::cerr << a_.config_.name << ": " << e.what() << '\n';
            a_.state_ = AgentState::disconnected;
        }
    }

private:
    Agent& a_;
};

Agent::Agent(Transport& transport, AgentConfig config)
    : transport_(transport),
      config_(std::move(config)),
      registry_(config_.registry ? *config_.registry : BlockRegistry::builtin()),
      dances_(config_.dances ? *config_.dances : DanceRegistry::builtin()),
      schematics_(SchematicLibrary::standard()),
      link_(std::make_unique<Link>(*this)),
      tasks_(&memory_) {
    if (config_.perception.natural.empty()) config_.perception.natural = default_natural_blocks();
    const Grammar& grammar = config_.grammar ? *config_.grammar : Grammar::builtin();
    parser_ = std::make_unique<Parser>(grammar, make_lexicons(grammar, registry_, config_.perception.sizes, dances_));

    ctx_.world = &world_;
    ctx_.actuator = link_.get();
    ctx_.memory = &memory_;

    DialogueEnv env;
    env.memory = &memory_;
    env.world = &world_;
    env.tasks = &tasks_;
    env.task_ctx = &ctx_;
    env.registry = &registry_;
    env.schematics = &schematics_;
    env.dances = &dances_;
    env.sizes = &config_.perception.sizes;
    env.say = [this](const std::string& text) { say(text); };
    env.on_stop = [this](std::size_t n) { summary_.tasks_interrupted += n; };
    dialogue_ = std::make_unique<DialogueManager>(std::move(env), *parser_, config_.profanity);
}

Agent::~Agent() = default;

void Agent::login() { link_->send(pr::Login{pr::kProtocolVersion, config_.name}); }

void Agent::say(const std::string& text) { link_->send(pr::ChatSend{text}); }

void Agent::handle(const pr::Message& m) {
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, pr::WorldSnapshot>) {
                world_ = pr::world_from_snapshot(msg);
                if (const auto* me = world_.find_player(config_.name)) {
                    ctx_.agent = to_voxel(me->position);
                    ctx_.look = me->look;
                    ctx_.agent_id = me->player_id;
                }
                state_ = AgentState::running;
                perception_dirty_ = true;
            } else if constexpr (std::is_same_v<T, pr::BlockChange>) {
                if (world_.contains(msg.loc)) world_.set_block(msg.loc, msg.block, msg.source, 0);
                perception_dirty_ = true;
            } else if constexpr (std::is_same_v<T, pr::PlayerMove>) {
                if (msg.name == config_.name) return;
                PlayerRecord* p = world_.find_player(msg.name);
                if (!p) {
                    const std::uint32_t id = world_.players.empty() ? 1 : world_.players.rbegin()->first + 1;
                    p = &world_.players[id];
                    p->player_id = id;
                    p->name = msg.name;
                }
                p->position = msg.position.to_vec3();
                p->look = msg.look.to_look();
            } else if constexpr (std::is_same_v<T, pr::ChatBroadcast>) {
                if (msg.speaker != config_.name) chats_.emplace_back(msg.speaker, msg.text);
            } else if constexpr (std::is_same_v<T, pr::SpawnMob>) {
                const std::uint32_t id = world_.mobs.empty() ? 1 : world_.mobs.rbegin()->first + 1;
                Mob mob{id, msg.kind, voxel_center(msg.loc), Look{}};
                mob.position.y = msg.loc.y;
                world_.mobs[id] = mob;
                perception_dirty_ = true;
            } else if constexpr (std::is_same_v<T, pr::Disconnect>) {
                std::cerr << config_.name << ": disconnected: " << msg.reason << '\n';
                state_ = AgentState::disconnected;
            }
        },
        m);
}

void Agent::refresh_perception() {
    const Region region = region_around(world_, ctx_.agent, config_.perception.radius);
    if (config_.perception.vision_only) {
        const Vec3 eye{ctx_.agent.x + 0.5, ctx_.agent.y + 1.6, ctx_.agent.z + 0.5};
        std::set<Location> seen;
        if (world_.contains(to_voxel(eye))) seen = visible_voxels(render_vision(world_, eye, ctx_.look, config_.perception.vision));
        refresh_block_objects(memory_, world_, region, registry_, config_.perception, &seen);
    } else {
        refresh_block_objects(memory_, world_, region, registry_, config_.perception);
    }
    refresh_mobs(memory_, world_);
    perception_dirty_ = false;
}

void Agent::tag_built_object(const BuildTask& task) {
    if (task.label().empty()) return;
    refresh_perception();
    for (const auto& rec : task.undo_log()) {
        if (rec.new_block.is_air()) continue;
        for (const auto* o : memory_.query({}, MemoryKind::block_object)) {
            const auto& pos = o->block_object()->positions;
            if (std::binary_search(pos.begin(), pos.end(), rec.loc, YzxLess{})) {
                memory_.insert_triple(o->id, "has_name", task.label());
                return;
            }
        }
    }
}

void Agent::step() {
    for (const auto& m : transport_.receive(0)) handle(m);
    if (state_ != AgentState::running) return;
    ++steps_;
    ++summary_.steps;
    ctx_.step = steps_;

    if (!chats_.empty()) {
        auto [speaker, text] = chats_.front();
        chats_.pop_front();
        if (perception_dirty_) refresh_perception();
        dialogue_->handle_chat(speaker, text);
        ++summary_.chats_handled;
    }

    if (perception_dirty_ || (config_.perception_period > 0 && steps_ % static_cast<std::uint64_t>(config_.perception_period) == 0)) {
        refresh_perception();
    }

    if (!tasks_.empty()) {
        auto report = tasks_.step(ctx_);
        for (auto& root : report.completed_roots) {
            if (root->status() == TaskStatus::finished) {
                ++summary_.tasks_completed;
                if (const auto* build = dynamic_cast<const BuildTask*>(root.get())) tag_built_object(*build);
            } else {
                ++summary_.tasks_interrupted;
                if (!root->error().empty()) say(root->error());
            }
        }
    }
}

AgentSummary Agent::run(const std::atomic<bool>& stop, int poll_ms) {
    while (!stop.load() && state_ != AgentState::disconnected) {
        std::size_t ticks = 0;
        for (const auto& m : transport_.receive(poll_ms)) {
            handle(m);
            ticks += std::holds_alternative<pr::Tick>(m);
        }
        if (!transport_.connected()) state_ = AgentState::disconnected;
        for (std::size_t i = 0; i < ticks && !stop.load(); ++i) step();
    }
    return summary_;
}

}  // namespace voxelbot
