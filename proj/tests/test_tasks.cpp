#include <gtest/gtest.h>

#include <sstream>

#include "harness.hpp"
#include "oracles.hpp"

using namespace voxelbot;

namespace {

Schematic cube(int n, BlockId b = {5, 0}) { return *SchematicLibrary::standard().make("cube", ShapeParams{n, {}, {}, b}); }

// Finishes after a fixed number of steps and remembers the order it finished in.
class CountTask : public Task {
public:
    CountTask(int steps, std::vector<int>* log, int tag) : Task("count"), left_(steps), log_(log), tag_(tag) {}

protected:
    void do_step(TaskContext&) override {
        if (--left_ <= 0) {
            log_->push_back(tag_);
            finish();
        }
    }

private:
    int left_;
    std::vector<int>* log_;
    int tag_;
};

}  // namespace

TEST(TaskStack, TopTaskAdvances) {
    Rig rig;
    std::vector<int> log;
    rig.push(std::make_unique<CountTask>(1, &log, 1));
    rig.push(std::make_unique<CountTask>(1, &log, 2));
    rig.stack.step(rig.ctx);
    EXPECT_EQ(log, std::vector<int>{2});
    EXPECT_EQ(rig.stack.size(), 1u);
}

TEST(TaskStack, CompletionIsReversePushOrder) {
    Rig rig;
    std::vector<int> log;
    for (int i = 1; i <= 3; ++i) rig.push(std::make_unique<CountTask>(3, &log, i));
    rig.stack.step(rig.ctx);
    EXPECT_EQ(rig.stack.stop(rig.ctx), 3u);
    EXPECT_TRUE(rig.stack.empty());
    EXPECT_EQ(rig.stack.resume(rig.ctx), 3u);
    rig.run();
    EXPECT_EQ(log, (std::vector<int>{3, 2, 1}));
}

TEST(TaskStack, TransitionsRecordedInMemory) {
    Rig rig;
    std::vector<int> log;
    rig.push(std::make_unique<CountTask>(1, &log, 1));
    auto done = rig.run();
    ASSERT_EQ(done.size(), 1u);
    const auto& hist = rig.memory.find(*done[0]->memory_id())->task()->history;
    EXPECT_EQ(hist.front().status, "pending");
    EXPECT_EQ(hist.back().status, "finished");
}

TEST(MoveTaskTest, ReachesTarget) {
    Rig rig;
    rig.push(std::make_unique<MoveTask>(Location{3, 6, 3}));
    auto done = rig.run();
    ASSERT_EQ(done.size(), 1u);
    EXPECT_EQ(done[0]->status(), TaskStatus::finished);
    EXPECT_EQ(rig.ctx.agent, (Location{3, 6, 3}));
}

TEST(MoveTaskTest, SolidTargetLiftsToAir) {
    Rig rig;
    rig.push(std::make_unique<MoveTask>(Location{3, 2, 3}));
    rig.run();
    EXPECT_EQ(rig.ctx.agent, (Location{3, 6, 3}));
}

TEST(MoveTaskTest, OutsideWorldFails) {
    Rig rig;
    rig.push(std::make_unique<MoveTask>(Location{300, 6, 3}));
    auto done = rig.run();
    EXPECT_EQ(done[0]->status(), TaskStatus::interrupted);
}

TEST(MoveTaskTest, TunnelIsClosedBehind) {
    Rig rig;
    // Wall across the whole world, one block thick.
    for (int z = 0; z < 32; ++z)
        for (int y = 6; y < 16; ++y) rig.world.set_block({20, y, z}, {1, 0}, Provenance::natural);
    const auto h = rig.world.hash();
    rig.push(std::make_unique<MoveTask>(Location{22, 6, 16}));
    auto done = rig.run();
    ASSERT_EQ(done[0]->status(), TaskStatus::finished);
    EXPECT_EQ(rig.ctx.agent, (Location{22, 6, 16}));
    EXPECT_EQ(rig.world.hash(), h);
}

TEST(BuildTaskTest, FarBuildPushesMove) {
    Rig rig;
    rig.ctx.agent = {1, 6, 1};
    rig.push(std::make_unique<BuildTask>(cube(2), Location{25, 6, 25}));
    rig.stack.step(rig.ctx);
    ASSERT_EQ(rig.stack.size(), 2u);
    EXPECT_EQ(rig.stack.top()->kind(), "move");
    EXPECT_EQ(rig.stack.tasks()[0]->status(), TaskStatus::blocked_on_child);
}

TEST(BuildTaskTest, SingleBlockOneRecord) {
    Rig rig;
    Schematic s;
    s.set({0, 0, 0}, {5, 0});
    rig.push(std::make_unique<BuildTask>(s, Location{16, 6, 18}));
    auto done = rig.run();
    ASSERT_EQ(done.size(), 1u);
    EXPECT_EQ(done[0]->undo_log().size(), 1u);
}

TEST(BuildTaskTest, CubeRecordsAscendAndCount) {
    Rig rig;
    const auto before = oracle::scan_non_air(rig.world);
    rig.push(std::make_unique<BuildTask>(cube(3), Location{18, 6, 18}));
    auto done = rig.run();
    const auto& log = done[0]->undo_log();
    std::vector<ChangeRecord> placed;
    for (const auto& r : log)
        if (r.new_block == BlockId{5, 0}) placed.push_back(r);
    EXPECT_EQ(placed.size(), 27u);
    for (std::size_t i = 1; i < placed.size(); ++i) EXPECT_LE(placed[i - 1].loc.y, placed[i].loc.y);
    EXPECT_EQ(oracle::scan_non_air(rig.world), before + 27);
}

TEST(BuildTaskTest, OverlapCapturesOldBlocks) {
    Rig rig;
    rig.push(std::make_unique<BuildTask>(cube(2, {45, 0}), Location{17, 5, 17}));
    auto done = rig.run();
    bool saw_grass = false;
    for (const auto& r : done[0]->undo_log()) saw_grass |= r.old_block == BlockId{2, 0};
    EXPECT_TRUE(saw_grass);
}

TEST(BuildTaskTest, DoesNotFit) {
    Rig rig;
    rig.push(std::make_unique<BuildTask>(cube(3), Location{30, 6, 30}));
    auto done = rig.run();
    EXPECT_EQ(done[0]->status(), TaskStatus::interrupted);
    EXPECT_EQ(done[0]->error(), "the structure would not fit in the world");
}

TEST(Undo, BuildThenUndoRestoresHash) {
    Rig rig;
    const auto h = rig.world.hash();
    rig.push(std::make_unique<BuildTask>(cube(3), Location{18, 6, 18}));
    rig.run();
    EXPECT_NE(rig.world.hash(), h);
    rig.push(std::make_unique<UndoTask>());
    auto done = rig.run();
    EXPECT_EQ(done[0]->status(), TaskStatus::finished);
    EXPECT_EQ(rig.world.hash(), h);
}

TEST(Undo, EmptyHistory) {
    Rig rig;
    rig.push(std::make_unique<UndoTask>());
    auto done = rig.run();
    EXPECT_EQ(done[0]->status(), TaskStatus::interrupted);
    EXPECT_EQ(done[0]->error(), "nothing to undo");
}

TEST(Undo, DestroyThenUndoRestoresBlocks) {
    Rig rig;
    std::vector<Location> house;
    for (int x = 18; x < 21; ++x)
        for (int y = 6; y < 9; ++y)
            for (int z = 18; z < 21; ++z) {
                rig.world.set_block({x, y, z}, {35, static_cast<std::uint8_t>((x + y + z) % 16)}, Provenance::placed_by_player, 1);
                house.push_back({x, y, z});
            }
    const auto h = rig.world.hash();
    const auto n = oracle::scan_non_air(rig.world);
    rig.push(std::make_unique<DestroyTask>(house));
    rig.run();
    EXPECT_EQ(oracle::scan_non_air(rig.world), n - 27);
    rig.push(std::make_unique<UndoTask>());
    rig.run();
    EXPECT_EQ(rig.world.hash(), h);
    EXPECT_EQ(rig.world.get_block({19, 7, 19}), (BlockId{35, 13}));
    EXPECT_EQ(rig.world.provenance({19, 7, 19}), Provenance::placed_by_player);
}

TEST(Undo, UndoIsNotItselfUndone) {
    Rig rig;
    rig.push(std::make_unique<BuildTask>(cube(2), Location{18, 6, 18}));
    rig.run();
    rig.push(std::make_unique<UndoTask>());
    rig.run();
    rig.push(std::make_unique<UndoTask>());
    auto done = rig.run();
    EXPECT_EQ(done[0]->error(), "nothing to undo");
}

TEST(DigTaskTest, TwoByTwo) {
    Rig rig;
    const auto n = oracle::scan_non_air(rig.world);
    rig.push(std::make_unique<DigTask>(Location{16, 5, 17}, 2, 2, 1));
    rig.run();
    EXPECT_EQ(oracle::scan_non_air(rig.world), n - 4);
    EXPECT_TRUE(rig.world.get_block({17, 5, 18}).is_air());
    EXPECT_FALSE(rig.world.get_block({16, 4, 17}).is_air());
}

TEST(DigTaskTest, BedrockSurvives) {
    Rig rig({8, 8, 8}, 2);
    rig.push(std::make_unique<DigTask>(Location{4, 2, 4}, 1, 1, 10));
    rig.run();
    EXPECT_EQ(rig.world.get_block({4, 0, 4}), kBedrock);
    EXPECT_TRUE(rig.world.get_block({4, 1, 4}).is_air());
}

TEST(FillTaskTest, OneBlockPit) {
    Rig rig;
    rig.world.set_block({18, 5, 18}, kAir, Provenance::natural);
    rig.push(std::make_unique<FillTask>(Location{16, 6, 16}));
    auto done = rig.run();
    EXPECT_EQ(done[0]->status(), TaskStatus::finished);
    EXPECT_EQ(rig.world.get_block({18, 5, 18}), (BlockId{2, 0}));
}

TEST(FillTaskTest, BumpIsNotAPit) {
    Rig rig;
    rig.world.set_block({17, 6, 16}, {3, 0}, Provenance::natural);
    rig.push(std::make_unique<FillTask>(Location{16, 6, 16}));
    auto done = rig.run();
    EXPECT_EQ(done[0]->error(), "I don't see a hole to fill");
}

TEST(FillTaskTest, NoPit) {
    Rig rig;
    rig.push(std::make_unique<FillTask>(Location{16, 6, 16}));
    auto done = rig.run();
    EXPECT_EQ(done[0]->error(), "I don't see a hole to fill");
}

TEST(Loop, ConditionInitiallyTrue) {
    Rig rig;
    int bodies = 0;
    rig.push(std::make_unique<LoopTask>(StopCondition::block_hit({2, 0}), Location{16, 10, 16},
                                        [&](const StopCondition&, const LoopAnchor&) {
                                            ++bodies;
                                            return std::make_unique<DigTask>(Location{16, 10, 16}, 1, 1, 1);
                                        }));
    auto done = rig.run();
    EXPECT_EQ(bodies, 0);
    EXPECT_EQ(done[0]->status(), TaskStatus::finished);
}

TEST(Loop, DigDownToBedrock) {
    for (int d = 1; d <= 6; ++d) {
        Rig rig({8, 16, 8}, -1);
        rig.world.set_block({4, 1, 4}, kBedrock, Provenance::natural);
        for (int y = 2; y < 2 + d; ++y) rig.world.set_block({4, y, 4}, {3, 0}, Provenance::natural);
        rig.ctx.agent = {4, 12, 4};
        const auto n = oracle::scan_non_air(rig.world);
        const Location at{4, 2 + d, 4};
        rig.push(std::make_unique<LoopTask>(StopCondition::block_hit(kBedrock), at,
                                            [at](const StopCondition& c, const LoopAnchor& a) {
                                                auto t = std::make_unique<DigTask>(at, 1, 1, 1);
                                                t->halt_when(c, a);
                                                return t;
                                            }));
        auto done = rig.run();
        EXPECT_EQ(done[0]->status(), TaskStatus::finished) << d;
        EXPECT_EQ(n - oracle::scan_non_air(rig.world), static_cast<std::size_t>(d)) << d;
    }
}

TEST(Loop, NeverConditionHitsCap) {
    Rig rig;
    rig.push(std::make_unique<LoopTask>(
        StopCondition::never(), Location{16, 6, 16},
        [](const StopCondition&, const LoopAnchor&) { return std::make_unique<DanceTask>("x", std::vector<Location>{{0, 0, 0}}); },
        7));
    auto done = rig.run();
    ASSERT_EQ(done.size(), 1u);
    EXPECT_EQ(done[0]->status(), TaskStatus::interrupted);
    EXPECT_EQ(static_cast<LoopTask*>(done[0].get())->iterations(), 7);
}

TEST(Loop, DepthReached) {
    Rig rig;
    const Location at{16, 5, 16};
    rig.push(std::make_unique<LoopTask>(StopCondition::depth_reached(3), at, [at](const StopCondition& c, const LoopAnchor& a) {
        auto t = std::make_unique<DigTask>(at, 1, 1, 1);
        t->halt_when(c, a);
        return t;
    }));
    rig.run();
    EXPECT_EQ(rig.world.top_solid_at_or_below(16, 16, 5), 2);
}

TEST(SpawnTaskTest, LandsOnGround) {
    struct Spy : NullActuator {
        void spawn_mob(MobKind k, const Location& l) override {
            kind = k;
            at = l;
        }
        MobKind kind = MobKind::cow;
        Location at;
    } spy;
    Rig rig;
    rig.ctx.actuator = &spy;
    rig.push(std::make_unique<SpawnTask>(MobKind::pig, Location{10, 12, 10}));
    rig.run();
    EXPECT_EQ(spy.kind, MobKind::pig);
    EXPECT_EQ(spy.at, (Location{10, 6, 10}));
}

TEST(DanceTaskTest, FollowsMoves) {
    Rig rig;
    const Location start = rig.ctx.agent;
    rig.push(std::make_unique<DanceTask>("hop", std::vector<Location>{{0, 1, 0}, {0, -1, 0}, {1, 0, 0}}));
    rig.run();
    EXPECT_EQ(rig.ctx.agent, (start + Location{1, 0, 0}));
}

TEST(Dances, ParseAndBuiltin) {
    std::istringstream in("spin: 1,0,0 0,0,1 -1,0,0\n# c\nhop: 0,1,0 0,-1,0\n");
    const auto reg = DanceRegistry::parse(in);
    ASSERT_NE(reg.find("spin"), nullptr);
    EXPECT_EQ(reg.find("spin")->size(), 3u);
    EXPECT_EQ(reg.default_name(), "spin");
    EXPECT_FALSE(DanceRegistry::builtin().names().empty());
    std::istringstream bad("nocolon\n");
    EXPECT_THROW(DanceRegistry::parse(bad), std::runtime_error);
}
