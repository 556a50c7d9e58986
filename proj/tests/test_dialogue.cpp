#include <gtest/gtest.h>

#include <sstream>

#include "voxelbot/dialogue.hpp"

using namespace voxelbot;

namespace {

class DialogueTest : public ::testing::Test {
protected:
    DialogueTest()
        : world(Bounds{64, 16, 64}),
          tasks(&memory),
          parser(Grammar::builtin(), make_lexicons(Grammar::builtin(), BlockRegistry::builtin(), SizeLexicon{}, DanceRegistry::builtin())) {
        seed_flat_terrain(world, 5);
        world.players[1] = PlayerRecord{1, "alice", {20.5, 6, 20.5}, {0, 0}};
        ctx.world = &world;
        ctx.actuator = &actuator;
        ctx.memory = &memory;
        ctx.agent = {30, 6, 30};
        config.natural = default_natural_blocks();
        DialogueEnv env;
        env.memory = &memory;
        env.world = &world;
        env.tasks = &tasks;
        env.task_ctx = &ctx;
        env.registry = &BlockRegistry::builtin();
        env.schematics = &schematics;
        env.dances = &DanceRegistry::builtin();
        env.sizes = &config.sizes;
        env.say = [this](const std::string& s) { said.push_back(s); };
        env.on_stop = [this](std::size_t n) { stopped += n; };
        dm = std::make_unique<DialogueManager>(std::move(env), parser, ProfanityFilter({"darn"}));
    }

    // Places a solid box of one block and refreshes memory. Returns the new object's id.
    MemoryId place(Location lo, Location size, BlockId b) {
        for (int x = 0; x < size.x; ++x)
            for (int y = 0; y < size.y; ++y)
                for (int z = 0; z < size.z; ++z) world.set_block(lo + Location{x, y, z}, b, Provenance::placed_by_player, 1);
        refresh_block_objects(memory, world, full_region(world), BlockRegistry::builtin(), config);
        for (const auto* o : memory.query({}, MemoryKind::block_object)) {
            const auto& p = o->block_object()->positions;
            if (std::find(p.begin(), p.end(), lo) != p.end()) return o->id;
        }
        return {};
    }

    void chat(const std::string& text) { dm->handle_chat("alice", text); }
    [[nodiscard]] const std::string& last() const { return said.back(); }

    VoxelWorld world;
    MemoryStore memory;
    TaskStack tasks;
    NullActuator actuator;
    TaskContext ctx;
    PerceptionConfig config;
    SchematicLibrary schematics = SchematicLibrary::standard();
    Parser parser;
    std::unique_ptr<DialogueManager> dm;
    std::vector<std::string> said;
    std::size_t stopped = 0;
};

}  // namespace

TEST(Profanity, TokenExact) {
    std::istringstream in("# words\ndarn\n\nheck\n");
    const auto f = ProfanityFilter::parse(in);
    EXPECT_EQ(f.size(), 2u);
    EXPECT_TRUE(f.is_profane("oh DARN it"));
    EXPECT_FALSE(f.is_profane("darning socks"));
    EXPECT_GT(ProfanityFilter::builtin().size(), 0u);
}

TEST_F(DialogueTest, ProfanityGetsReplyAndNoWork) {
    chat("build a darn cube");
    EXPECT_EQ(last(), "Please don't talk like that.");
    EXPECT_TRUE(dm->empty());
    EXPECT_TRUE(tasks.empty());
    EXPECT_EQ(dm->parse_calls(), 0u);
    EXPECT_TRUE(memory.chats_by("alice").empty());
}

TEST_F(DialogueTest, NotUnderstood) {
    chat("asdfgh");
    EXPECT_EQ(last(), "Sorry, I didn't understand.");
}

TEST_F(DialogueTest, MoveToBlueHouse) {
    const auto id = place({10, 6, 20}, {1, 1, 1}, {35, 11});
    memory.insert_triple(id, "has_tag", std::string("house"));
    chat("go to the blue house");
    ASSERT_EQ(tasks.size(), 1u);
    const auto* move = dynamic_cast<const MoveTask*>(tasks.tasks()[0]);
    ASSERT_NE(move, nullptr);
    EXPECT_EQ(move->target(), (Location{10, 6, 20}));
    EXPECT_EQ(last(), "Moving to (10, 6, 20).");
}

TEST_F(DialogueTest, MoveToCoordinates) {
    chat("go to 5 6 5");
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(dynamic_cast<const MoveTask*>(tasks.tasks()[0])->target(), (Location{5, 6, 5}));
}

TEST_F(DialogueTest, AmbiguousDestroyAsks) {
    const auto a = place({10, 6, 10}, {2, 2, 2}, {5, 0});
    const auto b = place({10, 6, 30}, {2, 2, 2}, {5, 0});
    memory.insert_triple(a, "has_tag", std::string("house"));
    memory.insert_triple(b, "has_tag", std::string("house"));
    chat("destroy the house");
    EXPECT_TRUE(tasks.empty());
    const auto st = dm->stack();
    ASSERT_EQ(st.size(), 3u);
    EXPECT_EQ(st[1]->kind(), "ConfirmReferenceObject");
    EXPECT_EQ(st[2]->kind(), "AwaitResponse");
    EXPECT_NE(last().find("Which one do you mean?"), std::string::npos);
    EXPECT_NE(last().find("1) "), std::string::npos);
    chat("the second one");
    EXPECT_TRUE(dm->empty());
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(tasks.tasks()[0]->kind(), "destroy");
}

TEST_F(DialogueTest, ClarificationCancelled) {
    const auto a = place({10, 6, 10}, {1, 1, 1}, {5, 0});
    const auto b = place({10, 6, 30}, {1, 1, 1}, {5, 0});
    memory.insert_triple(a, "has_tag", std::string("shed"));
    memory.insert_triple(b, "has_tag", std::string("shed"));
    chat("destroy the shed");
    chat("no");
    EXPECT_EQ(last(), "OK, never mind.");
    EXPECT_TRUE(dm->empty());
    EXPECT_TRUE(tasks.empty());
}

TEST_F(DialogueTest, UnrelatedReplyIsReparsed) {
    const auto a = place({10, 6, 10}, {1, 1, 1}, {5, 0});
    const auto b = place({10, 6, 30}, {1, 1, 1}, {5, 0});
    memory.insert_triple(a, "has_tag", std::string("shed"));
    memory.insert_triple(b, "has_tag", std::string("shed"));
    chat("destroy the shed");
    chat("go to 5 6 5");
    EXPECT_TRUE(dm->empty());
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(tasks.tasks()[0]->kind(), "move");
}

TEST_F(DialogueTest, UnknownSchematicAsks) {
    schematics.remove("cube");
    chat("build a cube");
    EXPECT_TRUE(tasks.empty());
    EXPECT_FALSE(dm->empty());
    bool asked = false;
    for (const auto& s : said) asked |= s.find("I don't know how to build a cube") != std::string::npos;
    EXPECT_TRUE(asked);
}

TEST_F(DialogueTest, BuildPushesTask) {
    chat("build a small cube at 40 6 40");
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(tasks.tasks()[0]->kind(), "build");
    EXPECT_EQ(last(), "Building a cube.");
}

TEST_F(DialogueTest, WhatIsThatBlueThing) {
    const auto id = place({22, 6, 20}, {1, 2, 1}, {35, 11});
    memory.insert_triple(id, "has_name", std::string("house"));
    chat("what is that blue thing");
    EXPECT_NE(last().find("house"), std::string::npos);
}

TEST_F(DialogueTest, CountWithEmptyMemory) {
    chat("how many cubes are there");
    EXPECT_EQ(last(), "There are 0.");
}

TEST_F(DialogueTest, LocationQueryGivesCoordinates) {
    const auto id = place({12, 6, 14}, {1, 1, 1}, {45, 0});
    memory.insert_triple(id, "has_tag", std::string("tower"));
    chat("where is the tower");
    EXPECT_EQ(last(), "The tower is at (12, 6, 14).");
}

TEST_F(DialogueTest, TagBrownThing) {
    const auto id = place({24, 6, 20}, {1, 2, 1}, {35, 12});
    chat("that brown thing is a shed");
    EXPECT_EQ(memory.literal_values(id, "has_tag"), std::vector<std::string>{"shed"});
    EXPECT_NE(last().find("shed"), std::string::npos);
    const auto triples = memory.query({}, MemoryKind::triple).size();
    chat("that brown thing is a shed");
    EXPECT_EQ(memory.query({}, MemoryKind::triple).size(), triples);
}

TEST_F(DialogueTest, TagWithoutReferentAsksAndWritesNothing) {
    const auto before = memory.size();
    chat("that brown thing is a shed");
    EXPECT_NE(last().find("Which object do you mean?"), std::string::npos);
    EXPECT_EQ(memory.size(), before + 1);  // the chat row only
    EXPECT_TRUE(memory.query({{"has_tag", std::string("shed")}}).empty());
}

TEST_F(DialogueTest, StopCountsInterruptedRoots) {
    chat("build a small cube at 40 6 40");
    chat("stop");
    EXPECT_EQ(stopped, 1u);
    EXPECT_TRUE(tasks.empty());
    chat("resume");
    EXPECT_EQ(tasks.size(), 1u);
}

TEST_F(DialogueTest, UndoWithNothingToUndo) {
    chat("undo");
    EXPECT_EQ(last(), "There is nothing to undo.");
}

TEST_F(DialogueTest, LeftOfUsesSpeakerFrame) {
    // alice faces +x; left of an anchor is +z.
    const auto anchor = place({30, 6, 20}, {1, 1, 1}, {1, 0});
    const auto left = place({30, 6, 24}, {1, 1, 1}, {45, 0});
    const auto right = place({30, 6, 16}, {1, 1, 1}, {45, 0});
    memory.insert_triple(anchor, "has_tag", std::string("statue"));
    memory.insert_triple(left, "has_tag", std::string("tower"));
    memory.insert_triple(right, "has_tag", std::string("tower"));
    chat("go to the tower left of the statue");
    ASSERT_EQ(tasks.size(), 1u);
    EXPECT_EQ(dynamic_cast<const MoveTask*>(tasks.tasks()[0])->target(), (Location{30, 6, 24}));
}

TEST(ConfirmChoice, ReadsReplies) {
    bool cancel = false;
    EXPECT_EQ(ConfirmReferenceObject::read_choice(tokenize("2"), 3, cancel), 1u);
    EXPECT_EQ(ConfirmReferenceObject::read_choice(tokenize("the third one"), 3, cancel), 2u);
    EXPECT_EQ(ConfirmReferenceObject::read_choice(tokenize("yes"), 3, cancel), 0u);
    EXPECT_FALSE(ConfirmReferenceObject::read_choice(tokenize("4"), 3, cancel));
    EXPECT_FALSE(ConfirmReferenceObject::read_choice(tokenize("cancel"), 3, cancel));
    EXPECT_TRUE(cancel);
}

TEST(Nouns, Normalize) {
    EXPECT_EQ(normalize_noun("houses"), "house");
    EXPECT_EQ(normalize_noun("cubes"), "cube");
    EXPECT_EQ(normalize_noun("grass"), "grass");
    EXPECT_EQ(size_word_extent("huge"), 15);
}
