#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "voxelbot/perception.hpp"

using namespace voxelbot;

namespace {

const std::set<std::uint8_t> kNatural = {1, 2, 3, 7};

std::set<std::vector<Location>> as_set(std::vector<std::vector<Location>> comps) {
    std::set<std::vector<Location>> out;
    for (auto& c : comps) {
        std::sort(c.begin(), c.end());
        out.insert(c);
    }
    return out;
}

}  // namespace

TEST(BlockObjects, EmptyWorld) {
    VoxelWorld w(Bounds{8, 8, 8});
    EXPECT_TRUE(find_block_objects(w, full_region(w), kNatural).empty());
}

TEST(BlockObjects, SinglePlacedBlock) {
    VoxelWorld w(Bounds{8, 8, 8});
    seed_flat_terrain(w, 2);
    w.set_block({3, 3, 3}, {1, 0}, Provenance::placed_by_player);
    const auto objs = find_block_objects(w, full_region(w), kNatural);
    ASSERT_EQ(objs.size(), 1u);
    EXPECT_EQ(objs[0].size(), 1u);
}

TEST(BlockObjects, GapSeparatesClusters) {
    VoxelWorld w(Bounds{10, 4, 4});
    for (int x : {0, 1, 2, 4, 5, 6}) w.set_block({x, 1, 1}, {35, 0}, Provenance::placed_by_player);
    const auto objs = find_block_objects(w, full_region(w), kNatural);
    EXPECT_EQ(objs.size(), 2u);
    const auto want = oracle::components(w, [&](const Location& l) { return !w.get_block(l).is_air(); });
    EXPECT_EQ(as_set(objs), want);
}

TEST(BlockObjects, MatchesUnionFindOnRandomWorlds) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const int n = 4 + static_cast<int>(rng() % 10);
        VoxelWorld w(Bounds{n, n, n});
        for (int i = 0; i < n * n * n / 3; ++i) {
            const Location l{static_cast<int>(rng() % n), static_cast<int>(rng() % n), static_cast<int>(rng() % n)};
            const BlockId b{static_cast<std::uint8_t>(1 + rng() % 4), 0};
            w.set_block(l, b, rng() % 2 ? Provenance::placed_by_player : Provenance::natural);
        }
        const auto want = oracle::components(w, [&](const Location& l) {
            return w.provenance(l) != Provenance::natural || (!w.get_block(l).is_air() && !kNatural.count(w.get_block(l).id));
        });
        EXPECT_EQ(as_set(find_block_objects(w, full_region(w), kNatural)), want) << trial;
    }
}

TEST(Vision, EmptyWorldAllMisses) {
    VoxelWorld w(Bounds{16, 16, 16});
    const auto f = render_vision(w, {8, 8, 8}, {}, VisionParams{8, 8, 70, 64});
    for (const auto& p : f.pixels) {
        EXPECT_FALSE(p.hit);
        EXPECT_EQ(p.block, kAir);
    }
}

TEST(Vision, BlockStraightAhead) {
    VoxelWorld w(Bounds{32, 16, 16});
    w.set_block({13, 8, 8}, {35, 11}, Provenance::placed_by_player);
    VisionParams p{63, 63, 70, 64};  // odd size puts a pixel centre on the axis
    const auto f = render_vision(w, {8.5, 8.5, 8.5}, {}, p);
    const auto& c = f.at(31, 31);
    EXPECT_TRUE(c.hit);
    EXPECT_EQ(c.block, (BlockId{35, 11}));
    EXPECT_NEAR(c.distance, 4.5, 1e-9);  // eye at 8.5, near face at 13
}

TEST(Vision, RayCentreAndCorners) {
    const VisionParams p{64, 64, 70, 64};
    const Vec3 tl = vision_ray({}, p, 0, 0);
    const Vec3 br = vision_ray({}, p, 63, 63);
    EXPECT_GT(tl.y, 0.0);  // top row looks up
    EXPECT_LT(br.y, 0.0);
    EXPECT_NEAR(std::hypot(tl.x, tl.y, tl.z), 1.0, 1e-12);
}

TEST(Vision, AgreesWithMarchingOracle) {
    std::mt19937 rng(23);
    VoxelWorld w(Bounds{16, 16, 16});
    for (int i = 0; i < 300; ++i) {
        w.set_block({static_cast<int>(rng() % 16), static_cast<int>(rng() % 16), static_cast<int>(rng() % 16)},
                    {static_cast<std::uint8_t>(1 + rng() % 50), 0}, Provenance::natural);
    }
    const Vec3 eye{8.3, 8.7, 8.1};
    w.set_block(to_voxel(eye), kAir, Provenance::natural);
    const VisionParams p{16, 16, 70, 30};
    const Look look{37, -12};
    const auto f = render_vision(w, eye, look, p);
    for (int r = 0; r < p.height; ++r) {
        for (int c = 0; c < p.width; ++c) {
            const Vec3 d = vision_ray(look, p, c, r);
            const auto want = oracle::march(w, eye, d, p.max_range, 1e-3);
            const auto& got = f.at(c, r);
            if (got.hit && (!want.hit || want.voxel != got.voxel)) {
                EXPECT_LT(oracle::chord(got.voxel, eye, d), 1e-3);
            } else {
                EXPECT_EQ(got.hit, want.hit);
                if (got.hit) EXPECT_NEAR(got.distance, want.distance, 2e-3);
            }
        }
    }
}

TEST(Vision, EyeOutsideWorldThrows) {
    VoxelWorld w(Bounds{4, 4, 4});
    EXPECT_THROW((void)render_vision(w, {-1, 1, 1}, {}), std::out_of_range);
}

TEST(Directions, LeftWhenFacingEast) {
    const Vec3 anchor{10, 0, 0};
    const std::vector<Vec3> cands{{10, 0, 5}, {10, 0, -5}};
    const auto i = resolve_relative_direction(anchor, RelativeDirection::left, Look{0, 0}, cands);
    ASSERT_TRUE(i);
    EXPECT_EQ(*i, 0u);
    const auto j = resolve_relative_direction(anchor, RelativeDirection::right, Look{0, 0}, cands);
    ASSERT_TRUE(j);
    EXPECT_EQ(*j, 1u);
}

TEST(Directions, BehindWithOnlyFrontCandidate) {
    const Vec3 anchor{10, 0, 0};
    const std::vector<Vec3> cands{{5, 0, 0}};
    EXPECT_FALSE(resolve_relative_direction(anchor, RelativeDirection::back, Look{0, 0}, cands));
    EXPECT_TRUE(resolve_relative_direction(anchor, RelativeDirection::front, Look{0, 0}, cands));
}

TEST(Directions, AboveBelowIgnoreFacing) {
    EXPECT_TRUE(in_direction({0, 0, 0}, {0, 3, 0}, RelativeDirection::above, Look{123, 0}));
    EXPECT_TRUE(in_direction({0, 0, 0}, {0, -3, 0}, RelativeDirection::below, Look{-40, 0}));
    EXPECT_EQ(relative_direction_from_string("LEFT"), RelativeDirection::left);
}

TEST(Colour, SingleColour) {
    VoxelWorld w(Bounds{4, 4, 4});
    std::vector<Location> pos{{0, 0, 0}, {1, 0, 0}};
    for (const auto& l : pos) w.set_block(l, {35, 11}, Provenance::placed_by_player);
    EXPECT_EQ(infer_colour(pos, w, BlockRegistry::builtin()), "blue");
}

TEST(Colour, MajorityWins) {
    VoxelWorld w(Bounds{8, 4, 4});
    std::vector<Location> pos;
    for (int x = 0; x < 8; ++x) {
        pos.push_back({x, 0, 0});
        w.set_block({x, 0, 0}, x < 5 ? BlockId{35, 11} : BlockId{35, 14}, Provenance::placed_by_player);
    }
    EXPECT_EQ(infer_colour(pos, w, BlockRegistry::builtin()), "blue");
}

TEST(Size, LexiconRanges) {
    EXPECT_TRUE(match_size("tiny", {{0, 0, 0}, {1, 0, 0}}));
    EXPECT_FALSE(match_size("huge", {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}}));
    EXPECT_THROW((void)match_size("enormous", {{0, 0, 0}}), std::invalid_argument);
    EXPECT_EQ(max_extent({{0, 0, 0}, {0, 4, 1}}), 5);
}

TEST(Refresh, KeepsIdsAndTagsAcrossGrowth) {
    VoxelWorld w(Bounds{16, 8, 16});
    MemoryStore m;
    PerceptionConfig cfg;
    cfg.natural = kNatural;
    w.set_block({3, 1, 3}, {35, 12}, Provenance::placed_by_player);
    w.set_block({4, 1, 3}, {35, 12}, Provenance::placed_by_player);
    refresh_block_objects(m, w, full_region(w), BlockRegistry::builtin(), cfg);
    const auto objs = m.query({}, MemoryKind::block_object);
    ASSERT_EQ(objs.size(), 1u);
    const MemoryId id = objs[0]->id;
    m.insert_triple(id, "has_tag", std::string("shed"));
    EXPECT_EQ(m.literal_values(id, "has_colour"), std::vector<std::string>{"brown"});
    w.set_block({5, 1, 3}, {35, 12}, Provenance::placed_by_player);
    const auto stats = refresh_block_objects(m, w, full_region(w), BlockRegistry::builtin(), cfg);
    EXPECT_EQ(stats.kept, 1u);
    EXPECT_EQ(m.find(id)->block_object()->positions.size(), 3u);
    for (int x = 3; x <= 5; ++x) w.set_block({x, 1, 3}, kAir, Provenance::natural);
    refresh_block_objects(m, w, full_region(w), BlockRegistry::builtin(), cfg);
    EXPECT_FALSE(m.contains(id));
    EXPECT_TRUE(m.query({{"has_tag", std::string("shed")}}).empty());
}

TEST(Refresh, MobsMirrored) {
    VoxelWorld w(Bounds{8, 8, 8});
    MemoryStore m;
    w.mobs[3] = Mob{3, MobKind::cow, {1, 1, 1}, {}};
    refresh_mobs(m, w);
    ASSERT_TRUE(m.mob_by_game_id(3));
    w.mobs.clear();
    refresh_mobs(m, w);
    EXPECT_FALSE(m.mob_by_game_id(3));
}

TEST(Segmentation, TagIsReified) {
    MemoryStore m;
    const auto obj = m.insert_block_object({{1, 2, 3}});
    const auto t = ingest_segmentation_tag(m, obj, {1, 2, 3}, "door");
    EXPECT_EQ(m.literal_values(obj, "has_tag"), std::vector<std::string>{"door"});
    EXPECT_EQ(m.literal_values(t, "at_voxel"), std::vector<std::string>{"1,2,3"});
    std::istringstream bad("{\"object\": 1}\nnot json\n");
    EXPECT_THROW(ingest_segmentation_file(m, bad), std::runtime_error);
}
