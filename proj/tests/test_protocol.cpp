#include <gtest/gtest.h>

#include <random>

#include "voxelbot/protocol.hpp"

using namespace voxelbot;
namespace pr = voxelbot::protocol;

namespace {

pr::Message round_trip(const pr::Message& m) {
    const auto bytes = pr::encode(m);
    const auto d = pr::decode(bytes);
    EXPECT_TRUE(d.has_value());
    EXPECT_EQ(d->consumed, bytes.size());
    return d->message;
}

}  // namespace

TEST(Protocol, ChatSendBytes) {
    const pr::Bytes want{0x00, 0x00, 0x00, 0x05, 0x02, 0x00, 0x02, 'h', 'i'};
    EXPECT_EQ(pr::encode(pr::ChatSend{"hi"}), want);
}

TEST(Protocol, TickBytes) {
    const pr::Bytes want{0x00, 0x00, 0x00, 0x05, 0x08, 0x00, 0x00, 0x00, 0x00};
    EXPECT_EQ(pr::encode(pr::Tick{0}), want);
}

TEST(Protocol, BlockChangeBytes) {
    const pr::Bytes want{0x00, 0x00, 0x00, 0x10, 0x04, 0, 0, 0, 1, 0, 0, 0, 2, 0, 0, 0, 3, 0x23, 0x0b, 0x01};
    EXPECT_EQ(pr::encode(pr::BlockChange{{1, 2, 3}, {35, 11}, Provenance::placed_by_player}), want);
}

TEST(Protocol, EveryTypeRoundTrips) {
    VoxelWorld w(Bounds{4, 4, 4});
    w.set_block({1, 2, 3}, {35, 11}, Provenance::placed_by_player, 1);
    w.players[1] = PlayerRecord{1, "alice", {1.5, 2.0, 3.5}, {90, -10}};
    w.mobs[2] = Mob{2, MobKind::pig, {0.5, 1.0, 0.5}, {}};
    const std::vector<pr::Message> all = {
        pr::Login{1, "alice"},
        pr::ChatSend{"build a house"},
        pr::ChatBroadcast{"bot", "Building a house."},
        pr::BlockChange{{1, 2, 3}, {35, 11}, Provenance::placed_by_agent},
        pr::PlayerMove{"bot", pr::FixedPos::from({1.5, 63, -2.25}), pr::FixedLook::from({180, 45})},
        pr::make_snapshot(w),
        pr::SpawnMob{MobKind::horse, {4, 63, 4}},
        pr::Tick{123456},
        pr::Disconnect{"bye"},
    };
    for (const auto& m : all) EXPECT_EQ(round_trip(m), m) << pr::name_of(pr::type_of(m));
}

TEST(Protocol, TruncatedFrameIsIncomplete) {
    const auto bytes = pr::encode(pr::ChatSend{"hello"});
    for (std::size_t n = 0; n < bytes.size(); ++n) {
        EXPECT_FALSE(pr::decode(std::span(bytes.data(), n)).has_value()) << n;
    }
}

TEST(Protocol, UnknownTagIsError) {
    const pr::Bytes bytes{0x00, 0x00, 0x00, 0x01, 0xFF};
    EXPECT_THROW((void)pr::decode(bytes), pr::ProtocolError);
}

TEST(Protocol, ErrorsCarryOffset) {
    pr::Bytes bytes = pr::encode(pr::ChatSend{"hi"});
    bytes[5] = 0x00;
    bytes[6] = 0x09;  // string longer than the frame
    try {
        (void)pr::decode(bytes);
        FAIL() << "expected ProtocolError";
    } catch (const pr::ProtocolError& e) {
        EXPECT_GE(e.offset(), 4u);
    }
}

TEST(Protocol, InvalidUtf8Rejected) {
    pr::Bytes bytes = pr::encode(pr::ChatSend{"ab"});
    bytes[7] = 0xC0;
    EXPECT_THROW((void)pr::decode(bytes), pr::ProtocolError);
    EXPECT_FALSE(pr::valid_utf8("\xff"));
    EXPECT_TRUE(pr::valid_utf8("caf\xc3\xa9"));
}

TEST(Protocol, TrailingBytesInFrameRejected) {
    pr::Bytes bytes = pr::encode(pr::Tick{1});
    bytes[3] = 0x06;
    bytes.push_back(0x00);
    EXPECT_THROW((void)pr::decode(bytes), pr::ProtocolError);
}

TEST(Protocol, OversizedStringRefusedAtEncode) {
    EXPECT_THROW((void)pr::encode(pr::ChatSend{std::string(pr::kMaxStringBytes + 1, 'a')}), pr::EncodeError);
}

TEST(Protocol, FrameReaderHandlesSplitsAndBatches) {
    pr::Bytes stream;
    pr::encode_append(pr::Tick{1}, stream);
    pr::encode_append(pr::ChatSend{"x"}, stream);
    pr::encode_append(pr::Tick{2}, stream);
    pr::FrameReader r;
    std::vector<pr::Message> got;
    for (std::uint8_t b : stream) {
        r.feed(std::span(&b, 1));
        while (auto m = r.next()) got.push_back(*m);
    }
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(got[1], pr::Message(pr::ChatSend{"x"}));
    EXPECT_EQ(r.buffered(), 0u);
}

TEST(Protocol, SnapshotRebuildsWorld) {
    VoxelWorld w(Bounds{8, 8, 8});
    seed_flat_terrain(w, 3);
    w.set_block({2, 4, 2}, {35, 12}, Provenance::placed_by_player, 5);
    w.players[5] = PlayerRecord{5, "p", {2.5, 4.0, 2.5}, {}};
    const auto snap = pr::make_snapshot(w);
    std::uint64_t total = 0;
    for (const auto& r : snap.runs) total += r.count;
    EXPECT_EQ(total, w.bounds().volume());
    const auto back = pr::world_from_snapshot(snap);
    EXPECT_EQ(back.hash(), w.hash());
    EXPECT_EQ(back.provenance({2, 4, 2}), Provenance::placed_by_player);
    ASSERT_NE(back.find_player("p"), nullptr);
}

TEST(Protocol, SnapshotRunsMustCoverVolume) {
    pr::WorldSnapshot snap;
    snap.bounds = Bounds{2, 2, 2};
    snap.runs.push_back({3, kAir, Provenance::natural});
    EXPECT_THROW((void)pr::decode(pr::encode(snap)), pr::ProtocolError);
}

TEST(Protocol, FixedPointConversions) {
    const auto p = pr::FixedPos::from({1.5, -2.25, 100.03125});
    EXPECT_EQ(p.x, 48);
    EXPECT_EQ(p.y, -72);
    EXPECT_EQ(p.to_vec3(), (Vec3{1.5, -2.25, 100.03125}));
    EXPECT_EQ(pr::FixedLook::from({-90.5, 12.25}).to_look(), (Look{-90.5, 12.25}));
}

TEST(Protocol, GarbageNeverCrashes) {
    std::mt19937 rng(5);
    for (int i = 0; i < 5000; ++i) {
        pr::Bytes b(rng() % 40);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        if (b.size() >= 4 && rng() % 2) {
            b[0] = b[1] = 0;
            b[2] = 0;
            b[3] = static_cast<std::uint8_t>(b.size() - 4);
        }
        try {
            (void)pr::decode(b);
        } catch (const pr::ProtocolError&) {
        }
    }
}
