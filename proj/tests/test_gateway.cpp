#include <gtest/gtest.h>

#include <httplib.h>

#include <json.hpp>
#include <random>

#include "voxelbot/gateway.hpp"

using namespace voxelbot;
namespace pr = voxelbot::protocol;
using nlohmann::json;

TEST(Base64, KnownVectors) {
    EXPECT_EQ(base64_encode({}), "");
    EXPECT_EQ(base64_encode({'f'}), "Zg==");
    EXPECT_EQ(base64_encode({'f', 'o', 'o', 'b'}), "Zm9vYg==");
    EXPECT_EQ(base64_decode("Zm9vYmFy"), (pr::Bytes{'f', 'o', 'o', 'b', 'a', 'r'}));
}

TEST(Base64, RoundTripAndRejects) {
    std::mt19937 rng(2);
    for (int i = 0; i < 200; ++i) {
        pr::Bytes b(rng() % 50);
        for (auto& x : b) x = static_cast<std::uint8_t>(rng());
        EXPECT_EQ(base64_decode(base64_encode(b)), b);
    }
    EXPECT_THROW((void)base64_decode("abc"), std::invalid_argument);
    EXPECT_THROW((void)base64_decode("ab!="), std::invalid_argument);
}

TEST(Gateway, HashHex) { EXPECT_EQ(hash_hex(0xabcULL), "0000000000000abc"); }

TEST(Gateway, SessionSnapshotChatAndHash) {
    ServerConfig cfg;
    cfg.bounds = Bounds{16, 8, 16};
    cfg.ground_y = 3;
    WorldServer core(cfg);
    std::mutex mu;
    Gateway gw(core, mu, BlockRegistry::builtin());
    const auto port = gw.start(0);
    httplib::Client http("127.0.0.1", port);

    auto reg = http.Get("/registry");
    ASSERT_TRUE(reg);
    EXPECT_EQ(reg->get_header_value("Access-Control-Allow-Origin"), "*");
    EXPECT_FALSE(json::parse(reg->body)["blocks"].empty());

    auto sess = http.Post("/session", "", "text/plain");
    ASSERT_TRUE(sess);
    const auto id = json::parse(sess->body)["session"].get<std::uint64_t>();
    const std::string q = "?session=" + std::to_string(id);

    const std::string body = base64_encode(pr::encode(pr::Login{pr::kProtocolVersion, "web"})) + "\n" +
                             base64_encode(pr::encode(pr::ChatSend{"hello"})) + "\n";
    auto sent = http.Post(("/send" + q).c_str(), body, "text/plain");
    ASSERT_TRUE(sent);
    EXPECT_EQ(json::parse(sent->body)["accepted"], 2);

    auto polled = http.Get(("/poll" + q + "&wait=500").c_str());
    ASSERT_TRUE(polled);
    const auto frames = json::parse(polled->body)["frames"];
    ASSERT_EQ(frames.size(), 2u);
    const auto snap_bytes = base64_decode(frames[0].get<std::string>());
    const auto snap = std::get<pr::WorldSnapshot>(pr::decode(snap_bytes)->message);
    const auto mirrored = pr::world_from_snapshot(snap);

    auto h = http.Get("/hash");
    ASSERT_TRUE(h);
    const auto hj = json::parse(h->body);
    EXPECT_EQ(hj["hash"], hash_hex(mirrored.hash()));
    EXPECT_EQ(hj["non_air"], mirrored.non_air_count());

    auto bad = http.Post(("/send" + q).c_str(), "!!!\n", "text/plain");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    auto unknown = http.Get("/poll?session=999");
    ASSERT_TRUE(unknown);
    EXPECT_EQ(unknown->status, 404);

    auto closed = http.Post(("/close" + q).c_str(), "", "text/plain");
    ASSERT_TRUE(closed);
    EXPECT_EQ(core.logged_in_count(), 0u);
    gw.stop();
}
