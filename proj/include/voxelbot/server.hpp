#pragma once
// Authoritative world server: login, broadcast, tick loop, session recording.
//
// WorldServer is transport-agnostic: connections are numbered, incoming messages are handed to
// receive() and outgoing ones are collected with drain(). Callers serialize access.

#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/data_io.hpp"
#include "voxelbot/protocol.hpp"
#include "voxelbot/world.hpp"

namespace voxelbot {

struct ServerConfig {
    Bounds bounds;
    std::int32_t ground_y = 62;  // flat terrain height; negative leaves the world empty
    std::uint64_t seed = 0;
    int mob_move_period = 10;  // ticks between random-walk moves
    const BlockRegistry* registry = nullptr;  // defaults to the builtin registry
};

using ConnectionId = std::uint32_t;

class WorldServer {
public:
    explicit WorldServer(ServerConfig config = {});

    ConnectionId connect();
    void receive(ConnectionId c, const protocol::Message& m);
    void disconnect(ConnectionId c);
    // Outgoing messages for a connection, oldest first.
    [[nodiscard]] std::vector<protocol::Message> drain(ConnectionId c);
    // True once the server has told the connection to go away.
    [[nodiscard]] bool closed(ConnectionId c) const;

    // Advances the clock, walks mobs, and broadcasts Tick.
    void tick();

    [[nodiscard]] std::uint64_t now() const { return tick_; }
    [[nodiscard]] const VoxelWorld& world() const { return world_; }
    [[nodiscard]] const ServerConfig& config() const { return config_; }
    [[nodiscard]] const std::vector<SessionEvent>& record() const { return record_; }
    [[nodiscard]] std::size_t logged_in_count() const;
    [[nodiscard]] std::optional<std::uint32_t> player_id(ConnectionId c) const;

    // Streams events to a file as they happen. Returns false (and leaves recording to memory only)
    // when the file cannot be opened.
    bool record_to(const std::string& path);
    void flush_record();

private:
    struct Connection {
        std::optional<std::uint32_t> player;
        bool closed = false;
        std::deque<protocol::Message> out;
    };

    void handle_login(ConnectionId c, Connection& conn, const protocol::Login& m);
    void handle_block_change(Connection& conn, const protocol::BlockChange& m);
    void send(ConnectionId c, protocol::Message m);
    void broadcast(const protocol::Message& m, std::optional<ConnectionId> except = std::nullopt);
    void append_event(const SessionEvent& e);
    void walk_mobs();

    ServerConfig config_;
    const BlockRegistry* registry_;
    VoxelWorld world_;
    std::uint64_t tick_ = 0;
    std::uint32_t next_player_ = 1;
    ConnectionId next_connection_ = 1;
    std::map<ConnectionId, Connection> connections_;
    std::vector<SessionEvent> record_;
    std::unique_ptr<std::ofstream> sink_;
    std::mt19937_64 rng_;
};

// Spawn point for new players: the centre column, standing on the terrain.
[[nodiscard]] Vec3 spawn_point(const VoxelWorld& world);

// Same starting world the server builds from a config.
[[nodiscard]] VoxelWorld initial_world(const ServerConfig& config);

}  // namespace voxelbot
