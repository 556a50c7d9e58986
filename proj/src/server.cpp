#include "voxelbot/server.hpp"

#include <iostream>

namespace voxelbot {

namespace pr = protocol;

VoxelWorld initial_world(const ServerConfig& config) {
    VoxelWorld w(config.bounds);
    if (config.ground_y >= 0) seed_flat_terrain(w, config.ground_y);
    return w;
}

Vec3 spawn_point(const VoxelWorld& world) {
    const std::int32_t x = world.bounds().size_x / 2;
    const std::int32_t z = world.bounds().size_z / 2;
    const auto top = world.top_solid_at_or_below(x, z, world.bounds().size_y - 1);
    const double y = top ? *top + 1 : 0;
    return {x + 0.5, y, z + 0.5};
}

WorldServer::WorldServer(ServerConfig config)
    : config_(config),
      registry_(config.registry ? config.registry : &BlockRegistry::builtin()),
      world_(initial_world(config)),
      rng_(config.seed) {}

ConnectionId WorldServer::connect() {
    const ConnectionId c = next_connection_++;
    connections_[c];
    return c;
}

void WorldServer::disconnect(ConnectionId c) {
    auto it = connections_.find(c);
    if (it == connections_.end()) return;
    if (it->second.player) world_.players.erase(*it->second.player);
    connections_.erase(it);
}

bool WorldServer::closed(ConnectionId c) const {
    auto it = connections_.find(c);
    return it == connections_.end() || it->second.closed;
}

std::vector<pr::Message> WorldServer::drain(ConnectionId c) {
    std::vector<pr::Message> out;
    auto it = connections_.find(c);
    if (it == connections_.end()) return out;
    out.assign(std::make_move_iterator(it->second.out.begin()), std::make_move_iterator(it->second.out.end()));
    it->second.out.clear();
    return out;
}

std::size_t WorldServer::logged_in_count() const {
    std::size_t n = 0;
    for (const auto& [id, c] : connections_) n += c.player && !c.closed;
    return n;
}

std::optional<std::uint32_t> WorldServer::player_id(ConnectionId c) const {
    auto it = connections_.find(c);
    if (it == connections_.end()) return std::nullopt;
    return it->second.player;
}

void WorldServer::send(ConnectionId c, pr::Message m) {
    auto it = connections_.find(c);
    if (it != connections_.end() && !it->second.closed) it->second.out.push_back(std::move(m));
}

void WorldServer::broadcast(const pr::Message& m, std::optional<ConnectionId> except) {
    for (auto& [id, c] : connections_) {
        if (c.player && !c.closed && id != except) c.out.push_back(m);
    }
}

void WorldServer::receive(ConnectionId c, const pr::Message& m) {
    auto it = connections_.find(c);
    if (it == connections_.end() || it->second.closed) return;
    Connection& conn = it->second;
    if (!conn.player) {
        if (const auto* login = std::get_if<pr::Login>(&m)) {
            handle_login(c, conn, *login);
        } else if (!std::holds_alternative<pr::Disconnect>(m)) {
            conn.out.push_back(pr::Disconnect{"login first"});
            conn.closed = true;
        }
        return;
    }
    PlayerRecord& me = world_.players.at(*conn.player);
    std::visit(
        [&](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, pr::ChatSend>) {
                broadcast(pr::ChatBroadcast{me.name, msg.text});
            } else if constexpr (std::is_same_v<T, pr::BlockChange>) {
                handle_block_change(conn, msg);
            } else if constexpr (std::is_same_v<T, pr::PlayerMove>) {
                me.position = msg.position.to_vec3();
                me.look = msg.look.to_look();
                broadcast(pr::PlayerMove{me.name, msg.position, msg.look}, c);
            } else if constexpr (std::is_same_v<T, pr::SpawnMob>) {
                if (!world_.contains(msg.loc)) return;
                const std::uint32_t id = world_.mobs.empty() ? 1 : world_.mobs.rbegin()->first + 1;
                world_.mobs[id] = Mob{id, msg.kind, voxel_center(msg.loc), Look{}};
                world_.mobs[id].position.y = msg.loc.y;
                broadcast(msg);
            } else if constexpr (std::is_same_v<T, pr::Disconnect>) {
                world_.players.erase(*conn.player);
                conn.closed = true;
            }
            // Login, ChatBroadcast, WorldSnapshot and Tick from a client are ignored.
        },
        m);
}

void WorldServer::handle_login(ConnectionId c, Connection& conn, const pr::Login& m) {
    std::string reason;
    if (m.version != pr::kProtocolVersion) {
        reason = "unsupported protocol version " + std::to_string(m.version);
    } else if (m.name.empty()) {
        reason = "empty name";
    } else if (world_.find_player(m.name)) {
        reason = "name '" + m.name + "' is already in use";
    }
    if (!reason.empty()) {
        conn.out.push_back(pr::Disconnect{reason});
        conn.closed = true;
        return;
    }
    const std::uint32_t id = next_player_++;
    PlayerRecord rec{id, m.name, spawn_point(world_), Look{}};
    world_.players[id] = rec;
    conn.player = id;
    conn.out.push_back(pr::make_snapshot(world_));
    broadcast(pr::PlayerMove{rec.name, pr::FixedPos::from(rec.position), pr::FixedLook::from(rec.look)}, c);
}

void WorldServer::handle_block_change(Connection& conn, const pr::BlockChange& m) {
    if (!world_.contains(m.loc)) return;
    if (!m.block.is_air() && !registry_->contains(m.block)) return;
    const BlockId old = world_.get_block(m.loc);
    if (old == m.block && world_.provenance(m.loc) == m.source) return;
    const Provenance source = m.block.is_air() ? Provenance::natural : m.source;
    world_.set_block(m.loc, m.block, source, m.block.is_air() ? 0 : *conn.player);
    if (!old.is_air() && old != m.block) append_event({tick_, *conn.player, m.loc, old, 'B'});
    if (!m.block.is_air() && old != m.block) append_event({tick_, *conn.player, m.loc, m.block, 'P'});
    broadcast(pr::BlockChange{m.loc, m.block, source});
}

void WorldServer::append_event(const SessionEvent& e) {
    record_.push_back(e);
    if (sink_) *sink_ << format_event(e) << '\n';
}

bool WorldServer::record_to(const std::string& path) {
    auto f = std::make_unique<std::ofstream>(path, std::ios::trunc);
    if (!*f) {
        std::cerr << "warning: cannot write session record to " << path << "; recording disabled\n";
        sink_.reset();
        return false;
    }
    for (const auto& e : record_) *f << format_event(e) << '\n';
    sink_ = std::move(f);
    return true;
}

void WorldServer::flush_record() {
    if (sink_) sink_->flush();
}

void WorldServer::tick() {
    ++tick_;
    if (config_.mob_move_period > 0 && tick_ % static_cast<std::uint64_t>(config_.mob_move_period) == 0) walk_mobs();
    broadcast(pr::Tick{static_cast<std::uint32_t>(tick_)});
}

void WorldServer::walk_mobs() {
    static constexpr Location steps[4] = {{1, 0, 0}, {-1, 0, 0}, {0, 0, 1}, {0, 0, -1}};
    for (auto& [id, mob] : world_.mobs) {
        const Location here = to_voxel(mob.position);
        const Location next = here + steps[rng_() % 4];
        if (!world_.contains(next) || !world_.get_block(next).is_air()) continue;
        const Location below{next.x, next.y - 1, next.z};
        if (world_.contains(below) && world_.get_block(below).is_air()) continue;
        mob.position = {next.x + 0.5, static_cast<double>(next.y), next.z + 0.5};
    }
}

}  // namespace voxelbot
