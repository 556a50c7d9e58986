#include "voxelbot/world.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace voxelbot {

int manhattan(const Location& a, const Location& b) {
    return std::abs(a.x - b.x) + std::abs(a.y - b.y) + std::abs(a.z - b.z);
}

int chebyshev(const Location& a, const Location& b) {
    return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.z - b.z)});
}

Location to_voxel(const Vec3& p) {
    return {static_cast<std::int32_t>(std::floor(p.x)), static_cast<std::int32_t>(std::floor(p.y)),
            static_cast<std::int32_t>(std::floor(p.z))};
}

Vec3 voxel_center(const Location& l) {
    return {l.x + 0.5, static_cast<double>(l.y), l.z + 0.5};
}

Vec3 look_direction(const Look& look) {
    const double yaw = look.yaw * std::numbers::pi / 180.0;
    const double pitch = look.pitch * std::numbers::pi / 180.0;
    return {std::cos(pitch) * std::cos(yaw), std::sin(pitch), std::cos(pitch) * std::sin(yaw)};
}

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::natural: return "natural";
        case Provenance::placed_by_player: return "player";
        case Provenance::placed_by_agent: return "agent";
    }
    return "natural";
}

namespace {
constexpr const char* kMobNames[kMobKindCount] = {"cow", "pig", "sheep", "chicken", "rabbit", "horse"};
}

const char* to_string(MobKind k) {
    const auto i = static_cast<std::size_t>(k);
    return i < kMobKindCount ? kMobNames[i] : "cow";
}

std::optional<MobKind> mob_kind_from_string(const std::string& s) {
    for (std::uint8_t i = 0; i < kMobKindCount; ++i) {
        if (s == kMobNames[i]) return static_cast<MobKind>(i);
    }
    return std::nullopt;
}

VoxelWorld::VoxelWorld(Bounds bounds) : bounds_(bounds) {
    if (bounds.size_x <= 0 || bounds.size_y <= 0 || bounds.size_z <= 0) {
        throw std::invalid_argument("world bounds must be positive");
    }
    cells_.assign(bounds_.volume(), 0);
}

void VoxelWorld::check(const Location& l) const {
    if (!bounds_.contains(l)) {
        throw std::out_of_range("location (" + std::to_string(l.x) + ", " + std::to_string(l.y) + ", " +
                                std::to_string(l.z) + ") outside world bounds");
    }
}

BlockId VoxelWorld::get_block(const Location& l) const {
    check(l);
    const std::uint16_t c = cells_[index(l)];
    return {static_cast<std::uint8_t>(c >> 4), static_cast<std::uint8_t>(c & 0xF)};
}

Provenance VoxelWorld::provenance(const Location& l) const {
    check(l);
    auto it = placements_.find(index(l));
    return it == placements_.end() ? Provenance::natural : it->second.source;
}

std::uint32_t VoxelWorld::placer(const Location& l) const {
    check(l);
    auto it = placements_.find(index(l));
    return it == placements_.end() ? 0 : it->second.placer;
}

ChangeRecord VoxelWorld::set_block(const Location& l, BlockId b, Provenance source, std::uint32_t placer) {
    check(l);
    if (b.meta > 0xF) throw std::invalid_argument("block meta exceeds 4 bits");
    const std::size_t i = index(l);
    ChangeRecord rec;
    rec.loc = l;
    rec.old_block = {static_cast<std::uint8_t>(cells_[i] >> 4), static_cast<std::uint8_t>(cells_[i] & 0xF)};
    rec.new_block = b;
    rec.source = source;
    rec.placer = placer;
    if (auto it = placements_.find(i); it != placements_.end()) {
        rec.old_source = it->second.source;
        rec.old_placer = it->second.placer;
    }

    if (rec.old_block.is_air() && !b.is_air()) ++non_air_;
    if (!rec.old_block.is_air() && b.is_air()) --non_air_;
    cells_[i] = static_cast<std::uint16_t>((b.id << 4) | b.meta);

    if (b.is_air() || source == Provenance::natural) {
        placements_.erase(i);
    } else {
        placements_[i] = Placement{source, placer};
    }
    return rec;
}

void VoxelWorld::reverse_apply(const std::vector<ChangeRecord>& records) {
    for (auto it = records.rbegin(); it != records.rend(); ++it) {
        set_block(it->loc, it->old_block, it->old_source, it->old_placer);
    }
}

std::uint64_t VoxelWorld::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ull;
    };
    auto mix32 = [&mix](std::int32_t v) {
        const auto u = static_cast<std::uint32_t>(v);
        mix(static_cast<std::uint8_t>(u >> 24));
        mix(static_cast<std::uint8_t>(u >> 16));
        mix(static_cast<std::uint8_t>(u >> 8));
        mix(static_cast<std::uint8_t>(u));
    };
    for_each_non_air([&](const Location& l, BlockId b) {
        mix32(l.x);
        mix32(l.y);
        mix32(l.z);
        mix(b.id);
        mix(b.meta);
    });
    return h;
}

void VoxelWorld::for_each_non_air(const std::function<void(const Location&, BlockId)>& fn) const {
    std::size_t i = 0;
    for (std::int32_t y = 0; y < bounds_.size_y; ++y) {
        for (std::int32_t z = 0; z < bounds_.size_z; ++z) {
            for (std::int32_t x = 0; x < bounds_.size_x; ++x, ++i) {
                const std::uint16_t c = cells_[i];
                if ((c >> 4) != 0) {
                    fn(Location{x, y, z}, BlockId{static_cast<std::uint8_t>(c >> 4), static_cast<std::uint8_t>(c & 0xF)});
                }
            }
        }
    }
}

std::optional<std::int32_t> VoxelWorld::top_solid_at_or_below(std::int32_t x, std::int32_t z,
                                                               std::int32_t y_start) const {
    if (x < 0 || z < 0 || x >= bounds_.size_x || z >= bounds_.size_z) return std::nullopt;
    for (std::int32_t y = std::min(y_start, bounds_.size_y - 1); y >= 0; --y) {
        if ((cells_[index({x, y, z})] >> 4) != 0) return y;
    }
    return std::nullopt;
}

PlayerRecord* VoxelWorld::find_player(const std::string& name) {
    for (auto& [id, p] : players) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

const PlayerRecord* VoxelWorld::find_player(const std::string& name) const {
    for (const auto& [id, p] : players) {
        if (p.name == name) return &p;
    }
    return nullptr;
}

void seed_flat_terrain(VoxelWorld& world, std::int32_t ground_y) {
    const Bounds& b = world.bounds();
    ground_y = std::min(ground_y, b.size_y - 2);
    for (std::int32_t y = 0; y <= ground_y; ++y) {
        BlockId block{1, 0};
        if (y == 0) block = kBedrock;
        else if (y == ground_y) block = BlockId{2, 0};
        else if (y >= ground_y - 2) block = BlockId{3, 0};
        for (std::int32_t z = 0; z < b.size_z; ++z) {
            for (std::int32_t x = 0; x < b.size_x; ++x) {
                world.set_block({x, y, z}, block, Provenance::natural);
            }
        }
    }
}

}  // namespace voxelbot
