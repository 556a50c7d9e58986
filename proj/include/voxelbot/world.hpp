#pragma once
// Voxel world model: block ids, locations, provenance and the bounded voxel store.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace voxelbot {

// 8-bit id plus 4-bit metadata. id 0 is air.
struct BlockId {
    std::uint8_t id = 0;
    std::uint8_t meta = 0;

    [[nodiscard]] constexpr bool is_air() const { return id == 0; }
    constexpr auto operator<=>(const BlockId&) const = default;
};

inline constexpr BlockId kAir{0, 0};
inline constexpr BlockId kBedrock{7, 0};

struct Location {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;

    constexpr auto operator<=>(const Location&) const = default;
    constexpr Location operator+(const Location& o) const { return {x + o.x, y + o.y, z + o.z}; }
    constexpr Location operator-(const Location& o) const { return {x - o.x, y - o.y, z - o.z}; }
};

// Orders locations by (y, z, x), the canonical voxel iteration order.
struct YzxLess {
    constexpr bool operator()(const Location& a, const Location& b) const {
        if (a.y != b.y) return a.y < b.y;
        if (a.z != b.z) return a.z < b.z;
        return a.x < b.x;
    }
};

inline constexpr Location kFaceOffsets[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

[[nodiscard]] int manhattan(const Location& a, const Location& b);
[[nodiscard]] int chebyshev(const Location& a, const Location& b);

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    bool operator==(const Vec3&) const = default;
};

// Degrees. yaw 0 faces +x, yaw 90 faces +z; positive pitch looks up.
struct Look {
    double yaw = 0.0;
    double pitch = 0.0;

    bool operator==(const Look&) const = default;
};

[[nodiscard]] Location to_voxel(const Vec3& p);
[[nodiscard]] Vec3 voxel_center(const Location& l);
[[nodiscard]] Vec3 look_direction(const Look& look);

struct Bounds {
    std::int32_t size_x = 256;
    std::int32_t size_y = 128;
    std::int32_t size_z = 256;

    [[nodiscard]] bool contains(const Location& l) const {
        return l.x >= 0 && l.y >= 0 && l.z >= 0 && l.x < size_x && l.y < size_y && l.z < size_z;
    }
    [[nodiscard]] std::size_t volume() const {
        return static_cast<std::size_t>(size_x) * static_cast<std::size_t>(size_y) * static_cast<std::size_t>(size_z);
    }
    bool operator==(const Bounds&) const = default;
};

enum class Provenance : std::uint8_t { natural = 0, placed_by_player = 1, placed_by_agent = 2 };

[[nodiscard]] const char* to_string(Provenance p);

struct ChangeRecord {
    Location loc;
    BlockId old_block;
    BlockId new_block;
    Provenance source = Provenance::natural;
    Provenance old_source = Provenance::natural;
    std::uint32_t placer = 0;
    std::uint32_t old_placer = 0;

    bool operator==(const ChangeRecord&) const = default;
};

enum class MobKind : std::uint8_t { cow = 0, pig, sheep, chicken, rabbit, horse };
inline constexpr std::uint8_t kMobKindCount = 6;

[[nodiscard]] const char* to_string(MobKind k);
[[nodiscard]] std::optional<MobKind> mob_kind_from_string(const std::string& s);

struct Mob {
    std::uint32_t mob_id = 0;
    MobKind kind = MobKind::cow;
    Vec3 position;
    Look look;
};

struct PlayerRecord {
    std::uint32_t player_id = 0;
    std::string name;
    Vec3 position;
    Look look;
};

// Bounded dense voxel grid. Single writer; copies are independent snapshots.
class VoxelWorld {
public:
    explicit VoxelWorld(Bounds bounds = {});

    [[nodiscard]] const Bounds& bounds() const { return bounds_; }
    [[nodiscard]] bool contains(const Location& l) const { return bounds_.contains(l); }

    // Throws std::out_of_range outside bounds.
    [[nodiscard]] BlockId get_block(const Location& l) const;
    ChangeRecord set_block(const Location& l, BlockId b, Provenance source, std::uint32_t placer = 0);

    [[nodiscard]] Provenance provenance(const Location& l) const;
    [[nodiscard]] std::uint32_t placer(const Location& l) const;

    // Undoes records newest first, restoring blocks and provenance.
    void reverse_apply(const std::vector<ChangeRecord>& records);

    [[nodiscard]] std::size_t non_air_count() const { return non_air_; }
    [[nodiscard]] std::size_t placed_count() const { return placements_.size(); }

    // 64-bit FNV-1a over (x, y, z, id, meta) of every non-air voxel in (y, z, x) order.
    [[nodiscard]] std::uint64_t hash() const;

    // Visits non-air voxels in (y, z, x) order.
    void for_each_non_air(const std::function<void(const Location&, BlockId)>& fn) const;

    // Highest non-air y in the column at or below y_start, if any.
    [[nodiscard]] std::optional<std::int32_t> top_solid_at_or_below(std::int32_t x, std::int32_t z,
                                                                    std::int32_t y_start) const;

    std::map<std::uint32_t, Mob> mobs;
    std::map<std::uint32_t, PlayerRecord> players;

    [[nodiscard]] PlayerRecord* find_player(const std::string& name);
    [[nodiscard]] const PlayerRecord* find_player(const std::string& name) const;

private:
    struct Placement {
        Provenance source;
        std::uint32_t placer;
    };

    [[nodiscard]] std::size_t index(const Location& l) const {
        return (static_cast<std::size_t>(l.y) * static_cast<std::size_t>(bounds_.size_z) + static_cast<std::size_t>(l.z)) *
                   static_cast<std::size_t>(bounds_.size_x) +
               static_cast<std::size_t>(l.x);
    }
    void check(const Location& l) const;

    Bounds bounds_;
    std::vector<std::uint16_t> cells_;  // (id << 4) | meta
    std::unordered_map<std::size_t, Placement> placements_;
    std::size_t non_air_ = 0;
};

// Flat terrain: bedrock at y=0, stone below ground_y-3, dirt, grass on top at ground_y.
void seed_flat_terrain(VoxelWorld& world, std::int32_t ground_y = 62);

}  // namespace voxelbot
