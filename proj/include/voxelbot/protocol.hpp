#pragma once
// Length-prefixed binary message codec. See PROTOCOL.md for the byte layout.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "voxelbot/world.hpp"

namespace voxelbot::protocol {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr std::size_t kMaxFrameBytes = std::size_t{1} << 26;
inline constexpr std::size_t kMaxStringBytes = 0xFFFF;
inline constexpr std::int32_t kPositionScale = 32;  // 1/32 block
inline constexpr std::int32_t kAngleScale = 100;    // centidegrees

enum class MessageType : std::uint8_t {
    login = 0x01,
    chat_send = 0x02,
    chat_broadcast = 0x03,
    block_change = 0x04,
    player_move = 0x05,
    world_snapshot = 0x06,
    spawn_mob = 0x07,
    tick = 0x08,
    disconnect = 0x09,
};

// Continuous position in fixed point (kPositionScale units per block).
struct FixedPos {
    std::int32_t x = 0;
    std::int32_t y = 0;
    std::int32_t z = 0;

    static FixedPos from(const Vec3& v);
    [[nodiscard]] Vec3 to_vec3() const;
    bool operator==(const FixedPos&) const = default;
};

// Angles in fixed point (kAngleScale units per degree).
struct FixedLook {
    std::int32_t yaw = 0;
    std::int32_t pitch = 0;

    static FixedLook from(const Look& l);
    [[nodiscard]] Look to_look() const;
    bool operator==(const FixedLook&) const = default;
};

struct Login {
    std::uint8_t version = kProtocolVersion;
    std::string name;
    bool operator==(const Login&) const = default;
};

struct ChatSend {
    std::string text;
    bool operator==(const ChatSend&) const = default;
};

struct ChatBroadcast {
    std::string speaker;
    std::string text;
    bool operator==(const ChatBroadcast&) const = default;
};

struct BlockChange {
    Location loc;
    BlockId block;
    Provenance source = Provenance::placed_by_player;
    bool operator==(const BlockChange&) const = default;
};

// Client to server: name is empty. Server to clients: name identifies the mover.
struct PlayerMove {
    std::string name;
    FixedPos position;
    FixedLook look;
    bool operator==(const PlayerMove&) const = default;
};

struct VoxelRun {
    std::uint32_t count = 0;
    BlockId block;
    Provenance source = Provenance::natural;
    bool operator==(const VoxelRun&) const = default;
};

enum class EntityKind : std::uint8_t { player = 0, mob = 1 };

struct EntityState {
    EntityKind kind = EntityKind::player;
    std::uint32_t id = 0;
    std::string name;
    std::uint8_t mob_kind = 0;
    FixedPos position;
    FixedLook look;
    bool operator==(const EntityState&) const = default;
};

// Voxels run-length encoded in (y, z, x) order; run counts sum to the bounds volume.
struct WorldSnapshot {
    Bounds bounds;
    std::vector<VoxelRun> runs;
    std::vector<EntityState> entities;
    bool operator==(const WorldSnapshot&) const = default;
};

struct SpawnMob {
    MobKind kind = MobKind::cow;
    Location loc;
    bool operator==(const SpawnMob&) const = default;
};

struct Tick {
    std::uint32_t seq = 0;
    bool operator==(const Tick&) const = default;
};

struct Disconnect {
    std::string reason;
    bool operator==(const Disconnect&) const = default;
};

using Message = std::variant<Login, ChatSend, ChatBroadcast, BlockChange, PlayerMove, WorldSnapshot, SpawnMob, Tick, Disconnect>;

[[nodiscard]] MessageType type_of(const Message& m);
[[nodiscard]] const char* name_of(MessageType t);

class EncodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
public:
    ProtocolError(const std::string& what, std::size_t offset);
    [[nodiscard]] std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

using Bytes = std::vector<std::uint8_t>;

// Full frame: 4-byte big-endian length, then tag and body. Throws EncodeError.
[[nodiscard]] Bytes encode(const Message& m);
void encode_append(const Message& m, Bytes& out);

struct Decoded {
    Message message;
    std::size_t consumed = 0;
};

// Decodes one frame from the front of `bytes`. nullopt means the frame is incomplete and nothing
// was consumed. Throws ProtocolError carrying the offending byte offset.
[[nodiscard]] std::optional<Decoded> decode(std::span<const std::uint8_t> bytes);

[[nodiscard]] bool valid_utf8(std::string_view s);

// Accumulates a byte stream and yields whole messages.
class FrameReader {
public:
    void feed(std::span<const std::uint8_t> bytes);
    [[nodiscard]] std::optional<Message> next();
    [[nodiscard]] std::size_t buffered() const { return buffer_.size() - start_; }

private:
    Bytes buffer_;
    std::size_t start_ = 0;
};

[[nodiscard]] WorldSnapshot make_snapshot(const VoxelWorld& world);
// Rebuilds a world (blocks, provenance, entities) from a snapshot.
[[nodiscard]] VoxelWorld world_from_snapshot(const WorldSnapshot& snap);

}  // namespace voxelbot::protocol
