#include "voxelbot/protocol.hpp"

#include <cmath>
#include <limits>

namespace voxelbot::protocol {

namespace {

std::int32_t to_fixed(double v, double scale) {
    const double scaled = std::round(v * scale);
    if (!(scaled >= std::numeric_limits<std::int32_t>::min() && scaled <= std::numeric_limits<std::int32_t>::max())) {
        throw EncodeError("fixed-point value out of range");
    }
    return static_cast<std::int32_t>(scaled);
}

class Writer {
public:
    explicit Writer(Bytes& out) : out_(out) {}

    void u8(std::uint8_t v) { out_.push_back(v); }
    void u16(std::uint16_t v) {
        out_.push_back(static_cast<std::uint8_t>(v >> 8));
        out_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int shift = 24; shift >= 0; shift -= 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void str(const std::string& s) {
        if (s.size() > kMaxStringBytes) throw EncodeError("string exceeds 65535 bytes");
        if (!valid_utf8(s)) throw EncodeError("string is not valid UTF-8");
        u16(static_cast<std::uint16_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void loc(const Location& l) {
        i32(l.x);
        i32(l.y);
        i32(l.z);
    }
    void block(BlockId b) {
        if (b.meta > 0xF) throw EncodeError("block meta exceeds 4 bits");
        u8(b.id);
        u8(b.meta);
    }
    void pos(const FixedPos& p) {
        i32(p.x);
        i32(p.y);
        i32(p.z);
    }
    void look(const FixedLook& l) {
        i32(l.yaw);
        i32(l.pitch);
    }

private:
    Bytes& out_;
};

// Reads a single frame body; offsets are reported relative to the start of the input buffer.
class Reader {
public:
    Reader(std::span<const std::uint8_t> body, std::size_t base) : body_(body), base_(base) {}

    [[nodiscard]] std::size_t offset() const { return base_ + pos_; }
    [[nodiscard]] bool done() const { return pos_ == body_.size(); }
    [[nodiscard]] std::size_t remaining() const { return body_.size() - pos_; }

    std::uint8_t u8() {
        need(1);
        return body_[pos_++];
    }
    std::uint16_t u16() {
        need(2);
        const auto v = static_cast<std::uint16_t>((body_[pos_] << 8) | body_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | body_[pos_ + static_cast<std::size_t>(i)];
        pos_ += 4;
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    std::string str() {
        const std::size_t at = offset();
        const std::uint16_t n = u16();
        need(n);
        std::string s(reinterpret_cast<const char*>(body_.data() + pos_), n);
        if (!valid_utf8(s)) throw ProtocolError("malformed UTF-8 string", at);
        pos_ += n;
        return s;
    }
    Location loc() {
        Location l;
        l.x = i32();
        l.y = i32();
        l.z = i32();
        return l;
    }
    BlockId block() {
        BlockId b;
        b.id = u8();
        const std::size_t at = offset();
        b.meta = u8();
        if (b.meta > 0xF) throw ProtocolError("block meta exceeds 4 bits", at);
        return b;
    }
    Provenance source() {
        const std::size_t at = offset();
        const std::uint8_t v = u8();
        if (v > 2) throw ProtocolError("unknown block source", at);
        return static_cast<Provenance>(v);
    }
    FixedPos pos() {
        FixedPos p;
        p.x = i32();
        p.y = i32();
        p.z = i32();
        return p;
    }
    FixedLook look() {
        FixedLook l;
        l.yaw = i32();
        l.pitch = i32();
        return l;
    }

private:
    void need(std::size_t n) const {
        if (body_.size() - pos_ < n) throw ProtocolError("frame length mismatch: body too short", offset());
    }

    std::span<const std::uint8_t> body_;
    std::size_t base_;
    std::size_t pos_ = 0;
};

void write_body(const Message& m, Writer& w) {
    w.u8(static_cast<std::uint8_t>(type_of(m)));
    std::visit(
        [&w](const auto& msg) {
            using T = std::decay_t<decltype(msg)>;
            if constexpr (std::is_same_v<T, Login>) {
                w.u8(msg.version);
                w.str(msg.name);
            } else if constexpr (std::is_same_v<T, ChatSend>) {
                w.str(msg.text);
            } else if constexpr (std::is_same_v<T, ChatBroadcast>) {
                w.str(msg.speaker);
                w.str(msg.text);
            } else if constexpr (std::is_same_v<T, BlockChange>) {
                w.loc(msg.loc);
                w.block(msg.block);
                w.u8(static_cast<std::uint8_t>(msg.source));
            } else if constexpr (std::is_same_v<T, PlayerMove>) {
                w.str(msg.name);
                w.pos(msg.position);
                w.look(msg.look);
            } else if constexpr (std::is_same_v<T, WorldSnapshot>) {
                w.i32(msg.bounds.size_x);
                w.i32(msg.bounds.size_y);
                w.i32(msg.bounds.size_z);
                w.u32(static_cast<std::uint32_t>(msg.runs.size()));
                for (const VoxelRun& r : msg.runs) {
                    w.u32(r.count);
                    w.block(r.block);
                    w.u8(static_cast<std::uint8_t>(r.source));
                }
                if (msg.entities.size() > 0xFFFF) throw EncodeError("too many entities");
                w.u16(static_cast<std::uint16_t>(msg.entities.size()));
                for (const EntityState& e : msg.entities) {
                    w.u8(static_cast<std::uint8_t>(e.kind));
                    w.u32(e.id);
                    w.str(e.name);
                    w.u8(e.mob_kind);
                    w.pos(e.position);
                    w.look(e.look);
                }
            } else if constexpr (std::is_same_v<T, SpawnMob>) {
                w.u8(static_cast<std::uint8_t>(msg.kind));
                w.loc(msg.loc);
            } else if constexpr (std::is_same_v<T, Tick>) {
                w.u32(msg.seq);
            } else if constexpr (std::is_same_v<T, Disconnect>) {
                w.str(msg.reason);
            }
        },
        m);
}

Message read_body(Reader& r) {
    const std::size_t tag_at = r.offset();
    const std::uint8_t tag = r.u8();
    switch (static_cast<MessageType>(tag)) {
        case MessageType::login: {
            Login m;
            m.version = r.u8();
            m.name = r.str();
            return m;
        }
        case MessageType::chat_send: return ChatSend{r.str()};
        case MessageType::chat_broadcast: {
            ChatBroadcast m;
            m.speaker = r.str();
            m.text = r.str();
            return m;
        }
        case MessageType::block_change: {
            BlockChange m;
            m.loc = r.loc();
            m.block = r.block();
            m.source = r.source();
            return m;
        }
        case MessageType::player_move: {
            PlayerMove m;
            m.name = r.str();
            m.position = r.pos();
            m.look = r.look();
            return m;
        }
        case MessageType::world_snapshot: {
            WorldSnapshot m;
            const std::size_t bounds_at = r.offset();
            m.bounds.size_x = r.i32();
            m.bounds.size_y = r.i32();
            m.bounds.size_z = r.i32();
            if (m.bounds.size_x <= 0 || m.bounds.size_y <= 0 || m.bounds.size_z <= 0) {
                throw ProtocolError("snapshot bounds must be positive", bounds_at);
            }
            const std::size_t runs_at = r.offset();
            const std::uint32_t run_count = r.u32();
            // Each run occupies 7 bytes; reject counts the frame cannot hold before allocating.
            if (run_count > r.remaining() / 7) throw ProtocolError("frame length mismatch: snapshot run count", runs_at);
            m.runs.reserve(run_count);
            std::uint64_t total = 0;
            for (std::uint32_t i = 0; i < run_count; ++i) {
                VoxelRun run;
                run.count = r.u32();
                run.block = r.block();
                run.source = r.source();
                total += run.count;
                m.runs.push_back(run);
            }
            if (total != static_cast<std::uint64_t>(m.bounds.size_x) * static_cast<std::uint64_t>(m.bounds.size_y) *
                             static_cast<std::uint64_t>(m.bounds.size_z)) {
                throw ProtocolError("snapshot runs do not cover the bounds volume", runs_at);
            }
            const std::uint16_t entity_count = r.u16();
            for (std::uint16_t i = 0; i < entity_count; ++i) {
                EntityState e;
                const std::size_t kind_at = r.offset();
                const std::uint8_t kind = r.u8();
                if (kind > 1) throw ProtocolError("unknown entity kind", kind_at);
                e.kind = static_cast<EntityKind>(kind);
                e.id = r.u32();
                e.name = r.str();
                const std::size_t mob_at = r.offset();
                e.mob_kind = r.u8();
                if (e.mob_kind >= kMobKindCount) throw ProtocolError("unknown mob kind", mob_at);
                e.position = r.pos();
                e.look = r.look();
                m.entities.push_back(std::move(e));
            }
            return m;
        }
        case MessageType::spawn_mob: {
            SpawnMob m;
            const std::size_t kind_at = r.offset();
            const std::uint8_t kind = r.u8();
            if (kind >= kMobKindCount) throw ProtocolError("unknown mob kind", kind_at);
            m.kind = static_cast<MobKind>(kind);
            m.loc = r.loc();
            return m;
        }
        case MessageType::tick: return Tick{r.u32()};
        case MessageType::disconnect: return Disconnect{r.str()};
    }
    throw ProtocolError("unknown message tag " + std::to_string(tag), tag_at);
}

}  // namespace

FixedPos FixedPos::from(const Vec3& v) {
    return {to_fixed(v.x, kPositionScale), to_fixed(v.y, kPositionScale), to_fixed(v.z, kPositionScale)};
}

Vec3 FixedPos::to_vec3() const {
    return {static_cast<double>(x) / kPositionScale, static_cast<double>(y) / kPositionScale,
            static_cast<double>(z) / kPositionScale};
}

FixedLook FixedLook::from(const Look& l) { return {to_fixed(l.yaw, kAngleScale), to_fixed(l.pitch, kAngleScale)}; }

Look FixedLook::to_look() const {
    return {static_cast<double>(yaw) / kAngleScale, static_cast<double>(pitch) / kAngleScale};
}

MessageType type_of(const Message& m) {
    constexpr MessageType by_index[] = {MessageType::login,        MessageType::chat_send,      MessageType::chat_broadcast,
                                        MessageType::block_change, MessageType::player_move,    MessageType::world_snapshot,
                                        MessageType::spawn_mob,    MessageType::tick,           MessageType::disconnect};
    return by_index[m.index()];
}

const char* name_of(MessageType t) {
    switch (t) {
        case MessageType::login: return "Login";
        case MessageType::chat_send: return "ChatSend";
        case MessageType::chat_broadcast: return "ChatBroadcast";
        case MessageType::block_change: return "BlockChange";
        case MessageType::player_move: return "PlayerMove";
        case MessageType::world_snapshot: return "WorldSnapshot";
        case MessageType::spawn_mob: return "SpawnMob";
        case MessageType::tick: return "Tick";
        case MessageType::disconnect: return "Disconnect";
    }
    return "?";
}

ProtocolError::ProtocolError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

void encode_append(const Message& m, Bytes& out) {
    const std::size_t start = out.size();
    out.resize(start + 4);
    Writer w(out);
    try {
        write_body(m, w);
    } catch (...) {
        out.resize(start);
        throw;
    }
    const std::size_t n = out.size() - start - 4;
    if (n > kMaxFrameBytes) {
        out.resize(start);
        throw EncodeError("frame exceeds maximum size");
    }
    for (int i = 0; i < 4; ++i) out[start + static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(n >> (24 - 8 * i));
}

Bytes encode(const Message& m) {
    Bytes out;
    encode_append(m, out);
    return out;
}

std::optional<Decoded> decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4) return std::nullopt;
    const std::size_t n = (static_cast<std::size_t>(bytes[0]) << 24) | (static_cast<std::size_t>(bytes[1]) << 16) |
                          (static_cast<std::size_t>(bytes[2]) << 8) | static_cast<std::size_t>(bytes[3]);
    if (n == 0) throw ProtocolError("empty frame", 0);
    if (n > kMaxFrameBytes) throw ProtocolError("frame length exceeds maximum", 0);
    if (bytes.size() - 4 < n) return std::nullopt;
    Reader r(bytes.subspan(4, n), 4);
    Message m = read_body(r);
    if (!r.done()) throw ProtocolError("frame length mismatch: trailing bytes", r.offset());
    return Decoded{std::move(m), n + 4};
}

bool valid_utf8(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return false;
        }
        if (i + len > s.size()) return false;
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) return false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000)) return false;
        if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) return false;
        i += len;
    }
    return true;
}

void FrameReader::feed(std::span<const std::uint8_t> bytes) {
    if (start_ > 0 && start_ == buffer_.size()) {
        buffer_.clear();
        start_ = 0;
    }
    buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Message> FrameReader::next() {
    auto d = decode(std::span<const std::uint8_t>(buffer_).subspan(start_));
    if (!d) return std::nullopt;
    start_ += d->consumed;
    if (start_ > (1u << 20) && start_ * 2 > buffer_.size()) {
        buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(start_));
        start_ = 0;
    }
    return std::move(d->message);
}

WorldSnapshot make_snapshot(const VoxelWorld& world) {
    WorldSnapshot snap;
    snap.bounds = world.bounds();
    const Bounds& b = world.bounds();
    for (std::int32_t y = 0; y < b.size_y; ++y) {
        for (std::int32_t z = 0; z < b.size_z; ++z) {
            for (std::int32_t x = 0; x < b.size_x; ++x) {
                const Location l{x, y, z};
                const BlockId block = world.get_block(l);
                const Provenance src = block.is_air() ? Provenance::natural : world.provenance(l);
                if (!snap.runs.empty() && snap.runs.back().block == block && snap.runs.back().source == src &&
                    snap.runs.back().count < 0xFFFFFFFFu) {
                    ++snap.runs.back().count;
                } else {
                    snap.runs.push_back({1, block, src});
                }
            }
        }
    }
    for (const auto& [id, p] : world.players) {
        snap.entities.push_back({EntityKind::player, id, p.name, 0, FixedPos::from(p.position), FixedLook::from(p.look)});
    }
    for (const auto& [id, mob] : world.mobs) {
        snap.entities.push_back({EntityKind::mob, id, to_string(mob.kind), static_cast<std::uint8_t>(mob.kind),
                                 FixedPos::from(mob.position), FixedLook::from(mob.look)});
    }
    return snap;
}

VoxelWorld world_from_snapshot(const WorldSnapshot& snap) {
    constexpr std::size_t kMaxVoxels = std::size_t{1} << 28;
    if (snap.bounds.size_x <= 0 || snap.bounds.size_y <= 0 || snap.bounds.size_z <= 0 || snap.bounds.volume() > kMaxVoxels) {
        throw std::invalid_argument("snapshot bounds out of range");
    }
    std::uint64_t total = 0;
    for (const VoxelRun& run : snap.runs) total += run.count;
    if (total != snap.bounds.volume()) throw std::invalid_argument("snapshot runs do not cover the bounds volume");
    VoxelWorld world(snap.bounds);
    const Bounds& b = snap.bounds;
    std::size_t i = 0;
    for (const VoxelRun& run : snap.runs) {
        if (run.block.is_air()) {
            i += run.count;
            continue;
        }
        for (std::uint32_t k = 0; k < run.count; ++k, ++i) {
            const auto x = static_cast<std::int32_t>(i % static_cast<std::size_t>(b.size_x));
            const auto z = static_cast<std::int32_t>((i / static_cast<std::size_t>(b.size_x)) % static_cast<std::size_t>(b.size_z));
            const auto y = static_cast<std::int32_t>(i / (static_cast<std::size_t>(b.size_x) * static_cast<std::size_t>(b.size_z)));
            world.set_block({x, y, z}, run.block, run.source);
        }
    }
    for (const EntityState& e : snap.entities) {
        if (e.kind == EntityKind::player) {
            world.players[e.id] = PlayerRecord{e.id, e.name, e.position.to_vec3(), e.look.to_look()};
        } else {
            world.mobs[e.id] = Mob{e.id, static_cast<MobKind>(e.mob_kind), e.position.to_vec3(), e.look.to_look()};
        }
    }
    return world;
}

}  // namespace voxelbot::protocol
