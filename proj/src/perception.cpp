#include "voxelbot/perception.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

#include <json.hpp>

namespace voxelbot {

Region full_region(const VoxelWorld& world) {
    const Bounds& b = world.bounds();
    return {{0, 0, 0}, {b.size_x - 1, b.size_y - 1, b.size_z - 1}};
}

Region region_around(const VoxelWorld& world, const Location& center, int radius) {
    const Bounds& b = world.bounds();
    return {{std::max(0, center.x - radius), 0, std::max(0, center.z - radius)},
            {std::min(b.size_x - 1, center.x + radius), b.size_y - 1, std::min(b.size_z - 1, center.z + radius)}};
}

bool is_unnatural(const VoxelWorld& world, const Location& l, const std::set<std::uint8_t>& natural) {
    if (world.provenance(l) != Provenance::natural) return true;
    const BlockId b = world.get_block(l);
    return !b.is_air() && natural.count(b.id) == 0;
}

namespace {

template <typename Pred>
std::vector<std::vector<Location>> components_if(const Region& r, Pred&& pred) {
    std::vector<std::vector<Location>> out;
    const std::size_t sx = static_cast<std::size_t>(r.hi.x - r.lo.x + 1);
    const std::size_t sy = static_cast<std::size_t>(r.hi.y - r.lo.y + 1);
    const std::size_t sz = static_cast<std::size_t>(r.hi.z - r.lo.z + 1);
    if (r.hi.x < r.lo.x || r.hi.y < r.lo.y || r.hi.z < r.lo.z) return out;
    std::vector<std::uint8_t> seen(sx * sy * sz, 0);
    auto idx = [&](const Location& l) {
        return (static_cast<std::size_t>(l.y - r.lo.y) * sz + static_cast<std::size_t>(l.z - r.lo.z)) * sx +
               static_cast<std::size_t>(l.x - r.lo.x);
    };
    std::deque<Location> queue;
    for (int y = r.lo.y; y <= r.hi.y; ++y) {
        for (int z = r.lo.z; z <= r.hi.z; ++z) {
            for (int x = r.lo.x; x <= r.hi.x; ++x) {
                const Location start{x, y, z};
                if (seen[idx(start)] || !pred(start)) continue;
                std::vector<Location> comp;
                seen[idx(start)] = 1;
                queue.push_back(start);
                while (!queue.empty()) {
                    const Location cur = queue.front();
                    queue.pop_front();
                    comp.push_back(cur);
                    for (const Location& off : kFaceOffsets) {
                        const Location n = cur + off;
                        if (!r.contains(n) || seen[idx(n)]) continue;
                        if (!pred(n)) continue;
                        seen[idx(n)] = 1;
                        queue.push_back(n);
                    }
                }
                std::sort(comp.begin(), comp.end(), YzxLess{});
                out.push_back(std::move(comp));
            }
        }
    }
    return out;
}

void check_region(const VoxelWorld& world, const Region& region) {
    if (!world.contains(region.lo) || !world.contains(region.hi)) {
        throw std::out_of_range("region outside world bounds");
    }
}

}  // namespace

std::vector<std::vector<Location>> find_block_objects(const VoxelWorld& world, const Region& region,
                                                      const std::set<std::uint8_t>& natural) {
    check_region(world, region);
    return components_if(region, [&](const Location& l) { return is_unnatural(world, l, natural); });
}

Vec3 vision_ray(const Look& look, const VisionParams& params, int col, int row) {
    const Vec3 f = look_direction(look);
    const double yaw = look.yaw * std::numbers::pi / 180.0;
    const Vec3 right{std::sin(yaw), 0.0, -std::cos(yaw)};
    // up = f x right
    const Vec3 up{f.y * right.z - f.z * right.y, f.z * right.x - f.x * right.z, f.x * right.y - f.y * right.x};
    const double half = std::tan(params.fov_degrees * std::numbers::pi / 360.0);
    const double aspect = static_cast<double>(params.height) / static_cast<double>(params.width);
    const double u = (2.0 * (col + 0.5) / params.width - 1.0) * half;
    const double v = (1.0 - 2.0 * (row + 0.5) / params.height) * half * aspect;
    Vec3 d{f.x + u * right.x + v * up.x, f.y + u * right.y + v * up.y, f.z + u * right.z + v * up.z};
    const double n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    return {d.x / n, d.y / n, d.z / n};
}

VisionPixel cast_ray(const VoxelWorld& world, const Vec3& origin, const Vec3& dir, double max_range) {
    VisionPixel miss{kAir, max_range, {}, false};
    Location v = to_voxel(origin);
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    int cell[3] = {v.x, v.y, v.z};
    int step[3];
    double t_max[3];
    double t_delta[3];
    constexpr double inf = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] > 0) {
            step[a] = 1;
            t_max[a] = (cell[a] + 1 - o[a]) / d[a];
            t_delta[a] = 1.0 / d[a];
        } else if (d[a] < 0) {
            step[a] = -1;
            t_max[a] = (cell[a] - o[a]) / d[a];
            t_delta[a] = -1.0 / d[a];
        } else {
            step[a] = 0;
            t_max[a] = inf;
            t_delta[a] = inf;
        }
    }
    double t_entry = 0.0;
    while (t_entry <= max_range) {
        const Location cur{cell[0], cell[1], cell[2]};
        if (!world.contains(cur)) return miss;
        const BlockId b = world.get_block(cur);
        if (!b.is_air()) return {b, t_entry, cur, true};
        int a = 0;
        if (t_max[1] < t_max[a]) a = 1;
        if (t_max[2] < t_max[a]) a = 2;
        if (t_max[a] == inf) return miss;
        t_entry = t_max[a];
        cell[a] += step[a];
        t_max[a] += t_delta[a];
    }
    return miss;
}

VisionFrame render_vision(const VoxelWorld& world, const Vec3& eye, const Look& look, const VisionParams& params) {
    if (!world.contains(to_voxel(eye))) throw std::out_of_range("eye outside world bounds");
    VisionFrame frame;
    frame.width = params.width;
    frame.height = params.height;
    frame.pixels.reserve(static_cast<std::size_t>(params.width) * static_cast<std::size_t>(params.height));
    for (int row = 0; row < params.height; ++row) {
        for (int col = 0; col < params.width; ++col) {
            frame.pixels.push_back(cast_ray(world, eye, vision_ray(look, params, col, row), params.max_range));
        }
    }
    return frame;
}

std::optional<RelativeDirection> relative_direction_from_string(const std::string& s) {
    if (s == "LEFT") return RelativeDirection::left;
    if (s == "RIGHT") return RelativeDirection::right;
    if (s == "FRONT") return RelativeDirection::front;
    if (s == "BACK") return RelativeDirection::back;
    if (s == "ABOVE") return RelativeDirection::above;
    if (s == "BELOW") return RelativeDirection::below;
    return std::nullopt;
}

const char* to_string(RelativeDirection d) {
    switch (d) {
        case RelativeDirection::left: return "LEFT";
        case RelativeDirection::right: return "RIGHT";
        case RelativeDirection::front: return "FRONT";
        case RelativeDirection::back: return "BACK";
        case RelativeDirection::above: return "ABOVE";
        case RelativeDirection::below: return "BELOW";
    }
    return "LEFT";
}

bool in_direction(const Vec3& anchor, const Vec3& candidate, RelativeDirection dir, const Look& speaker_look) {
    const double yaw = speaker_look.yaw * std::numbers::pi / 180.0;
    const double fx = std::cos(yaw);
    const double fz = std::sin(yaw);
    // left = facing x up = (-fz, 0, fx)
    const double dx = candidate.x - anchor.x;
    const double dy = candidate.y - anchor.y;
    const double dz = candidate.z - anchor.z;
    const double along = dx * fx + dz * fz;
    const double side = -dx * fz + dz * fx;
    constexpr double eps = 1e-9;
    switch (dir) {
        case RelativeDirection::left: return side > eps;
        case RelativeDirection::right: return side < -eps;
        case RelativeDirection::front: return along < -eps;
        case RelativeDirection::back: return along > eps;
        case RelativeDirection::above: return dy > eps;
        case RelativeDirection::below: return dy < -eps;
    }
    return false;
}

std::optional<std::size_t> resolve_relative_direction(const Vec3& anchor, RelativeDirection dir, const Look& speaker_look,
                                                      const std::vector<Vec3>& candidates) {
    std::optional<std::size_t> best;
    double best_d = 0.0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const Vec3& c = candidates[i];
        if (!in_direction(anchor, c, dir, speaker_look)) continue;
        const double d = (c.x - anchor.x) * (c.x - anchor.x) + (c.y - anchor.y) * (c.y - anchor.y) +
                         (c.z - anchor.z) * (c.z - anchor.z);
        if (!best || d < best_d) {
            best = i;
            best_d = d;
        }
    }
    return best;
}

Vec3 centroid(const std::vector<Location>& positions) {
    Vec3 c;
    if (positions.empty()) return c;
    for (const Location& l : positions) {
        c.x += l.x;
        c.y += l.y;
        c.z += l.z;
    }
    const double n = static_cast<double>(positions.size());
    return {c.x / n, c.y / n, c.z / n};
}

std::string infer_colour(const std::vector<Location>& positions, const VoxelWorld& world, const BlockRegistry& registry) {
    if (positions.empty()) throw std::invalid_argument("infer_colour needs a non-empty object");
    std::map<BlockId, std::size_t> counts;
    for (const Location& l : positions) {
        const BlockId b = world.get_block(l);
        if (!b.is_air()) ++counts[b];
    }
    if (counts.empty()) return "unknown";
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    return registry.colour_of(best->first);
}

SizeLexicon::SizeLexicon()
    : ranges_{{"tiny", 1, 2}, {"small", 3, 5}, {"medium", 6, 10}, {"big", 11, 14}, {"huge", 15, std::nullopt}} {}

SizeLexicon::SizeLexicon(std::vector<SizeRange> ranges) : ranges_(std::move(ranges)) {}

bool SizeLexicon::knows(const std::string& word) const {
    return std::any_of(ranges_.begin(), ranges_.end(), [&](const SizeRange& r) { return r.word == word; });
}

bool SizeLexicon::match(const std::string& word, int extent) const {
    for (const SizeRange& r : ranges_) {
        if (r.word == word) return extent >= r.lo && (!r.hi || extent <= *r.hi);
    }
    throw std::invalid_argument("unknown size word: " + word);
}

std::optional<std::string> SizeLexicon::word_for(int extent) const {
    for (const SizeRange& r : ranges_) {
        if (extent >= r.lo && (!r.hi || extent <= *r.hi)) return r.word;
    }
    return std::nullopt;
}

std::vector<std::string> SizeLexicon::words() const {
    std::vector<std::string> out;
    for (const SizeRange& r : ranges_) out.push_back(r.word);
    return out;
}

int max_extent(const std::vector<Location>& positions) {
    if (positions.empty()) return 0;
    Location lo = positions.front();
    Location hi = positions.front();
    for (const Location& l : positions) {
        lo = {std::min(lo.x, l.x), std::min(lo.y, l.y), std::min(lo.z, l.z)};
        hi = {std::max(hi.x, l.x), std::max(hi.y, l.y), std::max(hi.z, l.z)};
    }
    return std::max({hi.x - lo.x, hi.y - lo.y, hi.z - lo.z}) + 1;
}

bool match_size(const std::string& adjective, const std::vector<Location>& positions, const SizeLexicon& lexicon) {
    return lexicon.match(adjective, max_extent(positions));
}

namespace {

void set_literal(MemoryStore& memory, MemoryId id, const std::string& predicate, const std::string& value) {
    std::vector<MemoryId> stale;
    for (const MemoryObject* t : memory.triples_about(id)) {
        const TripleData& td = *t->triple();
        if (td.predicate != predicate) continue;
        const auto* s = std::get_if<std::string>(&td.object);
        if (!s || *s != value) stale.push_back(t->id);
    }
    for (MemoryId s : stale) memory.erase(s);
    memory.insert_triple(id, predicate, value);
}

void annotate(MemoryStore& memory, MemoryId id, const std::vector<Location>& positions, const VoxelWorld& world,
              const BlockRegistry& registry, const PerceptionConfig& config) {
    set_literal(memory, id, "has_colour", infer_colour(positions, world, registry));
    if (auto w = config.sizes.word_for(max_extent(positions))) set_literal(memory, id, "has_size", *w);
}

Provenance dominant_source(const std::vector<Location>& positions, const VoxelWorld& world) {
    std::size_t agent = 0;
    std::size_t player = 0;
    for (const Location& l : positions) {
        const Provenance p = world.provenance(l);
        if (p == Provenance::placed_by_agent) ++agent;
        if (p == Provenance::placed_by_player) ++player;
    }
    if (agent == 0 && player == 0) return Provenance::natural;
    return agent > player ? Provenance::placed_by_agent : Provenance::placed_by_player;
}

std::optional<std::string> creator_name(const std::vector<Location>& positions, const VoxelWorld& world) {
    std::map<std::uint32_t, std::size_t> counts;
    for (const Location& l : positions) {
        if (world.provenance(l) != Provenance::natural) ++counts[world.placer(l)];
    }
    if (counts.empty()) return std::nullopt;
    auto best = counts.begin();
    for (auto it = counts.begin(); it != counts.end(); ++it) {
        if (it->second > best->second) best = it;
    }
    auto p = world.players.find(best->first);
    if (p == world.players.end()) return std::nullopt;
    return p->second.name;
}

}  // namespace

RefreshStats refresh_block_objects(MemoryStore& memory, const VoxelWorld& world, const Region& region,
                                   const BlockRegistry& registry, const PerceptionConfig& config,
                                   const std::set<Location>* visible) {
    check_region(world, region);
    const auto comps = components_if(region, [&](const Location& l) {
        if (visible && visible->count(l) == 0) return false;
        return is_unnatural(world, l, config.natural);
    });
    std::map<Location, std::size_t> comp_of;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        for (const Location& l : comps[i]) comp_of.emplace(l, i);
    }

    // Best surviving component per existing object.
    struct Claim {
        MemoryId id;
        std::size_t overlap;
    };
    std::map<std::size_t, Claim> claims;
    std::vector<MemoryId> orphans;
    for (const MemoryObject* obj : memory.query({}, MemoryKind::block_object)) {
        const auto& old = obj->block_object()->positions;
        bool touches = false;
        std::size_t outside_alive = 0;
        std::map<std::size_t, std::size_t> overlap;
        for (const Location& l : old) {
            if (region.contains(l)) {
                touches = true;
                if (auto it = comp_of.find(l); it != comp_of.end()) ++overlap[it->second];
            } else if (world.contains(l) && is_unnatural(world, l, config.natural)) {
                ++outside_alive;
            }
        }
        if (!touches) continue;
        std::optional<std::size_t> best;
        for (const auto& [c, n] : overlap) {
            if (!best || n > overlap[*best]) best = c;
        }
        if (!best || 2 * (overlap[*best] + outside_alive) < old.size()) {
            orphans.push_back(obj->id);
            continue;
        }
        auto [it, inserted] = claims.emplace(*best, Claim{obj->id, overlap[*best]});
        if (!inserted) {
            if (overlap[*best] > it->second.overlap) {
                orphans.push_back(it->second.id);
                it->second = Claim{obj->id, overlap[*best]};
            } else {
                orphans.push_back(obj->id);
            }
        }
    }

    RefreshStats stats;
    for (MemoryId id : orphans) {
        memory.erase(id);
        ++stats.removed;
    }
    for (std::size_t i = 0; i < comps.size(); ++i) {
        MemoryId id;
        if (auto it = claims.find(i); it != claims.end()) {
            id = it->second.id;
            memory.update_block_object(id, comps[i]);
            ++stats.kept;
        } else {
            id = memory.insert_block_object(comps[i], dominant_source(comps[i], world));
            if (auto who = creator_name(comps[i], world)) memory.insert_triple(id, "created_by", *who);
            ++stats.added;
        }
        annotate(memory, id, comps[i], world, registry, config);
    }
    return stats;
}

void refresh_mobs(MemoryStore& memory, const VoxelWorld& world) {
    std::vector<MemoryId> gone;
    std::set<std::uint32_t> known;
    for (const MemoryObject* obj : memory.query({}, MemoryKind::mob)) {
        const MobData& m = *obj->mob();
        auto it = world.mobs.find(m.mob_id);
        if (it == world.mobs.end()) {
            gone.push_back(obj->id);
            continue;
        }
        known.insert(m.mob_id);
        if (!(it->second.position == m.position)) memory.update_mob(obj->id, it->second.position);
    }
    for (MemoryId id : gone) memory.erase(id);
    for (const auto& [mid, mob] : world.mobs) {
        if (known.count(mid)) continue;
        const MemoryId id = memory.insert_mob({mid, mob.kind, mob.position});
        memory.insert_triple(id, "has_name", to_string(mob.kind));
    }
}

std::set<Location> visible_voxels(const VisionFrame& frame) {
    std::set<Location> out;
    for (const VisionPixel& p : frame.pixels) {
        if (p.hit) out.insert(p.voxel);
    }
    return out;
}

MemoryId ingest_segmentation_tag(MemoryStore& memory, MemoryId object, const Location& voxel, const std::string& label) {
    const MemoryId t = memory.insert_triple(object, "has_tag", label);
    memory.insert_triple(t, "at_voxel",
                         std::to_string(voxel.x) + "," + std::to_string(voxel.y) + "," + std::to_string(voxel.z));
    return t;
}

std::size_t ingest_segmentation_file(MemoryStore& memory, std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            const auto& v = j.at("voxel");
            if (!v.is_array() || v.size() != 3) throw std::runtime_error("voxel must be [x,y,z]");
            const MemoryId obj{j.at("object").get<std::uint64_t>()};
            ingest_segmentation_tag(memory, obj, {v[0].get<int>(), v[1].get<int>(), v[2].get<int>()},
                                    j.at("label").get<std::string>());
            ++count;
        } catch (const std::exception& e) {
            throw std::runtime_error("segmentation tags line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return count;
}

}  // namespace voxelbot
