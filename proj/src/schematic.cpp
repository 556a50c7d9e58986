#include "voxelbot/schematic.hpp"

#include <algorithm>
#include <climits>
#include <stdexcept>

namespace voxelbot {

Schematic::Schematic(std::map<Location, BlockId, YzxLess> blocks) : blocks_(std::move(blocks)) {
    normalize();
}

void Schematic::set(const Location& offset, BlockId b) {
    if (b.is_air()) {
        blocks_.erase(offset);
    } else {
        blocks_[offset] = b;
    }
}

void Schematic::normalize() {
    for (auto it = blocks_.begin(); it != blocks_.end();) {
        it = it->second.is_air() ? blocks_.erase(it) : std::next(it);
    }
    if (blocks_.empty()) return;
    Location lo{INT32_MAX, INT32_MAX, INT32_MAX};
    for (const auto& [off, b] : blocks_) {
        lo.x = std::min(lo.x, off.x);
        lo.y = std::min(lo.y, off.y);
        lo.z = std::min(lo.z, off.z);
    }
    if (lo == Location{0, 0, 0}) return;
    std::map<Location, BlockId, YzxLess> shifted;
    for (const auto& [off, b] : blocks_) shifted.emplace(off - lo, b);
    blocks_ = std::move(shifted);
}

Location Schematic::extent() const {
    Location hi{0, 0, 0};
    if (blocks_.empty()) return hi;
    for (const auto& [off, b] : blocks_) {
        hi.x = std::max(hi.x, off.x + 1);
        hi.y = std::max(hi.y, off.y + 1);
        hi.z = std::max(hi.z, off.z + 1);
    }
    return hi;
}

std::vector<ChangeRecord> blit_schematic(VoxelWorld& world, const Schematic& s, const Location& origin,
                                         Provenance source, std::uint32_t placer) {
    for (const auto& [off, b] : s.blocks()) {
        if (!world.contains(origin + off)) throw std::out_of_range("schematic entry outside world bounds");
    }
    std::vector<ChangeRecord> records;
    records.reserve(s.size());
    for (const auto& [off, b] : s.blocks()) records.push_back(world.set_block(origin + off, b, source, placer));
    return records;
}

SchematicLibrary SchematicLibrary::standard() {
    SchematicLibrary lib;
    lib.names_ = {"cube", "wall", "tower", "platform", "pyramid", "house", "hut"};
    return lib;
}

bool SchematicLibrary::knows(const std::string& name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
}

std::vector<std::string> SchematicLibrary::names() const { return names_; }

void SchematicLibrary::remove(const std::string& name) {
    names_.erase(std::remove(names_.begin(), names_.end(), name), names_.end());
}

std::optional<Schematic> SchematicLibrary::make(const std::string& name, const ShapeParams& p) const {
    if (!knows(name)) return std::nullopt;
    Schematic s;
    auto clamp = [](int v) { return std::clamp(v, 1, 32); };
    if (name == "cube") {
        const int n = clamp(p.size.value_or(3));
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z)
                for (int x = 0; x < n; ++x) s.set({x, y, z}, p.material);
    } else if (name == "wall") {
        const int w = clamp(p.width.value_or(p.size.value_or(5)));
        const int h = clamp(p.height.value_or(p.size.value_or(3)));
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) s.set({x, y, 0}, p.material);
    } else if (name == "tower") {
        const int h = clamp(p.height.value_or(p.size.value_or(6)));
        for (int y = 0; y < h; ++y) s.set({0, y, 0}, p.material);
    } else if (name == "platform") {
        const int n = clamp(p.width.value_or(p.size.value_or(5)));
        for (int z = 0; z < n; ++z)
            for (int x = 0; x < n; ++x) s.set({x, 0, z}, p.material);
    } else if (name == "pyramid") {
        const int n = clamp(p.size.value_or(3));
        const int base = 2 * n - 1;
        for (int y = 0; y < n; ++y)
            for (int z = y; z < base - y; ++z)
                for (int x = y; x < base - y; ++x) s.set({x, y, z}, p.material);
    } else if (name == "house" || name == "hut") {
        // Hollow box with a flat roof and a doorway in the z=0 wall.
        const int n = std::max(3, clamp(p.width.value_or(p.size.value_or(name == "house" ? 5 : 3))));
        const int h = std::max(2, clamp(p.height.value_or(name == "house" ? 3 : 2)));
        const int door = n / 2;
        for (int y = 0; y <= h; ++y) {
            for (int z = 0; z < n; ++z) {
                for (int x = 0; x < n; ++x) {
                    const bool roof = y == h;
                    const bool shell = x == 0 || z == 0 || x == n - 1 || z == n - 1;
                    const bool doorway = z == 0 && x == door && y < 2;
                    if ((roof || shell) && !doorway) s.set({x, y, z}, p.material);
                }
            }
        }
    }
    s.normalize();
    return s;
}

}  // namespace voxelbot
