#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "voxelbot/world.hpp"

namespace voxelbot {

// Blueprint of relative offsets. Normalized: min offset on each axis is 0 and air is absent.
class Schematic {
public:
    Schematic() = default;
    explicit Schematic(std::map<Location, BlockId, YzxLess> blocks);

    void set(const Location& offset, BlockId b);
    void normalize();

    [[nodiscard]] const std::map<Location, BlockId, YzxLess>& blocks() const { return blocks_; }
    [[nodiscard]] std::size_t size() const { return blocks_.size(); }
    [[nodiscard]] bool empty() const { return blocks_.empty(); }
    [[nodiscard]] Location extent() const;

    bool operator==(const Schematic&) const = default;

private:
    std::map<Location, BlockId, YzxLess> blocks_;
};

// All-or-nothing: throws std::out_of_range and leaves the world untouched if any entry falls outside.
std::vector<ChangeRecord> blit_schematic(VoxelWorld& world, const Schematic& s, const Location& origin,
                                         Provenance source = Provenance::placed_by_agent, std::uint32_t placer = 0);

struct ShapeParams {
    std::optional<int> size;    // edge length for cubes, height for towers
    std::optional<int> width;
    std::optional<int> height;
    BlockId material{5, 0};
};

// Named shape generators the agent knows how to build.
class SchematicLibrary {
public:
    static SchematicLibrary standard();

    [[nodiscard]] bool knows(const std::string& name) const;
    [[nodiscard]] std::optional<Schematic> make(const std::string& name, const ShapeParams& params) const;
    [[nodiscard]] std::vector<std::string> names() const;

    void remove(const std::string& name);

private:
    std::vector<std::string> names_;
};

}  // namespace voxelbot
