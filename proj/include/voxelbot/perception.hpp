#pragma once
// Heuristic perception over a world snapshot: block objects, raycast vision, directions, colour, size.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/memory.hpp"
#include "voxelbot/world.hpp"

namespace voxelbot {

// Inclusive box.
struct Region {
    Location lo;
    Location hi;

    [[nodiscard]] bool contains(const Location& l) const {
        return l.x >= lo.x && l.y >= lo.y && l.z >= lo.z && l.x <= hi.x && l.y <= hi.y && l.z <= hi.z;
    }
};

[[nodiscard]] Region full_region(const VoxelWorld& world);
// Horizontal box of the given radius around center, spanning the full height, clipped to bounds.
[[nodiscard]] Region region_around(const VoxelWorld& world, const Location& center, int radius);

// Placed voxels are unnatural regardless of type; natural-provenance voxels are unnatural unless whitelisted.
[[nodiscard]] bool is_unnatural(const VoxelWorld& world, const Location& l, const std::set<std::uint8_t>& natural);

// 6-connected components of unnatural voxels inside the region. Each component is sorted (y, z, x);
// components are ordered by their first voxel.
[[nodiscard]] std::vector<std::vector<Location>> find_block_objects(const VoxelWorld& world, const Region& region,
                                                                    const std::set<std::uint8_t>& natural);

struct VisionParams {
    int width = 64;
    int height = 64;
    double fov_degrees = 70.0;
    double max_range = 64.0;
};

struct VisionPixel {
    BlockId block = kAir;
    double distance = 0.0;  // to the ray's entry point into the hit voxel
    Location voxel;
    bool hit = false;
};

struct VisionFrame {
    int width = 0;
    int height = 0;
    std::vector<VisionPixel> pixels;  // row-major, row 0 at the top

    [[nodiscard]] const VisionPixel& at(int col, int row) const {
        return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) + static_cast<std::size_t>(col)];
    }
};

// Unit direction of the ray through the center of pixel (col, row).
[[nodiscard]] Vec3 vision_ray(const Look& look, const VisionParams& params, int col, int row);

// First non-air voxel along a ray within max_range, by voxel traversal. Misses yield (air, max_range).
[[nodiscard]] VisionPixel cast_ray(const VoxelWorld& world, const Vec3& origin, const Vec3& dir, double max_range);

// Throws std::out_of_range if the eye is outside the world.
[[nodiscard]] VisionFrame render_vision(const VoxelWorld& world, const Vec3& eye, const Look& look,
                                        const VisionParams& params = {});

enum class RelativeDirection : std::uint8_t { left, right, front, back, above, below };

[[nodiscard]] std::optional<RelativeDirection> relative_direction_from_string(const std::string& s);
[[nodiscard]] const char* to_string(RelativeDirection d);

// Speaker frame: facing is the horizontal part of the look, left = facing x up.
// front means between the anchor and the speaker, back means beyond the anchor.
[[nodiscard]] bool in_direction(const Vec3& anchor, const Vec3& candidate, RelativeDirection dir, const Look& speaker_look);

// Index of the candidate nearest the anchor among those in the half-space, or nullopt.
[[nodiscard]] std::optional<std::size_t> resolve_relative_direction(const Vec3& anchor, RelativeDirection dir,
                                                                    const Look& speaker_look,
                                                                    const std::vector<Vec3>& candidates);

[[nodiscard]] Vec3 centroid(const std::vector<Location>& positions);

// Colour class of the most common block; ties go to the lowest (id, meta).
[[nodiscard]] std::string infer_colour(const std::vector<Location>& positions, const VoxelWorld& world,
                                       const BlockRegistry& registry);

struct SizeRange {
    std::string word;
    int lo = 1;
    std::optional<int> hi;  // nullopt is unbounded
};

class SizeLexicon {
public:
    SizeLexicon();
    explicit SizeLexicon(std::vector<SizeRange> ranges);

    [[nodiscard]] const std::vector<SizeRange>& ranges() const { return ranges_; }
    [[nodiscard]] bool knows(const std::string& word) const;
    // Throws std::invalid_argument for words outside the lexicon.
    [[nodiscard]] bool match(const std::string& word, int extent) const;
    [[nodiscard]] std::optional<std::string> word_for(int extent) const;
    [[nodiscard]] std::vector<std::string> words() const;

private:
    std::vector<SizeRange> ranges_;
};

[[nodiscard]] int max_extent(const std::vector<Location>& positions);
[[nodiscard]] bool match_size(const std::string& adjective, const std::vector<Location>& positions,
                              const SizeLexicon& lexicon = SizeLexicon{});

struct PerceptionConfig {
    std::set<std::uint8_t> natural;
    SizeLexicon sizes;
    int radius = 32;
    // Restrict object discovery to voxels seen by render_vision.
    bool vision_only = false;
    VisionParams vision;
};

struct RefreshStats {
    std::size_t kept = 0;
    std::size_t added = 0;
    std::size_t removed = 0;
};

// Registers or refreshes block objects found in the region. An existing object keeps its id (and its
// tags) while at least half of its old voxels are still part of one component. Objects overlapping
// the region that lost their voxels are erased. Colour and size triples are kept current.
RefreshStats refresh_block_objects(MemoryStore& memory, const VoxelWorld& world, const Region& region,
                                   const BlockRegistry& registry, const PerceptionConfig& config,
                                   const std::set<Location>* visible = nullptr);

// Mirrors world mobs into memory: new mobs inserted, moved mobs updated, vanished mobs erased.
void refresh_mobs(MemoryStore& memory, const VoxelWorld& world);

// Voxels hit by any vision ray.
[[nodiscard]] std::set<Location> visible_voxels(const VisionFrame& frame);

// Stores (object, has_tag, label) and reifies it with (triple, at_voxel, "x,y,z").
MemoryId ingest_segmentation_tag(MemoryStore& memory, MemoryId object, const Location& voxel, const std::string& label);

// JSON lines of {"object": id, "voxel": [x,y,z], "label": "..."}. Returns the number of tags stored.
// Throws std::runtime_error with the line number on malformed input.
std::size_t ingest_segmentation_file(MemoryStore& memory, std::istream& in);

}  // namespace voxelbot
