#pragma once

#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxelbot/world.hpp"

namespace voxelbot {

struct BlockInfo {
    BlockId block;
    std::string name;
    std::string colour;
};

// Table of known (id, meta) pairs. Text format, one record per line:
//   id meta name colour_class
// '#' starts a comment; an optional "version N" line may precede the records.
class BlockRegistry {
public:
    BlockRegistry() = default;

    static BlockRegistry parse(std::istream& in);
    static BlockRegistry load(const std::string& path);
    static const BlockRegistry& builtin();

    void add(BlockInfo info);

    [[nodiscard]] bool contains(BlockId b) const { return by_block_.count(b) != 0; }
    [[nodiscard]] const BlockInfo* find(BlockId b) const;
    [[nodiscard]] std::optional<BlockId> find_by_name(const std::string& name) const;
    [[nodiscard]] std::string colour_of(BlockId b) const;
    [[nodiscard]] std::string name_of(BlockId b) const;

    // First registered block with the colour, preferring wool.
    [[nodiscard]] std::optional<BlockId> block_for_colour(const std::string& colour) const;

    [[nodiscard]] std::vector<std::string> colours() const;
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] const std::map<BlockId, BlockInfo>& entries() const { return by_block_; }
    [[nodiscard]] int version() const { return version_; }

private:
    int version_ = 1;
    std::map<BlockId, BlockInfo> by_block_;
    std::map<std::string, BlockId> by_name_;
};

// Block types treated as naturally occurring unless placed by a player or agent.
[[nodiscard]] const std::set<std::uint8_t>& default_natural_blocks();

}  // namespace voxelbot
