#include "voxelbot/block_registry.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "voxelbot/defaults.hpp"

namespace voxelbot {

BlockRegistry BlockRegistry::parse(std::istream& in) {
    BlockRegistry reg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "version") {
            if (!(ls >> reg.version_)) throw std::runtime_error("block registry line " + std::to_string(line_no) + ": bad version");
            continue;
        }
        int id = 0;
        int meta = 0;
        std::string name;
        std::string colour;
        try {
            id = std::stoi(first);
        } catch (const std::exception&) {
            throw std::runtime_error("block registry line " + std::to_string(line_no) + ": bad id");
        }
        if (!(ls >> meta >> name >> colour)) {
            throw std::runtime_error("block registry line " + std::to_string(line_no) + ": expected 'id meta name colour'");
        }
        if (id < 0 || id > 255 || meta < 0 || meta > 15) {
            throw std::runtime_error("block registry line " + std::to_string(line_no) + ": id/meta out of range");
        }
        reg.add({BlockId{static_cast<std::uint8_t>(id), static_cast<std::uint8_t>(meta)}, name, colour});
    }
    return reg;
}

BlockRegistry BlockRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open block registry " + path);
    return parse(in);
}

const BlockRegistry& BlockRegistry::builtin() {
    static const BlockRegistry reg = [] {
        std::istringstream in{std::string(defaults::blocks_text())};
        return parse(in);
    }();
    return reg;
}

void BlockRegistry::add(BlockInfo info) {
    by_name_[info.name] = info.block;
    by_block_[info.block] = std::move(info);
}

const BlockInfo* BlockRegistry::find(BlockId b) const {
    auto it = by_block_.find(b);
    return it == by_block_.end() ? nullptr : &it->second;
}

std::optional<BlockId> BlockRegistry::find_by_name(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::string BlockRegistry::colour_of(BlockId b) const {
    const BlockInfo* info = find(b);
    return info ? info->colour : "unknown";
}

std::string BlockRegistry::name_of(BlockId b) const {
    const BlockInfo* info = find(b);
    return info ? info->name : "block_" + std::to_string(b.id) + ":" + std::to_string(b.meta);
}

std::optional<BlockId> BlockRegistry::block_for_colour(const std::string& colour) const {
    std::optional<BlockId> first;
    for (const auto& [block, info] : by_block_) {
        if (info.colour != colour) continue;
        if (block.id == 35) return block;
        if (!first) first = block;
    }
    return first;
}

std::vector<std::string> BlockRegistry::colours() const {
    std::set<std::string> seen;
    for (const auto& [block, info] : by_block_) seen.insert(info.colour);
    return {seen.begin(), seen.end()};
}

std::vector<std::string> BlockRegistry::names() const {
    std::vector<std::string> out;
    for (const auto& [name, block] : by_name_) out.push_back(name);
    return out;
}

const std::set<std::uint8_t>& default_natural_blocks() {
    static const std::set<std::uint8_t> natural = {1, 2, 3, 7, 8, 9, 10, 11, 12, 13, 17, 18, 31, 78, 80};
    return natural;
}

}  // namespace voxelbot
