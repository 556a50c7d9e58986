#pragma once
// Dataset readers and writers: parse pairs, house-building logs, segmented houses.

#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "voxelbot/action_dictionary.hpp"
#include "voxelbot/world.hpp"

namespace voxelbot {

// Error carrying the zero-based item index or one-based line number of the offending input.
class DataError : public std::runtime_error {
public:
    DataError(const std::string& what, std::size_t where) : std::runtime_error(what), where_(where) {}
    [[nodiscard]] std::size_t where() const { return where_; }

private:
    std::size_t where_;
};

// ---- parse datasets: a JSON list of [dialogue, action_dictionary] pairs

struct ParsePair {
    std::vector<std::string> dialogue;
    ActionDict dict;
    std::vector<std::string> issues;  // schema violations; the dictionary is kept as read
};

[[nodiscard]] std::vector<ParsePair> read_parse_dataset(std::istream& in);
[[nodiscard]] std::vector<ParsePair> read_parse_dataset(const std::string& path);
// One pair per line inside the enclosing list.
void write_parse_dataset(std::ostream& out, const std::vector<ParsePair>& pairs);

// ---- house logs: one [t, userid, [x, y, z], [id, meta], "P"|"B"] array per line

struct SessionEvent {
    std::uint64_t t = 0;
    std::uint32_t userid = 0;
    Location loc;
    BlockId block;
    char kind = 'P';  // 'P' place, 'B' break (block is what was broken)

    bool operator==(const SessionEvent&) const = default;
};

[[nodiscard]] std::string format_event(const SessionEvent& e);
// Throws DataError (where = 0) on malformed input.
[[nodiscard]] SessionEvent parse_event(const std::string& line);

// Blank lines are skipped. Throws DataError with the line number on malformed or non-monotonic input.
[[nodiscard]] std::vector<SessionEvent> read_house_log(std::istream& in);
[[nodiscard]] std::vector<SessionEvent> read_house_log(const std::string& path);
void write_house_log(std::ostream& out, const std::vector<SessionEvent>& events);

// Applies events in order. Throws DataError with the event index for decreasing t, out-of-bounds
// voxels, or a "B" on air.
void replay(const std::vector<SessionEvent>& events, VoxelWorld& world);

// ---- segmented houses

// Voxel arrays are flat in (y, z, x) order: index = (y * size_z + z) * size_x + x.
struct SegmentedHouse {
    Bounds dims{0, 0, 0};
    std::vector<BlockId> schematic;
    std::vector<std::uint32_t> annotated;  // 0 unlabeled, else 1-based index into annotation_list
    std::vector<std::string> annotation_list;
    std::string house_name;

    bool operator==(const SegmentedHouse&) const = default;
};

// Throws DataError (where = 0) when array sizes disagree with dims or an id is out of range.
void validate(const SegmentedHouse& h);

// Label of a voxel, or empty when unlabeled.
[[nodiscard]] std::string label_at(const SegmentedHouse& h, const Location& l);
// Voxels per label, in (y, z, x) order.
[[nodiscard]] std::map<std::string, std::vector<Location>> labelled_voxels(const SegmentedHouse& h);

// Portable container: a JSON list of
//   {"house_name", "dims": [x, y, z], "schematic": [[id, meta], ...], "annotated_schematic": [...], "annotation_list": [...]}
[[nodiscard]] std::vector<SegmentedHouse> read_segmentation(std::istream& in);
[[nodiscard]] std::vector<SegmentedHouse> read_segmentation(const std::string& path);
void write_segmentation(std::ostream& out, const std::vector<SegmentedHouse>& houses);

// Nested-list layout: a list of [schematic, annotated_schematic, annotation_list, house_name] with the
// voxel arrays nested [y][z][x]; schematic cells are [id, meta].
[[nodiscard]] std::vector<SegmentedHouse> import_segmentation_nested(std::istream& in);

}  // namespace voxelbot
