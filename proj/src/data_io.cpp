#include "voxelbot/data_io.hpp"

#include <fstream>
#include <sstream>

namespace voxelbot {

namespace {

using nlohmann::json;

std::ifstream open_or_throw(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path, 0);
    return in;
}

json parse_json(std::istream& in, const char* what) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw DataError(std::string(what) + ": " + e.what(), e.byte);
    }
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// Parse datasets

std::vector<ParsePair> read_parse_dataset(std::istream& in) {
    const json root = parse_json(in, "parse dataset");
    if (!root.is_array()) throw DataError("parse dataset must be a JSON list", 0);
    std::vector<ParsePair> out;
    out.reserve(root.size());
    for (std::size_t i = 0; i < root.size(); ++i) {
        const json& item = root[i];
        auto bad = [&](const std::string& why) { return DataError("pair " + std::to_string(i) + ": " + why, i); };
        if (!item.is_array() || item.size() != 2) throw bad("expected [dialogue, action_dictionary]");
        if (!item[0].is_array()) throw bad("dialogue must be a list of sentences");
        ParsePair p;
        for (const auto& s : item[0]) {
            if (!s.is_string()) throw bad("dialogue sentences must be strings");
            p.dialogue.push_back(s.get<std::string>());
        }
        if (!item[1].is_object()) throw bad("action dictionary must be an object");
        p.dict = item[1];
        p.issues = validate(p.dict);
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<ParsePair> read_parse_dataset(const std::string& path) {
    auto in = open_or_throw(path);
    return read_parse_dataset(in);
}

void write_parse_dataset(std::ostream& out, const std::vector<ParsePair>& pairs) {
    if (pairs.empty()) {
        out << "[]\n";
        return;
    }
    out << "[\n";
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        out << json::array({pairs[i].dialogue, pairs[i].dict}).dump() << (i + 1 < pairs.size() ? ",\n" : "\n");
    }
    out << "]\n";
}

// ---------------------------------------------------------------------------------------------
// House logs

std::string format_event(const SessionEvent& e) {
    return json::array({e.t, e.userid, {e.loc.x, e.loc.y, e.loc.z}, {e.block.id, e.block.meta}, std::string(1, e.kind)})
        .dump();
}

SessionEvent parse_event(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("malformed JSON: ") + e.what(), 0);
    }
    auto is_int = [](const json& v) { return v.is_number_integer(); };
    if (!j.is_array() || j.size() != 5) throw DataError("event must be [t, userid, [x,y,z], [id,meta], kind]", 0);
    if (!j[0].is_number_unsigned() && !(is_int(j[0]) && j[0].get<long long>() >= 0)) throw DataError("t must be a non-negative integer", 0);
    if (!is_int(j[1]) || j[1].get<long long>() < 0 || j[1].get<long long>() > 0xFFFFFFFFLL) throw DataError("userid must be a non-negative integer", 0);
    if (!j[2].is_array() || j[2].size() != 3 || !is_int(j[2][0]) || !is_int(j[2][1]) || !is_int(j[2][2])) {
        throw DataError("location must be [x, y, z]", 0);
    }
    if (!j[3].is_array() || j[3].size() != 2 || !is_int(j[3][0]) || !is_int(j[3][1])) throw DataError("block must be [id, meta]", 0);
    const long long id = j[3][0].get<long long>();
    const long long meta = j[3][1].get<long long>();
    if (id < 0 || id > 255 || meta < 0 || meta > 15) throw DataError("block id or meta out of range", 0);
    if (!j[4].is_string() || (j[4] != "P" && j[4] != "B")) throw DataError("kind must be \"P\" or \"B\"", 0);
    SessionEvent e;
    e.t = j[0].get<std::uint64_t>();
    e.userid = j[1].get<std::uint32_t>();
    e.loc = {j[2][0].get<std::int32_t>(), j[2][1].get<std::int32_t>(), j[2][2].get<std::int32_t>()};
    e.block = {static_cast<std::uint8_t>(id), static_cast<std::uint8_t>(meta)};
    e.kind = j[4].get<std::string>()[0];
    return e;
}

std::vector<SessionEvent> read_house_log(std::istream& in) {
    std::vector<SessionEvent> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        SessionEvent e;
        try {
            e = parse_event(line);
        } catch (const DataError& err) {
            throw DataError("line " + std::to_string(line_no) + ": " + err.what(), line_no);
        }
        if (!out.empty() && e.t < out.back().t) {
            throw DataError("line " + std::to_string(line_no) + ": t decreases (" + std::to_string(e.t) + " after " +
                                std::to_string(out.back().t) + ")",
                            line_no);
        }
        out.push_back(e);
    }
    return out;
}

std::vector<SessionEvent> read_house_log(const std::string& path) {
    auto in = open_or_throw(path);
    return read_house_log(in);
}

void write_house_log(std::ostream& out, const std::vector<SessionEvent>& events) {
    for (const auto& e : events) out << format_event(e) << '\n';
}

void replay(const std::vector<SessionEvent>& events, VoxelWorld& world) {
    for (std::size_t i = 0; i < events.size(); ++i) {
        const SessionEvent& e = events[i];
        auto bad = [&](const std::string& why) { return DataError("event " + std::to_string(i) + ": " + why, i); };
        if (i > 0 && e.t < events[i - 1].t) throw bad("t decreases");
        if (!world.contains(e.loc)) throw bad("location out of bounds");
        if (e.kind == 'B') {
            if (world.get_block(e.loc).is_air()) throw bad("break on an air voxel");
            world.set_block(e.loc, kAir, Provenance::natural, 0);
        } else {
            world.set_block(e.loc, e.block, Provenance::placed_by_player, e.userid);
        }
    }
}

// ---------------------------------------------------------------------------------------------
// Segmented houses

void validate(const SegmentedHouse& h) {
    if (h.dims.size_x < 0 || h.dims.size_y < 0 || h.dims.size_z < 0) throw DataError("negative dims", 0);
    const std::size_t n = h.dims.volume();
    if (h.schematic.size() != n) throw DataError("schematic has " + std::to_string(h.schematic.size()) + " voxels, dims need " + std::to_string(n), 0);
    if (h.annotated.size() != n) {
        throw DataError("annotated_schematic has " + std::to_string(h.annotated.size()) + " voxels, dims need " + std::to_string(n), 0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (h.annotated[i] > h.annotation_list.size()) {
            throw DataError("annotation id " + std::to_string(h.annotated[i]) + " at voxel " + std::to_string(i) +
                                " exceeds annotation_list length " + std::to_string(h.annotation_list.size()),
                            0);
        }
    }
}

std::string label_at(const SegmentedHouse& h, const Location& l) {
    if (!h.dims.contains(l)) throw std::out_of_range("voxel outside house");
    const auto i = (static_cast<std::size_t>(l.y) * static_cast<std::size_t>(h.dims.size_z) + static_cast<std::size_t>(l.z)) *
                       static_cast<std::size_t>(h.dims.size_x) +
                   static_cast<std::size_t>(l.x);
    const std::uint32_t id = h.annotated.at(i);
    return id == 0 ? std::string{} : h.annotation_list.at(id - 1);
}

std::map<std::string, std::vector<Location>> labelled_voxels(const SegmentedHouse& h) {
    std::map<std::string, std::vector<Location>> out;
    std::size_t i = 0;
    for (std::int32_t y = 0; y < h.dims.size_y; ++y) {
        for (std::int32_t z = 0; z < h.dims.size_z; ++z) {
            for (std::int32_t x = 0; x < h.dims.size_x; ++x, ++i) {
                if (h.annotated[i] != 0) out[h.annotation_list.at(h.annotated[i] - 1)].push_back({x, y, z});
            }
        }
    }
    return out;
}

namespace {

BlockId block_from_json(const json& c) {
    if (!c.is_array() || c.size() != 2 || !c[0].is_number_integer() || !c[1].is_number_integer()) {
        throw DataError("schematic cells must be [id, meta]", 0);
    }
    const long long id = c[0].get<long long>();
    const long long meta = c[1].get<long long>();
    if (id < 0 || id > 255 || meta < 0 || meta > 15) throw DataError("block id or meta out of range", 0);
    return {static_cast<std::uint8_t>(id), static_cast<std::uint8_t>(meta)};
}

std::uint32_t annotation_from_json(const json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0 || v.get<long long>() > 0xFFFFFFFFLL) {
        throw DataError("annotation ids must be non-negative integers", 0);
    }
    return v.get<std::uint32_t>();
}

std::vector<std::string> labels_from_json(const json& v) {
    if (!v.is_array()) throw DataError("annotation_list must be a list", 0);
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) throw DataError("annotation_list entries must be strings", 0);
        out.push_back(s.get<std::string>());
    }
    return out;
}

template <typename Fn>
std::vector<SegmentedHouse> read_houses(std::istream& in, Fn&& one) {
    const json root = parse_json(in, "segmentation");
    if (!root.is_array()) throw DataError("segmentation file must be a JSON list", 0);
    std::vector<SegmentedHouse> out;
    for (std::size_t i = 0; i < root.size(); ++i) {
        try {
            SegmentedHouse h = one(root[i]);
            validate(h);
            out.push_back(std::move(h));
        } catch (const DataError& e) {
            throw DataError("house " + std::to_string(i) + ": " + e.what(), i);
        } catch (const json::exception& e) {
            throw DataError("house " + std::to_string(i) + ": " + e.what(), i);
        }
    }
    return out;
}

}  // namespace

std::vector<SegmentedHouse> read_segmentation(std::istream& in) {
    return read_houses(in, [](const json& j) {
        if (!j.is_object()) throw DataError("house must be an object", 0);
        SegmentedHouse h;
        h.house_name = j.at("house_name").get<std::string>();
        const auto& d = j.at("dims");
        if (!d.is_array() || d.size() != 3) throw DataError("dims must be [x, y, z]", 0);
        h.dims = {d[0].get<std::int32_t>(), d[1].get<std::int32_t>(), d[2].get<std::int32_t>()};
        for (const auto& c : j.at("schematic")) h.schematic.push_back(block_from_json(c));
        for (const auto& v : j.at("annotated_schematic")) h.annotated.push_back(annotation_from_json(v));
        h.annotation_list = labels_from_json(j.at("annotation_list"));
        return h;
    });
}

std::vector<SegmentedHouse> read_segmentation(const std::string& path) {
    auto in = open_or_throw(path);
    return read_segmentation(in);
}

void write_segmentation(std::ostream& out, const std::vector<SegmentedHouse>& houses) {
    json root = json::array();
    for (const auto& h : houses) {
        json cells = json::array();
        for (const auto& b : h.schematic) cells.push_back({b.id, b.meta});
        root.push_back({{"house_name", h.house_name},
                        {"dims", {h.dims.size_x, h.dims.size_y, h.dims.size_z}},
                        {"schematic", cells},
                        {"annotated_schematic", h.annotated},
                        {"annotation_list", h.annotation_list}});
    }
    out << root.dump() << '\n';
}

std::vector<SegmentedHouse> import_segmentation_nested(std::istream& in) {
    return read_houses(in, [](const json& j) {
        if (!j.is_array() || j.size() != 4) {
            throw DataError("expected [schematic, annotated_schematic, annotation_list, house_name]", 0);
        }
        const json& s = j[0];
        const json& a = j[1];
        if (!s.is_array() || !a.is_array()) throw DataError("voxel arrays must be nested lists", 0);
        SegmentedHouse h;
        h.house_name = j[3].get<std::string>();
        h.annotation_list = labels_from_json(j[2]);
        const auto ny = static_cast<std::int32_t>(s.size());
        const auto nz = ny ? static_cast<std::int32_t>(s[0].size()) : 0;
        const auto nx = nz ? static_cast<std::int32_t>(s[0][0].size()) : 0;
        h.dims = {nx, ny, nz};
        if (a.size() != s.size()) throw DataError("schematic and annotated_schematic shapes differ", 0);
        for (std::int32_t y = 0; y < ny; ++y) {
            if (s[y].size() != static_cast<std::size_t>(nz) || a[y].size() != static_cast<std::size_t>(nz)) {
                throw DataError("ragged or mismatched voxel arrays at y=" + std::to_string(y), 0);
            }
            for (std::int32_t z = 0; z < nz; ++z) {
                if (s[y][z].size() != static_cast<std::size_t>(nx) || a[y][z].size() != static_cast<std::size_t>(nx)) {
                    throw DataError("ragged or mismatched voxel arrays at y=" + std::to_string(y) + " z=" + std::to_string(z), 0);
                }
                for (std::int32_t x = 0; x < nx; ++x) {
                    h.schematic.push_back(block_from_json(s[y][z][x]));
                    h.annotated.push_back(annotation_from_json(a[y][z][x]));
                }
            }
        }
        return h;
    });
}

}  // namespace voxelbot
