#include "voxelbot/action_dictionary.hpp"

#include <algorithm>
#include <initializer_list>
#include <stdexcept>

namespace voxelbot {

nlohmann::json Span::to_json() const { return nlohmann::json::array({sentence, nlohmann::json::array({start, end})}); }

std::optional<Span> Span::from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_array() || j[1].size() != 2 ||
        !j[1][0].is_number_integer() || !j[1][1].is_number_integer()) {
        return std::nullopt;
    }
    const Span s{j[0].get<int>(), j[1][0].get<int>(), j[1][1].get<int>()};
    if (s.sentence < 0 || s.start < 0 || s.end < 0) return std::nullopt;
    return s;
}

std::string span_text(const Span& s, const std::vector<std::vector<std::string>>& tokens) {
    if (s.sentence < 0 || static_cast<std::size_t>(s.sentence) >= tokens.size()) throw std::out_of_range("span sentence");
    const auto& sent = tokens[static_cast<std::size_t>(s.sentence)];
    if (s.start < 0 || s.end < s.start || static_cast<std::size_t>(s.end) >= sent.size()) throw std::out_of_range("span words");
    std::string out;
    for (int i = s.start; i <= s.end; ++i) {
        if (!out.empty()) out += ' ';
        out += sent[static_cast<std::size_t>(i)];
    }
    return out;
}

ActionDict noop_dict() { return ActionDict{{"dialogue_type", "NOOP"}}; }

namespace {

class Validator {
public:
    explicit Validator(const std::vector<std::size_t>* counts) : counts_(counts) {}

    std::vector<std::string> errors;

    void root(const nlohmann::json& d) {
        if (!d.is_object()) {
            add("", "dictionary must be an object");
            return;
        }
        if (!d.contains("dialogue_type")) {
            add("", "missing dialogue_type");
            return;
        }
        const auto& t = d["dialogue_type"];
        if (!t.is_string()) {
            add("dialogue_type", "must be a string");
            return;
        }
        const std::string type = t.get<std::string>();
        if (type == "HUMAN_GIVE_COMMAND") {
            keys(d, "", {"dialogue_type", "action"});
            if (!d.contains("action")) {
                add("", "missing action");
            } else {
                action(d["action"], "action");
            }
        } else if (type == "GET_MEMORY") {
            keys(d, "", {"dialogue_type", "filters", "answer_type"});
            filters(d, "filters");
            if (!d.contains("answer_type")) {
                add("", "missing answer_type");
            } else {
                one_of(d["answer_type"], "answer_type", {"NAME", "LOCATION", "COUNT"});
            }
        } else if (type == "PUT_MEMORY") {
            keys(d, "", {"dialogue_type", "filters", "upsert"});
            filters(d, "filters");
            if (!d.contains("upsert")) {
                add("", "missing upsert");
            } else {
                const auto& u = d["upsert"];
                if (!u.is_object()) {
                    add("upsert", "must be an object");
                } else {
                    keys(u, "upsert", {"has_tag"});
                    if (!u.contains("has_tag")) {
                        add("upsert", "missing has_tag");
                    } else {
                        span(u["has_tag"], "upsert.has_tag");
                    }
                }
            }
        } else if (type == "NOOP") {
            keys(d, "", {"dialogue_type"});
        } else {
            add("dialogue_type", "unknown dialogue type '" + type + "'");
        }
    }

private:
    void add(const std::string& path, const std::string& msg) { errors.push_back((path.empty() ? "<root>" : path) + ": " + msg); }

    void keys(const nlohmann::json& o, const std::string& path, std::initializer_list<const char*> allowed) {
        for (const auto& [k, v] : o.items()) {
            if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; })) {
                add(path, "unknown key '" + k + "'");
            }
        }
    }

    void one_of(const nlohmann::json& v, const std::string& path, std::initializer_list<const char*> values) {
        if (!v.is_string()) {
            add(path, "must be a string");
            return;
        }
        const std::string s = v.get<std::string>();
        if (std::none_of(values.begin(), values.end(), [&](const char* a) { return s == a; })) {
            add(path, "unknown value '" + s + "'");
        }
    }

    void span(const nlohmann::json& v, const std::string& path) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_array() || v[1].size() != 2 ||
            !v[1][0].is_number_integer() || !v[1][1].is_number_integer()) {
            add(path, "span must be [sentence, [start, end]]");
            return;
        }
        const long long s = v[0].get<long long>();
        const long long a = v[1][0].get<long long>();
        const long long b = v[1][1].get<long long>();
        if (s < 0 || a < 0 || b < 0) {
            add(path, "span indices must be non-negative");
            return;
        }
        if (b < a) {
            add(path, "span end < start");
            return;
        }
        if (counts_) {
            if (static_cast<std::size_t>(s) >= counts_->size()) {
                add(path, "span sentence out of range");
            } else if (static_cast<std::size_t>(b) >= (*counts_)[static_cast<std::size_t>(s)]) {
                add(path, "span end past last token");
            }
        }
    }

    // Attribute container: has_* keys are spans; `extra` keys are handled by the caller.
    void attributes(const nlohmann::json& o, const std::string& path, std::initializer_list<const char*> extra) {
        for (const auto& [k, v] : o.items()) {
            if (k.rfind("has_", 0) == 0) {
                span(v, path + "." + k);
            } else if (std::none_of(extra.begin(), extra.end(), [&](const char* a) { return k == a; })) {
                add(path, "unknown key '" + k + "'");
            }
        }
    }

    void reference_object(const nlohmann::json& r, const std::string& path) {
        if (!r.is_object()) {
            add(path, "must be an object");
            return;
        }
        attributes(r, path, {"location"});
        if (r.contains("location")) location(r["location"], path + ".location");
    }

    void filters(const nlohmann::json& d, const std::string& path) {
        if (!d.contains("filters")) {
            add("", "missing filters");
            return;
        }
        const auto& f = d["filters"];
        if (!f.is_object()) {
            add(path, "must be an object");
            return;
        }
        keys(f, path, {"reference_object"});
        if (!f.contains("reference_object")) {
            add(path, "missing reference_object");
        } else {
            reference_object(f["reference_object"], path + ".reference_object");
        }
    }

    void location(const nlohmann::json& l, const std::string& path) {
        if (!l.is_object()) {
            add(path, "must be an object");
            return;
        }
        keys(l, path, {"location_type", "reference_object", "coordinates", "relative_direction"});
        if (!l.contains("location_type")) {
            add(path, "missing location_type");
            return;
        }
        one_of(l["location_type"], path + ".location_type", {"REFERENCE_OBJECT", "COORDINATES", "SPEAKER_POS", "AGENT_POS"});
        const std::string t = l["location_type"].is_string() ? l["location_type"].get<std::string>() : "";
        if (t == "REFERENCE_OBJECT" && !l.contains("reference_object")) add(path, "missing reference_object");
        if (t == "COORDINATES" && !l.contains("coordinates")) add(path, "missing coordinates");
        if (l.contains("reference_object")) reference_object(l["reference_object"], path + ".reference_object");
        if (l.contains("coordinates")) {
            span(l["coordinates"], path + ".coordinates");
            if (const auto s = Span::from_json(l["coordinates"]); s && s->end >= s->start && s->end - s->start != 2) {
                add(path + ".coordinates", "coordinates span must cover three words");
            }
        }
        if (l.contains("relative_direction")) {
            one_of(l["relative_direction"], path + ".relative_direction", {"LEFT", "RIGHT", "FRONT", "BACK", "ABOVE", "BELOW"});
        }
    }

    void stop_condition(const nlohmann::json& c, const std::string& path) {
        if (!c.is_object()) {
            add(path, "must be an object");
            return;
        }
        keys(c, path, {"condition_type", "block_type", "depth"});
        if (!c.contains("condition_type")) {
            add(path, "missing condition_type");
            return;
        }
        one_of(c["condition_type"], path + ".condition_type", {"NEVER", "ADJACENT_TO_BLOCK_TYPE", "DEPTH_REACHED"});
        const std::string t = c["condition_type"].is_string() ? c["condition_type"].get<std::string>() : "";
        if (t == "ADJACENT_TO_BLOCK_TYPE" && !c.contains("block_type")) add(path, "missing block_type");
        if (t == "DEPTH_REACHED" && !c.contains("depth")) add(path, "missing depth");
        if (c.contains("block_type")) span(c["block_type"], path + ".block_type");
        if (c.contains("depth")) span(c["depth"], path + ".depth");
    }

    void action(const nlohmann::json& a, const std::string& path) {
        if (!a.is_object()) {
            add(path, "must be an object");
            return;
        }
        keys(a, path, {"action_type", "location", "schematic", "reference_object", "stop_condition", "repeat", "dance_type"});
        if (!a.contains("action_type")) {
            add(path, "missing action_type");
        } else {
            one_of(a["action_type"], path + ".action_type",
                   {"MOVE", "BUILD", "DESTROY", "DIG", "FILL", "SPAWN", "DANCE", "UNDO", "LOOP", "STOP", "RESUME"});
            if (a["action_type"] == "LOOP") {
                if (!a.contains("stop_condition")) add(path, "missing stop_condition");
                if (!a.contains("repeat")) add(path, "missing repeat");
            }
        }
        if (a.contains("location")) location(a["location"], path + ".location");
        if (a.contains("schematic")) {
            if (!a["schematic"].is_object()) {
                add(path + ".schematic", "must be an object");
            } else {
                attributes(a["schematic"], path + ".schematic", {});
            }
        }
        if (a.contains("reference_object")) reference_object(a["reference_object"], path + ".reference_object");
        if (a.contains("stop_condition")) stop_condition(a["stop_condition"], path + ".stop_condition");
        if (a.contains("repeat")) {
            action(a["repeat"], path + ".repeat");
            if (a["repeat"].is_object() && a["repeat"].value("action_type", "") == "LOOP") add(path + ".repeat", "nested LOOP");
        }
        if (a.contains("dance_type")) {
            const auto& d = a["dance_type"];
            if (!d.is_object()) {
                add(path + ".dance_type", "must be an object");
            } else {
                keys(d, path + ".dance_type", {"dance_type_name"});
                if (!d.contains("dance_type_name")) {
                    add(path + ".dance_type", "missing dance_type_name");
                } else {
                    span(d["dance_type_name"], path + ".dance_type.dance_type_name");
                }
            }
        }
    }

    const std::vector<std::size_t>* counts_;
};

}  // namespace

std::vector<std::string> validate(const ActionDict& d, const std::vector<std::size_t>* token_counts) {
    Validator v(token_counts);
    v.root(d);
    return v.errors;
}

}  // namespace voxelbot
