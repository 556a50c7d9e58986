#pragma once
// Action dictionaries: JSON logical forms of a chat, with word-index spans into the input.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace voxelbot {

using ActionDict = nlohmann::json;

// [sentence_index, [start, end]], end inclusive.
struct Span {
    int sentence = 0;
    int start = 0;
    int end = 0;

    [[nodiscard]] nlohmann::json to_json() const;
    // nullopt unless the value has the exact span shape with non-negative integers.
    static std::optional<Span> from_json(const nlohmann::json& j);
    bool operator==(const Span&) const = default;
};

// Words covered by the span, joined by single spaces. Throws std::out_of_range for a bad span.
[[nodiscard]] std::string span_text(const Span& s, const std::vector<std::vector<std::string>>& tokens);

// Every schema violation, as "path: message". Empty means valid. When token counts are given,
// spans are also checked against them.
[[nodiscard]] std::vector<std::string> validate(const ActionDict& d,
                                                const std::vector<std::size_t>* token_counts = nullptr);

[[nodiscard]] ActionDict noop_dict();

}  // namespace voxelbot
