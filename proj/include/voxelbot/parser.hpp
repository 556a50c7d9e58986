#pragma once
// Template-grammar semantic parser and the matching pair generator.

#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "voxelbot/action_dictionary.hpp"

namespace voxelbot {

class BlockRegistry;
class DanceRegistry;
class SchematicLibrary;
class SizeLexicon;

using Tokens = std::vector<std::string>;

// Lowercases, splits on whitespace, and makes each punctuation character its own token.
// Word characters are letters, digits, '_' and non-ASCII bytes; '-' directly before a digit starts a number.
[[nodiscard]] Tokens tokenize(std::string_view text);
[[nodiscard]] std::vector<Tokens> tokenize(const std::vector<std::string>& dialogue);

enum class SlotKind : std::uint8_t { colour, size, block, mob, dance, schematic, number, coords, free };

[[nodiscard]] SlotKind slot_kind_for(const std::string& slot_name);
[[nodiscard]] int slot_width(SlotKind k);

// Word lists for closed slots plus the vocabulary used to fill free slots when generating.
struct Lexicons {
    std::set<std::string> colours;
    std::set<std::string> sizes;
    std::set<std::string> blocks;
    std::set<std::string> mobs;
    std::set<std::string> dances;
    std::set<std::string> schematics;
    // Words a free slot never accepts.
    std::set<std::string> reserved;
    // Generation vocabulary for free slots, keyed by slot name without trailing digits.
    std::map<std::string, std::vector<std::string>> free_words;

    [[nodiscard]] const std::set<std::string>* closed(SlotKind k) const;
    [[nodiscard]] bool accepts(SlotKind k, const std::string& token) const;
};

struct PatternToken {
    bool is_slot = false;
    std::string text;  // literal word or slot name
    SlotKind kind = SlotKind::free;
};

struct Template {
    std::vector<PatternToken> pattern;
    ActionDict skeleton;
    int line = 0;

    [[nodiscard]] int token_length() const;
};

class GrammarError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Grammar text: one template per line, `PATTERN => SKELETON_JSON`. Slot markers are `$name`; the
// skeleton mentions each pattern slot exactly once as the string "$name". Lines starting with
// `@words NAME:` list generation vocabulary for a slot kind. '#' starts a comment line.
class Grammar {
public:
    static Grammar parse(std::istream& in);
    static Grammar load(const std::string& path);
    static const Grammar& builtin();

    [[nodiscard]] const std::vector<Template>& templates() const { return templates_; }
    [[nodiscard]] const std::map<std::string, std::vector<std::string>>& words() const { return words_; }

private:
    std::vector<Template> templates_;  // priority order
    std::map<std::string, std::vector<std::string>> words_;
};

// Lexicons from the registries plus the grammar's word lists.
[[nodiscard]] Lexicons make_lexicons(const Grammar& grammar, const BlockRegistry& blocks, const SizeLexicon& sizes,
                                     const DanceRegistry& dances);

class Parser {
public:
    Parser(Grammar grammar, Lexicons lexicons);

    // Matches the last sentence of the dialogue. Never fails; no match yields NOOP.
    [[nodiscard]] ActionDict parse(const std::vector<std::string>& dialogue) const;
    [[nodiscard]] ActionDict parse_tokens(const std::vector<Tokens>& dialogue) const;

    [[nodiscard]] const Grammar& grammar() const { return grammar_; }
    [[nodiscard]] const Lexicons& lexicons() const { return lexicons_; }

private:
    Grammar grammar_;
    Lexicons lexicons_;
    std::vector<std::size_t> order_;  // template indices, longest first then file order
};

struct GeneratedPair {
    std::vector<std::string> dialogue;
    ActionDict dict;
};

// Deterministic under a fixed seed. Throws GrammarError for an empty grammar or a slot kind with
// no vocabulary.
[[nodiscard]] std::vector<GeneratedPair> generate(const Grammar& grammar, const Lexicons& lexicons, std::uint64_t seed,
                                                  std::size_t n);

}  // namespace voxelbot
