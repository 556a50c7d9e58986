#include "voxelbot/parser.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <sstream>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/defaults.hpp"
#include "voxelbot/perception.hpp"
#include "voxelbot/tasks.hpp"

namespace voxelbot {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool is_integer(const std::string& s) {
    std::size_t i = (!s.empty() && s[0] == '-') ? 1 : 0;
    if (i >= s.size() || s.size() - i > 9) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

bool is_trailing_punct(const std::string& t) { return t == "." || t == "!" || t == "?" || t == ","; }

std::string strip_digits(const std::string& s) {
    std::string out = s;
    while (!out.empty() && std::isdigit(static_cast<unsigned char>(out.back()))) out.pop_back();
    return out;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "the",  "to",    "of",    "is",   "are",  "that", "this", "it",     "there", "here",
        "me",   "you",  "i",    "my",    "your",  "and",  "or",   "in",   "on",   "at",     "by",    "with",
        "for",  "what", "where", "how",  "many",  "much", "do",   "be",   "thing", "things", "one",  "left",
        "right", "front", "behind", "back", "above", "below", "under", "over", "near", "next", "not", "no",
        "yes",  "please"};
    return words;
}

void substitute(nlohmann::json& node, const std::map<std::string, Span>& spans) {
    if (node.is_string()) {
        const std::string s = node.get<std::string>();
        if (!s.empty() && s[0] == '$') {
            if (auto it = spans.find(s.substr(1)); it != spans.end()) node = it->second.to_json();
        }
        return;
    }
    if (node.is_object() || node.is_array()) {
        for (auto& child : node) substitute(child, spans);
    }
}

void collect_slot_refs(const nlohmann::json& node, std::vector<std::string>& out) {
    if (node.is_string()) {
        const std::string s = node.get<std::string>();
        if (!s.empty() && s[0] == '$') out.push_back(s.substr(1));
        return;
    }
    if (node.is_object() || node.is_array()) {
        for (const auto& child : node) collect_slot_refs(child, out);
    }
}

}  // namespace

Tokens tokenize(std::string_view text) {
    Tokens out;
    std::string cur;
    auto flush = [&] {
        if (!cur.empty()) out.push_back(std::move(cur));
        cur.clear();
    };
    for (std::size_t i = 0; i < text.size(); ++i) {
        const auto c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c)) {
            flush();
        } else if (is_word_char(c)) {
            cur.push_back(static_cast<char>(c < 0x80 ? std::tolower(c) : c));
        } else if (c == '-' && cur.empty() && i + 1 < text.size() && std::isdigit(static_cast<unsigned char>(text[i + 1]))) {
            cur.push_back('-');
        } else {
            flush();
            out.emplace_back(1, static_cast<char>(c));
        }
    }
    flush();
    return out;
}

std::vector<Tokens> tokenize(const std::vector<std::string>& dialogue) {
    std::vector<Tokens> out;
    out.reserve(dialogue.size());
    for (const std::string& s : dialogue) out.push_back(tokenize(s));
    return out;
}

SlotKind slot_kind_for(const std::string& slot_name) {
    const std::string base = strip_digits(slot_name);
    if (base == "colour") return SlotKind::colour;
    if (base == "size") return SlotKind::size;
    if (base == "block") return SlotKind::block;
    if (base == "mob") return SlotKind::mob;
    if (base == "dance") return SlotKind::dance;
    if (base == "schematic") return SlotKind::schematic;
    if (base == "num") return SlotKind::number;
    if (base == "coords") return SlotKind::coords;
    return SlotKind::free;
}

int slot_width(SlotKind k) { return k == SlotKind::coords ? 3 : 1; }

const std::set<std::string>* Lexicons::closed(SlotKind k) const {
    switch (k) {
        case SlotKind::colour: return &colours;
        case SlotKind::size: return &sizes;
        case SlotKind::block: return &blocks;
        case SlotKind::mob: return &mobs;
        case SlotKind::dance: return &dances;
        case SlotKind::schematic: return &schematics;
        default: return nullptr;
    }
}

bool Lexicons::accepts(SlotKind k, const std::string& token) const {
    if (const auto* set = closed(k)) return set->count(token) != 0;
    if (k == SlotKind::number || k == SlotKind::coords) return is_integer(token);
    // free slot
    if (token.empty() || !is_word_char(static_cast<unsigned char>(token[0]))) return false;
    if (is_integer(token) || reserved.count(token) || colours.count(token) || sizes.count(token)) return false;
    return true;
}

int Template::token_length() const {
    int n = 0;
    for (const PatternToken& p : pattern) n += p.is_slot ? slot_width(p.kind) : 1;
    return n;
}

Grammar Grammar::parse(std::istream& in) {
    Grammar g;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto bad = [&](const std::string& why) {
            return GrammarError("grammar line " + std::to_string(line_no) + ": " + why);
        };
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        if (line.compare(first, 6, "@words") == 0) {
            const auto colon = line.find(':', first);
            if (colon == std::string::npos) throw bad("expected '@words NAME: word ...'");
            std::istringstream head(line.substr(first + 6, colon - first - 6));
            std::string name;
            if (!(head >> name)) throw bad("missing word list name");
            std::istringstream body(line.substr(colon + 1));
            std::string w;
            auto& list = g.words_[name];
            while (body >> w) list.push_back(w);
            continue;
        }
        const auto arrow = line.find("=>");
        if (arrow == std::string::npos) throw bad("expected 'PATTERN => SKELETON'");
        Template t;
        t.line = line_no;
        std::istringstream pat(line.substr(0, arrow));
        std::string word;
        std::set<std::string> slot_names;
        while (pat >> word) {
            PatternToken pt;
            if (word[0] == '$') {
                pt.is_slot = true;
                pt.text = word.substr(1);
                if (pt.text.empty()) throw bad("empty slot name");
                pt.kind = slot_kind_for(pt.text);
                if (!slot_names.insert(pt.text).second) throw bad("duplicate slot $" + pt.text);
            } else {
                const Tokens tk = tokenize(word);
                if (tk.size() != 1 || tk[0] != word) throw bad("literal '" + word + "' is not a single lowercase token");
                pt.text = word;
            }
            t.pattern.push_back(std::move(pt));
        }
        if (t.pattern.empty()) throw bad("empty pattern");
        try {
            t.skeleton = nlohmann::json::parse(line.substr(arrow + 2));
        } catch (const nlohmann::json::exception& e) {
            throw bad(std::string("bad skeleton JSON: ") + e.what());
        }
        std::vector<std::string> refs;
        collect_slot_refs(t.skeleton, refs);
        std::set<std::string> ref_set(refs.begin(), refs.end());
        if (ref_set.size() != refs.size()) throw bad("skeleton uses a slot more than once");
        if (ref_set != slot_names) throw bad("pattern slots and skeleton slots differ");
        // The skeleton must validate once slots are filled.
        std::map<std::string, Span> dummy;
        int pos = 0;
        for (const PatternToken& p : t.pattern) {
            const int w = p.is_slot ? slot_width(p.kind) : 1;
            if (p.is_slot) dummy[p.text] = Span{0, pos, pos + w - 1};
            pos += w;
        }
        nlohmann::json filled = t.skeleton;
        substitute(filled, dummy);
        const std::vector<std::size_t> counts{static_cast<std::size_t>(pos)};
        if (auto errs = validate(filled, &counts); !errs.empty()) throw bad("skeleton invalid: " + errs.front());
        g.templates_.push_back(std::move(t));
    }
    return g;
}

Grammar Grammar::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GrammarError("cannot open grammar " + path);
    return parse(in);
}

const Grammar& Grammar::builtin() {
    static const Grammar g = [] {
        std::istringstream in{std::string(defaults::grammar_text())};
        return parse(in);
    }();
    return g;
}

Lexicons make_lexicons(const Grammar& grammar, const BlockRegistry& blocks, const SizeLexicon& sizes,
                       const DanceRegistry& dances) {
    Lexicons lex;
    for (const std::string& c : blocks.colours()) lex.colours.insert(c);
    for (const std::string& n : blocks.names()) lex.blocks.insert(n);
    for (const std::string& w : sizes.words()) lex.sizes.insert(w);
    for (std::uint8_t k = 0; k < kMobKindCount; ++k) lex.mobs.insert(to_string(static_cast<MobKind>(k)));
    for (const std::string& d : dances.names()) lex.dances.insert(d);
    lex.reserved = stopwords();
    for (const Template& t : grammar.templates()) {
        for (const PatternToken& p : t.pattern) {
            if (!p.is_slot) lex.reserved.insert(p.text);
        }
    }
    for (const auto& [name, words] : grammar.words()) {
        if (name == "schematic") {
            lex.schematics.insert(words.begin(), words.end());
            continue;
        }
        for (const std::string& w : words) {
            if (!lex.accepts(SlotKind::free, w)) {
                throw GrammarError("generation word '" + w + "' for $" + name + " is not accepted by a free slot");
            }
        }
        lex.free_words[name] = words;
    }
    return lex;
}

Parser::Parser(Grammar grammar, Lexicons lexicons) : grammar_(std::move(grammar)), lexicons_(std::move(lexicons)) {
    order_.resize(grammar_.templates().size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::stable_sort(order_.begin(), order_.end(), [&](std::size_t a, std::size_t b) {
        return grammar_.templates()[a].token_length() > grammar_.templates()[b].token_length();
    });
}

ActionDict Parser::parse(const std::vector<std::string>& dialogue) const { return parse_tokens(tokenize(dialogue)); }

ActionDict Parser::parse_tokens(const std::vector<Tokens>& dialogue) const {
    if (dialogue.empty()) return noop_dict();
    const int sentence = static_cast<int>(dialogue.size()) - 1;
    const Tokens& all = dialogue.back();
    std::size_t n = all.size();
    while (n > 0 && is_trailing_punct(all[n - 1])) --n;
    if (n == 0) return noop_dict();
    for (std::size_t idx : order_) {
        const Template& t = grammar_.templates()[idx];
        if (static_cast<std::size_t>(t.token_length()) != n) continue;
        std::map<std::string, Span> spans;
        std::size_t pos = 0;
        bool ok = true;
        for (const PatternToken& p : t.pattern) {
            if (!p.is_slot) {
                ok = all[pos] == p.text;
                ++pos;
            } else {
                const int w = slot_width(p.kind);
                for (int k = 0; k < w && ok; ++k) ok = lexicons_.accepts(p.kind, all[pos + static_cast<std::size_t>(k)]);
                spans[p.text] = Span{sentence, static_cast<int>(pos), static_cast<int>(pos) + w - 1};
                pos += static_cast<std::size_t>(w);
            }
            if (!ok) break;
        }
        if (!ok) continue;
        ActionDict d = t.skeleton;
        substitute(d, spans);
        return d;
    }
    return noop_dict();
}

std::vector<GeneratedPair> generate(const Grammar& grammar, const Lexicons& lexicons, std::uint64_t seed, std::size_t n) {
    if (grammar.templates().empty()) throw GrammarError("cannot generate from an empty grammar");
    std::vector<GeneratedPair> out;
    if (n == 0) return out;
    std::mt19937_64 rng(seed);
    auto pick = [&](const std::vector<std::string>& v) -> const std::string& { return v[rng() % v.size()]; };
    std::map<SlotKind, std::vector<std::string>> closed;
    for (SlotKind k : {SlotKind::colour, SlotKind::size, SlotKind::block, SlotKind::mob, SlotKind::dance, SlotKind::schematic}) {
        const auto* set = lexicons.closed(k);
        closed[k].assign(set->begin(), set->end());
    }
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Template& t = grammar.templates()[rng() % grammar.templates().size()];
        std::vector<std::string> words;
        std::map<std::string, Span> spans;
        for (const PatternToken& p : t.pattern) {
            if (!p.is_slot) {
                words.push_back(p.text);
                continue;
            }
            const int start = static_cast<int>(words.size());
            switch (p.kind) {
                case SlotKind::number: words.push_back(std::to_string(1 + rng() % 10)); break;
                case SlotKind::coords:
                    words.push_back(std::to_string(static_cast<int>(rng() % 256)));
                    words.push_back(std::to_string(static_cast<int>(rng() % 128)));
                    words.push_back(std::to_string(static_cast<int>(rng() % 256)));
                    break;
                case SlotKind::free: {
                    auto it = lexicons.free_words.find(strip_digits(p.text));
                    if (it == lexicons.free_words.end()) it = lexicons.free_words.find("name");
                    if (it == lexicons.free_words.end() || it->second.empty()) {
                        throw GrammarError("no generation words for $" + p.text);
                    }
                    words.push_back(pick(it->second));
                    break;
                }
                default: {
                    const auto& v = closed[p.kind];
                    if (v.empty()) throw GrammarError("empty lexicon for $" + p.text);
                    words.push_back(pick(v));
                    break;
                }
            }
            spans[p.text] = Span{0, start, static_cast<int>(words.size()) - 1};
        }
        std::string text;
        for (const std::string& w : words) {
            if (!text.empty()) text += ' ';
            text += w;
        }
        ActionDict d = t.skeleton;
        substitute(d, spans);
        out.push_back({{text}, std::move(d)});
    }
    return out;
}

}  // namespace voxelbot
