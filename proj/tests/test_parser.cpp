#include <gtest/gtest.h>

#include <sstream>

#include "voxelbot/block_registry.hpp"
#include "voxelbot/parser.hpp"
#include "voxelbot/perception.hpp"
#include "voxelbot/tasks.hpp"

using namespace voxelbot;
using nlohmann::json;

namespace {

const Parser& builtin_parser() {
    static const Parser p(Grammar::builtin(), make_lexicons(Grammar::builtin(), BlockRegistry::builtin(), SizeLexicon{},
                                                            DanceRegistry::builtin()));
    return p;
}

const json kBlueHouse = json::parse(R"({
  "dialogue_type": "HUMAN_GIVE_COMMAND",
  "action": {"action_type": "MOVE",
             "location": {"location_type": "REFERENCE_OBJECT",
                          "reference_object": {"has_colour": [0, [3, 3]], "has_name": [0, [4, 4]]}}}})");

}  // namespace

TEST(Tokenize, Words) {
    EXPECT_EQ(tokenize("go to the blue house"), (Tokens{"go", "to", "the", "blue", "house"}));
}

TEST(Tokenize, Empty) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationSplits) {
    EXPECT_EQ(tokenize("build a 3 x 3 wall."), (Tokens{"build", "a", "3", "x", "3", "wall", "."}));
    EXPECT_EQ(tokenize("Go TO -5, 63"), (Tokens{"go", "to", "-5", ",", "63"}));
    EXPECT_EQ(tokenize("don't"), (Tokens{"don", "'", "t"}));
}

TEST(Parse, BlueHouse) {
    EXPECT_EQ(builtin_parser().parse({"go to the blue house"}), kBlueHouse);
}

TEST(Parse, NoMatchIsNoop) {
    EXPECT_EQ(builtin_parser().parse({"asdfgh"}), json({{"dialogue_type", "NOOP"}}));
}

TEST(Parse, LastSentenceIsParsed) {
    const auto d = builtin_parser().parse({"hello", "go to the blue house"});
    EXPECT_EQ(d["action"]["location"]["reference_object"]["has_name"], json::parse("[1, [4, 4]]"));
}

TEST(Parse, CoordinatesSpan) {
    const auto d = builtin_parser().parse({"go to 5 63 5"});
    EXPECT_EQ(d["action"]["action_type"], "MOVE");
    EXPECT_EQ(d["action"]["location"]["location_type"], "COORDINATES");
    EXPECT_EQ(d["action"]["location"]["coordinates"], json::parse("[0, [2, 4]]"));
}

TEST(Parse, PutAndGetMemory) {
    const auto put = builtin_parser().parse({"that brown thing is a shed"});
    EXPECT_EQ(put["dialogue_type"], "PUT_MEMORY");
    EXPECT_EQ(put["upsert"]["has_tag"], json::parse("[0, [5, 5]]"));
    const auto get = builtin_parser().parse({"what is that blue thing"});
    EXPECT_EQ(get["dialogue_type"], "GET_MEMORY");
}

TEST(Parse, ResultsValidate) {
    for (const char* s : {"go to the blue house", "build a small cube here", "destroy the cube", "undo", "stop",
                          "dig a hole", "how many cubes are there", "where is the shed"}) {
        const auto d = builtin_parser().parse({s});
        EXPECT_TRUE(validate(d).empty()) << s << " " << d.dump();
        EXPECT_NE(d["dialogue_type"], "NOOP") << s;
    }
}

TEST(Generate, ZeroPairs) {
    const auto& p = builtin_parser();
    EXPECT_TRUE(generate(p.grammar(), p.lexicons(), 1, 0).empty());
}

TEST(Generate, Deterministic) {
    const auto& p = builtin_parser();
    const auto a = generate(p.grammar(), p.lexicons(), 42, 50);
    const auto b = generate(p.grammar(), p.lexicons(), 42, 50);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].dialogue, b[i].dialogue);
        EXPECT_EQ(a[i].dict, b[i].dict);
    }
}

TEST(Generate, RoundTripSample) {
    const auto& p = builtin_parser();
    for (const auto& pair : generate(p.grammar(), p.lexicons(), 7, 500)) {
        EXPECT_EQ(p.parse(pair.dialogue), pair.dict) << pair.dialogue.back();
    }
}

TEST(Grammar, RejectsSkeletonWithoutSlot) {
    std::istringstream in("go to $name => {\"dialogue_type\": \"NOOP\"}\n");
    EXPECT_THROW(Grammar::parse(in), GrammarError);
}

TEST(Grammar, RejectsBadJson) {
    std::istringstream in("go => {nope\n");
    EXPECT_THROW(Grammar::parse(in), GrammarError);
}

TEST(Grammar, CustomGrammarParses) {
    std::istringstream in(
        "@words name: tree\n"
        "hug the $name => {\"dialogue_type\": \"HUMAN_GIVE_COMMAND\", \"action\": {\"action_type\": \"MOVE\", "
        "\"location\": {\"location_type\": \"REFERENCE_OBJECT\", \"reference_object\": {\"has_name\": \"$name\"}}}}\n");
    const Grammar g = Grammar::parse(in);
    const Parser p(g, make_lexicons(g, BlockRegistry::builtin(), SizeLexicon{}, DanceRegistry::builtin()));
    const auto d = p.parse({"hug the oak"});
    EXPECT_EQ(d["action"]["location"]["reference_object"]["has_name"], json::parse("[0, [2, 2]]"));
    const auto gen = generate(g, p.lexicons(), 1, 3);
    EXPECT_EQ(gen[0].dialogue.back(), "hug the tree");
}

TEST(ActionDict, BlueHouseValidates) { EXPECT_TRUE(validate(kBlueHouse).empty()); }

TEST(ActionDict, MissingAction) {
    const auto v = validate(json{{"dialogue_type", "HUMAN_GIVE_COMMAND"}});
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("missing action"), std::string::npos);
}

TEST(ActionDict, BackwardsSpan) {
    json d = kBlueHouse;
    d["action"]["location"]["reference_object"]["has_name"] = json::parse("[0, [4, 3]]");
    const auto v = validate(d);
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v[0].find("span end < start"), std::string::npos);
}

TEST(ActionDict, SpansCheckedAgainstTokens) {
    const std::vector<std::size_t> counts{4};
    EXPECT_FALSE(validate(kBlueHouse, &counts).empty());
    const std::vector<std::size_t> ok{5};
    EXPECT_TRUE(validate(kBlueHouse, &ok).empty());
}

TEST(ActionDict, SpanHelpers) {
    const auto s = Span::from_json(json::parse("[0, [3, 4]]"));
    ASSERT_TRUE(s);
    EXPECT_EQ(span_text(*s, {tokenize("go to the blue house")}), "blue house");
    EXPECT_FALSE(Span::from_json(json::parse("[0, 3]")));
    EXPECT_EQ(s->to_json(), json::parse("[0, [3, 4]]"));
}

TEST(ActionDict, UnknownAttributeKeyAccepted) {
    json d = kBlueHouse;
    d["action"]["location"]["reference_object"]["has_texture"] = json::parse("[0, [3, 3]]");
    EXPECT_TRUE(validate(d).empty());
}
