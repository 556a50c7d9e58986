#pragma once
// Dialogue manager and dialogue stack: profanity filter, parse, route, multi-turn clarification.

#include <cstddef>
#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "voxelbot/action_dictionary.hpp"
#include "voxelbot/block_registry.hpp"
#include "voxelbot/memory.hpp"
#include "voxelbot/parser.hpp"
#include "voxelbot/perception.hpp"
#include "voxelbot/schematic.hpp"
#include "voxelbot/tasks.hpp"

namespace voxelbot {

class ProfanityFilter {
public:
    ProfanityFilter() = default;
    explicit ProfanityFilter(std::set<std::string> words) : words_(std::move(words)) {}
    // Newline-delimited words; blank lines and '#' comments ignored.
    static ProfanityFilter parse(std::istream& in);
    static ProfanityFilter load(const std::string& path);
    static const ProfanityFilter& builtin();

    // Token-exact match after tokenization.
    [[nodiscard]] bool is_profane(const std::string& text) const;
    [[nodiscard]] std::size_t size() const { return words_.size(); }

private:
    std::set<std::string> words_;
};

// Everything dialogue objects may consult or change.
struct DialogueEnv {
    MemoryStore* memory = nullptr;
    VoxelWorld* world = nullptr;
    TaskStack* tasks = nullptr;
    TaskContext* task_ctx = nullptr;
    const BlockRegistry* registry = nullptr;
    const SchematicLibrary* schematics = nullptr;
    const DanceRegistry* dances = nullptr;
    const SizeLexicon* sizes = nullptr;
    std::function<void(const std::string&)> say;
    // Called with the number of root tasks a STOP interrupted.
    std::function<void(std::size_t)> on_stop;
};

class DialogueManager;

struct Utterance {
    std::string speaker;
    std::string text;
    std::vector<Tokens> tokens;
};

class DialogueObject {
public:
    explicit DialogueObject(std::string kind) : kind_(std::move(kind)) {}
    virtual ~DialogueObject() = default;

    [[nodiscard]] const std::string& kind() const { return kind_; }
    [[nodiscard]] bool finished() const { return finished_; }
    // Waiting on a child object or on the next chat.
    [[nodiscard]] bool blocked() const { return blocked_; }

    // Runs until the object finishes, pushes a child, or blocks awaiting chat.
    virtual void step(DialogueManager& m) = 0;
    // Offered the next chat while on top. Returns true if consumed.
    virtual bool receive(DialogueManager&, const Utterance&) { return false; }

protected:
    void finish() {
        finished_ = true;
        blocked_ = false;
    }
    void set_blocked(bool b) { blocked_ = b; }

private:
    friend class DialogueManager;

    std::string kind_;
    bool finished_ = false;
    bool blocked_ = false;
};

class Say : public DialogueObject {
public:
    explicit Say(std::string text) : DialogueObject("Say"), text_(std::move(text)) {}
    void step(DialogueManager& m) override;
    [[nodiscard]] const std::string& text() const { return text_; }

private:
    std::string text_;
};

// Consumes exactly one chat.
class AwaitResponse : public DialogueObject {
public:
    explicit AwaitResponse(std::shared_ptr<std::optional<Utterance>> slot)
        : DialogueObject("AwaitResponse"), slot_(std::move(slot)) {}
    void step(DialogueManager& m) override;
    bool receive(DialogueManager& m, const Utterance& u) override;

private:
    std::shared_ptr<std::optional<Utterance>> slot_;
};

// Outcome of a clarification, read by the object that asked.
struct Clarification {
    bool done = false;
    std::optional<std::size_t> choice;  // index into the offered options
    bool cancelled = false;
};

// Asks the user to pick one of up to three options, then reads one reply. Accepts ordinals,
// numbers, yes (first option) and no/cancel/none. Any other reply cancels and is reparsed.
class ConfirmReferenceObject : public DialogueObject {
public:
    ConfirmReferenceObject(std::string question, std::vector<std::string> options,
                           std::shared_ptr<Clarification> result);
    void step(DialogueManager& m) override;

    [[nodiscard]] static std::optional<std::size_t> read_choice(const Tokens& reply, std::size_t n_options, bool& cancel);

private:
    std::string question_;
    std::vector<std::string> options_;
    std::shared_ptr<Clarification> result_;
    std::shared_ptr<std::optional<Utterance>> reply_;
    int stage_ = 0;
};

// Candidate referent with the data needed to rank and describe it.
struct Referent {
    MemoryId id;
    std::vector<Location> positions;
    Vec3 center;
};

class Interpreter : public DialogueObject {
public:
    Interpreter(ActionDict dict, Utterance chat) : DialogueObject("Interpreter"), dict_(std::move(dict)), chat_(std::move(chat)) {}
    void step(DialogueManager& m) override;

private:
    ActionDict dict_;
    Utterance chat_;
    std::shared_ptr<Clarification> pending_;
    std::vector<Referent> options_;
    std::vector<std::string> schematic_options_;
};

class GetMemoryHandler : public DialogueObject {
public:
    GetMemoryHandler(ActionDict dict, Utterance chat)
        : DialogueObject("GetMemoryHandler"), dict_(std::move(dict)), chat_(std::move(chat)) {}
    void step(DialogueManager& m) override;

private:
    ActionDict dict_;
    Utterance chat_;
};

class PutMemoryHandler : public DialogueObject {
public:
    PutMemoryHandler(ActionDict dict, Utterance chat)
        : DialogueObject("PutMemoryHandler"), dict_(std::move(dict)), chat_(std::move(chat)) {}
    void step(DialogueManager& m) override;

private:
    ActionDict dict_;
    Utterance chat_;
    std::shared_ptr<Clarification> pending_;
    std::vector<Referent> options_;
};

class DialogueManager {
public:
    DialogueManager(DialogueEnv env, const Parser& parser, ProfanityFilter profanity);

    // Profanity check, parse, route, then run the stack until it blocks or empties.
    void handle_chat(const std::string& speaker, const std::string& text);

    void push(std::unique_ptr<DialogueObject> obj);
    [[nodiscard]] std::vector<const DialogueObject*> stack() const;
    [[nodiscard]] bool empty() const { return stack_.empty(); }

    [[nodiscard]] std::size_t parse_calls() const { return parse_calls_; }
    [[nodiscard]] const DialogueEnv& env() const { return env_; }
    [[nodiscard]] DialogueEnv& env() { return env_; }
    [[nodiscard]] const Parser& parser() const { return parser_; }

    void say(const std::string& text);
    // Set by a clarification that gave up on a reply; the reply is then parsed as a new command.
    void request_reparse() { reparse_ = true; }

    // Reference resolution shared by the handlers. Candidates come back best first.
    [[nodiscard]] std::vector<Referent> resolve_reference(const nlohmann::json& ref, const Utterance& chat) const;
    [[nodiscard]] std::optional<Location> resolve_location(const nlohmann::json& loc, const Utterance& chat,
                                                           std::string& error) const;
    [[nodiscard]] std::string describe(const Referent& r) const;
    [[nodiscard]] const PlayerRecord* speaker_record(const std::string& name) const;

private:
    void run();
    void route(const ActionDict& dict, const Utterance& u);

    DialogueEnv env_;
    const Parser& parser_;
    ProfanityFilter profanity_;
    std::vector<std::unique_ptr<DialogueObject>> stack_;
    std::size_t parse_calls_ = 0;
    bool reparse_ = false;
};

// Singular form used when comparing names and tags ("houses" -> "house").
[[nodiscard]] std::string normalize_noun(const std::string& word);

// Edge length for a size adjective when building or digging.
[[nodiscard]] int size_word_extent(const std::string& word);

}  // namespace voxelbot
