#pragma once
// Symbolic agent memory: typed memory objects and a single triple store.
//
// Every object, triples included, has a MemoryId and can be the subject or object of a triple.
// Chat and task-transition rows are append-only. Block objects and mobs may be erased; erasing
// cascades to every triple that mentions them.

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "voxelbot/world.hpp"

namespace voxelbot {

struct MemoryId {
    std::uint64_t value = 0;
    constexpr auto operator<=>(const MemoryId&) const = default;
};

enum class MemoryKind : std::uint8_t { block_object, mob, chat, task, triple };

[[nodiscard]] const char* to_string(MemoryKind k);

struct BlockObjectData {
    std::vector<Location> positions;  // sorted (y, z, x)
    Provenance provenance = Provenance::placed_by_player;
};

struct MobData {
    std::uint32_t mob_id = 0;
    MobKind kind = MobKind::cow;
    Vec3 position;
};

struct ChatData {
    std::string speaker;
    std::string text;
    std::uint64_t step = 0;
};

struct TaskTransition {
    std::string status;
    std::uint64_t step = 0;
    std::uint64_t order = 0;  // global transition sequence number
};

struct TaskData {
    std::string kind;
    std::optional<MemoryId> parent;
    std::vector<TaskTransition> history;
    std::vector<ChangeRecord> undo_log;
    bool undone = false;
};

using TripleValue = std::variant<MemoryId, std::string>;

struct TripleData {
    MemoryId subject;
    std::string predicate;
    TripleValue object;
};

struct MemoryObject {
    MemoryId id;
    MemoryKind kind = MemoryKind::block_object;
    std::variant<BlockObjectData, MobData, ChatData, TaskData, TripleData> payload;

    [[nodiscard]] const BlockObjectData* block_object() const { return std::get_if<BlockObjectData>(&payload); }
    [[nodiscard]] const MobData* mob() const { return std::get_if<MobData>(&payload); }
    [[nodiscard]] const ChatData* chat() const { return std::get_if<ChatData>(&payload); }
    [[nodiscard]] const TaskData* task() const { return std::get_if<TaskData>(&payload); }
    [[nodiscard]] const TripleData* triple() const { return std::get_if<TripleData>(&payload); }
};

class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Conjunctive filter term: the subject must have a triple (predicate, object).
struct TripleFilter {
    std::string predicate;
    TripleValue object;
};

class MemoryStore {
public:
    MemoryId insert_block_object(std::vector<Location> positions, Provenance provenance = Provenance::placed_by_player);
    MemoryId insert_mob(const MobData& mob);
    // Coalesces identical triples. Throws IntegrityError for unknown ids.
    MemoryId insert_triple(MemoryId subject, const std::string& predicate, const TripleValue& object);

    MemoryId record_chat(const std::string& speaker, const std::string& text, std::uint64_t step);
    MemoryId insert_task(const std::string& kind, std::optional<MemoryId> parent = std::nullopt);
    void record_task_transition(MemoryId task, const std::string& status, std::uint64_t step);
    void set_undo_log(MemoryId task, std::vector<ChangeRecord> log);
    void mark_undone(MemoryId task);

    void update_block_object(MemoryId id, std::vector<Location> positions);
    void update_mob(MemoryId id, const Vec3& position);
    void erase(MemoryId id);

    [[nodiscard]] const MemoryObject* find(MemoryId id) const;
    [[nodiscard]] bool contains(MemoryId id) const { return objects_.count(id) != 0; }
    [[nodiscard]] std::size_t size() const { return objects_.size(); }

    // Objects matching every filter, optionally restricted to a kind, ordered by id.
    [[nodiscard]] std::vector<const MemoryObject*> query(const std::vector<TripleFilter>& filters,
                                                         std::optional<MemoryKind> kind = std::nullopt) const;

    [[nodiscard]] std::vector<const MemoryObject*> triples_about(MemoryId subject) const;
    [[nodiscard]] std::vector<std::string> literal_values(MemoryId subject, const std::string& predicate) const;
    [[nodiscard]] std::optional<MemoryId> find_triple(MemoryId subject, const std::string& predicate,
                                                      const TripleValue& object) const;

    [[nodiscard]] std::vector<const MemoryObject*> chats_by(const std::string& speaker) const;
    [[nodiscard]] std::optional<MemoryId> mob_by_game_id(std::uint32_t mob_id) const;

    // Most recent root task (by transition order) that finished with a non-empty undo log and was not undone.
    [[nodiscard]] std::optional<MemoryId> last_undoable_task() const;

    void dump_jsonl(std::ostream& out) const;

private:
    MemoryId next_id() { return MemoryId{++last_id_}; }
    TaskData& task_mut(MemoryId id);
    void index_triple(const MemoryObject& obj);
    void unindex_triple(const MemoryObject& obj);

    std::uint64_t last_id_ = 0;
    std::uint64_t transition_seq_ = 0;
    std::map<MemoryId, MemoryObject> objects_;
    // (predicate, object) -> subjects; subject -> triple ids; (s, p, o) -> triple id
    std::map<std::pair<std::string, TripleValue>, std::set<MemoryId>> by_predicate_object_;
    std::map<MemoryId, std::set<MemoryId>> by_subject_;
    std::map<MemoryId, std::set<MemoryId>> by_object_id_;
    std::map<std::tuple<MemoryId, std::string, TripleValue>, MemoryId> triple_index_;
};

}  // namespace voxelbot
