#include "voxelbot/memory.hpp"

#include <algorithm>

#include <json.hpp>

namespace voxelbot {

const char* to_string(MemoryKind k) {
    switch (k) {
        case MemoryKind::block_object: return "BlockObject";
        case MemoryKind::mob: return "Mob";
        case MemoryKind::chat: return "Chat";
        case MemoryKind::task: return "Task";
        case MemoryKind::triple: return "Triple";
    }
    return "?";
}

MemoryId MemoryStore::insert_block_object(std::vector<Location> positions, Provenance provenance) {
    if (positions.empty()) throw IntegrityError("block object needs at least one position");
    std::sort(positions.begin(), positions.end(), YzxLess{});
    const MemoryId id = next_id();
    objects_.emplace(id, MemoryObject{id, MemoryKind::block_object, BlockObjectData{std::move(positions), provenance}});
    return id;
}

MemoryId MemoryStore::insert_mob(const MobData& mob) {
    const MemoryId id = next_id();
    objects_.emplace(id, MemoryObject{id, MemoryKind::mob, mob});
    return id;
}

MemoryId MemoryStore::insert_triple(MemoryId subject, const std::string& predicate, const TripleValue& object) {
    if (!contains(subject)) throw IntegrityError("triple subject " + std::to_string(subject.value) + " does not exist");
    if (const auto* oid = std::get_if<MemoryId>(&object); oid && !contains(*oid)) {
        throw IntegrityError("triple object " + std::to_string(oid->value) + " does not exist");
    }
    if (auto existing = find_triple(subject, predicate, object)) return *existing;
    const MemoryId id = next_id();
    auto [it, inserted] = objects_.emplace(id, MemoryObject{id, MemoryKind::triple, TripleData{subject, predicate, object}});
    index_triple(it->second);
    return id;
}

void MemoryStore::index_triple(const MemoryObject& obj) {
    const TripleData& t = *obj.triple();
    by_predicate_object_[{t.predicate, t.object}].insert(t.subject);
    by_subject_[t.subject].insert(obj.id);
    if (const auto* oid = std::get_if<MemoryId>(&t.object)) by_object_id_[*oid].insert(obj.id);
    triple_index_[{t.subject, t.predicate, t.object}] = obj.id;
}

void MemoryStore::unindex_triple(const MemoryObject& obj) {
    const TripleData& t = *obj.triple();
    if (auto it = by_predicate_object_.find({t.predicate, t.object}); it != by_predicate_object_.end()) {
        it->second.erase(t.subject);
        if (it->second.empty()) by_predicate_object_.erase(it);
    }
    if (auto it = by_subject_.find(t.subject); it != by_subject_.end()) {
        it->second.erase(obj.id);
        if (it->second.empty()) by_subject_.erase(it);
    }
    if (const auto* oid = std::get_if<MemoryId>(&t.object)) {
        if (auto it = by_object_id_.find(*oid); it != by_object_id_.end()) {
            it->second.erase(obj.id);
            if (it->second.empty()) by_object_id_.erase(it);
        }
    }
    triple_index_.erase({t.subject, t.predicate, t.object});
}

MemoryId MemoryStore::record_chat(const std::string& speaker, const std::string& text, std::uint64_t step) {
    const MemoryId id = next_id();
    objects_.emplace(id, MemoryObject{id, MemoryKind::chat, ChatData{speaker, text, step}});
    return id;
}

MemoryId MemoryStore::insert_task(const std::string& kind, std::optional<MemoryId> parent) {
    if (parent && !contains(*parent)) throw IntegrityError("parent task does not exist");
    const MemoryId id = next_id();
    objects_.emplace(id, MemoryObject{id, MemoryKind::task, TaskData{kind, parent, {}, {}, false}});
    return id;
}

TaskData& MemoryStore::task_mut(MemoryId id) {
    auto it = objects_.find(id);
    if (it == objects_.end() || it->second.kind != MemoryKind::task) throw IntegrityError("no task with that id");
    return std::get<TaskData>(it->second.payload);
}

void MemoryStore::record_task_transition(MemoryId task, const std::string& status, std::uint64_t step) {
    task_mut(task).history.push_back({status, step, ++transition_seq_});
}

void MemoryStore::set_undo_log(MemoryId task, std::vector<ChangeRecord> log) { task_mut(task).undo_log = std::move(log); }

void MemoryStore::mark_undone(MemoryId task) { task_mut(task).undone = true; }

void MemoryStore::update_block_object(MemoryId id, std::vector<Location> positions) {
    auto it = objects_.find(id);
    if (it == objects_.end() || it->second.kind != MemoryKind::block_object) throw IntegrityError("no block object with that id");
    if (positions.empty()) throw IntegrityError("block object needs at least one position");
    std::sort(positions.begin(), positions.end(), YzxLess{});
    std::get<BlockObjectData>(it->second.payload).positions = std::move(positions);
}

void MemoryStore::update_mob(MemoryId id, const Vec3& position) {
    auto it = objects_.find(id);
    if (it == objects_.end() || it->second.kind != MemoryKind::mob) throw IntegrityError("no mob with that id");
    std::get<MobData>(it->second.payload).position = position;
}

void MemoryStore::erase(MemoryId id) {
    auto it = objects_.find(id);
    if (it == objects_.end()) return;
    if (it->second.kind == MemoryKind::chat || it->second.kind == MemoryKind::task) {
        throw IntegrityError("chat and task history is append-only");
    }
    // Cascade: triples about or pointing at this object go first (recursively).
    std::set<MemoryId> dependents;
    if (auto s = by_subject_.find(id); s != by_subject_.end()) dependents.insert(s->second.begin(), s->second.end());
    if (auto o = by_object_id_.find(id); o != by_object_id_.end()) dependents.insert(o->second.begin(), o->second.end());
    for (MemoryId dep : dependents) erase(dep);
    it = objects_.find(id);
    if (it == objects_.end()) return;
    if (it->second.kind == MemoryKind::triple) unindex_triple(it->second);
    objects_.erase(it);
}

const MemoryObject* MemoryStore::find(MemoryId id) const {
    auto it = objects_.find(id);
    return it == objects_.end() ? nullptr : &it->second;
}

std::vector<const MemoryObject*> MemoryStore::query(const std::vector<TripleFilter>& filters,
                                                    std::optional<MemoryKind> kind) const {
    std::vector<const MemoryObject*> out;
    if (filters.empty()) {
        for (const auto& [id, obj] : objects_) {
            if (!kind || obj.kind == *kind) out.push_back(&obj);
        }
        return out;
    }
    // Intersect subject sets, smallest first.
    std::vector<const std::set<MemoryId>*> sets;
    for (const TripleFilter& f : filters) {
        auto it = by_predicate_object_.find({f.predicate, f.object});
        if (it == by_predicate_object_.end()) return out;
        sets.push_back(&it->second);
    }
    std::sort(sets.begin(), sets.end(), [](auto* a, auto* b) { return a->size() < b->size(); });
    for (MemoryId id : *sets.front()) {
        bool all = true;
        for (std::size_t i = 1; i < sets.size() && all; ++i) all = sets[i]->count(id) != 0;
        if (!all) continue;
        const MemoryObject* obj = find(id);
        if (obj && (!kind || obj->kind == *kind)) out.push_back(obj);
    }
    return out;
}

std::vector<const MemoryObject*> MemoryStore::triples_about(MemoryId subject) const {
    std::vector<const MemoryObject*> out;
    if (auto it = by_subject_.find(subject); it != by_subject_.end()) {
        for (MemoryId t : it->second) out.push_back(find(t));
    }
    return out;
}

std::vector<std::string> MemoryStore::literal_values(MemoryId subject, const std::string& predicate) const {
    std::vector<std::string> out;
    for (const MemoryObject* t : triples_about(subject)) {
        const TripleData& td = *t->triple();
        if (td.predicate != predicate) continue;
        if (const auto* s = std::get_if<std::string>(&td.object)) out.push_back(*s);
    }
    return out;
}

std::optional<MemoryId> MemoryStore::find_triple(MemoryId subject, const std::string& predicate,
                                                 const TripleValue& object) const {
    auto it = triple_index_.find({subject, predicate, object});
    if (it == triple_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<const MemoryObject*> MemoryStore::chats_by(const std::string& speaker) const {
    std::vector<const MemoryObject*> out;
    for (const auto& [id, obj] : objects_) {
        if (const ChatData* c = obj.chat(); c && c->speaker == speaker) out.push_back(&obj);
    }
    return out;
}

std::optional<MemoryId> MemoryStore::mob_by_game_id(std::uint32_t mob_id) const {
    for (const auto& [id, obj] : objects_) {
        if (const MobData* m = obj.mob(); m && m->mob_id == mob_id) return id;
    }
    return std::nullopt;
}

std::optional<MemoryId> MemoryStore::last_undoable_task() const {
    std::optional<MemoryId> best;
    std::uint64_t best_order = 0;
    for (const auto& [id, obj] : objects_) {
        const TaskData* t = obj.task();
        if (!t || t->parent || t->undone || t->undo_log.empty() || t->history.empty()) continue;
        const TaskTransition& last = t->history.back();
        if (last.status != "finished") continue;
        if (!best || last.order > best_order) {
            best = id;
            best_order = last.order;
        }
    }
    return best;
}

namespace {

nlohmann::json value_json(const TripleValue& v) {
    if (const auto* id = std::get_if<MemoryId>(&v)) return nlohmann::json{{"id", id->value}};
    return std::get<std::string>(v);
}

nlohmann::json loc_json(const Location& l) { return nlohmann::json::array({l.x, l.y, l.z}); }

}  // namespace

void MemoryStore::dump_jsonl(std::ostream& out) const {
    for (const auto& [id, obj] : objects_) {
        nlohmann::json row;
        row["id"] = id.value;
        row["kind"] = to_string(obj.kind);
        if (const auto* b = obj.block_object()) {
            row["positions"] = nlohmann::json::array();
            for (const Location& l : b->positions) row["positions"].push_back(loc_json(l));
            row["provenance"] = to_string(b->provenance);
        } else if (const auto* m = obj.mob()) {
            row["mob_id"] = m->mob_id;
            row["mob_kind"] = to_string(m->kind);
            row["position"] = {m->position.x, m->position.y, m->position.z};
        } else if (const auto* c = obj.chat()) {
            row["speaker"] = c->speaker;
            row["text"] = c->text;
            row["step"] = c->step;
        } else if (const auto* t = obj.task()) {
            row["task_kind"] = t->kind;
            if (t->parent) row["parent"] = t->parent->value;
            row["history"] = nlohmann::json::array();
            for (const TaskTransition& tr : t->history) row["history"].push_back({tr.status, tr.step});
            row["undo_log_size"] = t->undo_log.size();
            row["undone"] = t->undone;
        } else if (const auto* tr = obj.triple()) {
            row["subject"] = tr->subject.value;
            row["predicate"] = tr->predicate;
            row["object"] = value_json(tr->object);
        }
        out << row.dump() << '\n';
    }
}

}  // namespace voxelbot
