#include "voxelbot/tasks.hpp"

#include <algorithm>
#include <climits>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "voxelbot/defaults.hpp"

namespace voxelbot {

const char* to_string(TaskStatus s) {
    switch (s) {
        case TaskStatus::pending: return "pending";
        case TaskStatus::running: return "running";
        case TaskStatus::blocked_on_child: return "blocked_on_child";
        case TaskStatus::finished: return "finished";
        case TaskStatus::interrupted: return "interrupted";
    }
    return "pending";
}

ChangeRecord TaskContext::set_block(const Location& loc, BlockId block, Provenance source) {
    ChangeRecord r = world->set_block(loc, block, source, agent_id);
    if (actuator) actuator->set_block(loc, block, source);
    return r;
}

void TaskContext::move_to(const Location& to) {
    const Location d = to - agent;
    if (d.x > 0) look.yaw = 0;
    else if (d.z > 0) look.yaw = 90;
    else if (d.x < 0) look.yaw = 180;
    else if (d.z < 0) look.yaw = 270;
    agent = to;
    if (actuator) actuator->move(to, look);
}

// ---- Task / TaskStack ----

void Task::step(TaskContext& ctx) {
    if (done()) return;
    status_ = TaskStatus::running;
    do_step(ctx);
}

void Task::on_child_done(Task& child, TaskContext&) {
    if (child.status() == TaskStatus::interrupted) fail(child.error().empty() ? child.kind() + " failed" : child.error());
}

void TaskStack::register_task(Task& t, TaskContext& ctx) {
    if (!memory_) return;
    std::optional<MemoryId> parent;
    if (t.parent_) parent = t.parent_->memory_id_;
    t.memory_id_ = memory_->insert_task(t.kind(), parent);
    memory_->record_task_transition(*t.memory_id_, to_string(t.status_), ctx.step);
}

void TaskStack::transition(Task& t, TaskStatus s, TaskContext& ctx) {
    t.status_ = s;
    if (memory_ && t.memory_id_) memory_->record_task_transition(*t.memory_id_, to_string(s), ctx.step);
}

void TaskStack::push(std::unique_ptr<Task> task, TaskContext& ctx) {
    if (!task) throw std::invalid_argument("null task");
    register_task(*task, ctx);
    tasks_.push_back(std::move(task));
}

void TaskStack::pop_done(TaskContext& ctx, StepReport& report) {
    while (!tasks_.empty() && tasks_.back()->done()) {
        std::unique_ptr<Task> t = std::move(tasks_.back());
        tasks_.pop_back();
        if (t->parent_) {
            Task& p = *t->parent_;
            p.undo_log_.insert(p.undo_log_.end(), t->undo_log_.begin(), t->undo_log_.end());
            transition(p, TaskStatus::running, ctx);
            p.on_child_done(*t, ctx);
            if (p.done()) transition(p, p.status_, ctx);
        } else {
            if (memory_ && t->memory_id_ && t->undoable()) memory_->set_undo_log(*t->memory_id_, t->undo_log_);
            report.completed_roots.push_back(std::move(t));
        }
    }
}

StepReport TaskStack::step(TaskContext& ctx) {
    StepReport report;
    pop_done(ctx, report);
    if (tasks_.empty()) return report;
    report.idle = false;
    Task& t = *tasks_.back();
    if (t.status_ != TaskStatus::running) transition(t, TaskStatus::running, ctx);
    t.do_step(ctx);
    if (t.done()) {
        transition(t, t.status_, ctx);
    } else if (t.pending_child_) {
        std::unique_ptr<Task> child = std::move(t.pending_child_);
        child->parent_ = &t;
        transition(t, TaskStatus::blocked_on_child, ctx);
        push(std::move(child), ctx);
    }
    pop_done(ctx, report);
    return report;
}

std::size_t TaskStack::stop(TaskContext& ctx) {
    std::size_t roots = 0;
    for (auto& t : tasks_) {
        if (!t->parent_) ++roots;
        transition(*t, TaskStatus::interrupted, ctx);
    }
    if (!tasks_.empty()) stopped_ = std::move(tasks_);
    tasks_.clear();
    return roots;
}

std::size_t TaskStack::resume(TaskContext& ctx) {
    if (stopped_.empty()) return 0;
    const std::size_t n = stopped_.size();
    for (std::size_t i = 0; i < n; ++i) {
        Task& t = *stopped_[i];
        const bool has_child = i + 1 < n && stopped_[i + 1]->parent_ == &t;
        transition(t, has_child ? TaskStatus::blocked_on_child : TaskStatus::running, ctx);
    }
    stopped_.insert(stopped_.end(), std::make_move_iterator(tasks_.begin()), std::make_move_iterator(tasks_.end()));
    tasks_ = std::move(stopped_);
    stopped_.clear();
    return n;
}

std::vector<const Task*> TaskStack::tasks() const {
    std::vector<const Task*> out;
    for (const auto& t : tasks_) out.push_back(t.get());
    return out;
}

// ---- Move ----

void MoveTask::do_step(TaskContext& ctx) {
    const VoxelWorld& world = *ctx.world;
    if (!resolved_) {
        resolved_ = true;
        if (!world.contains(target_)) {
            fail("target is outside the world");
            return;
        }
        while (world.contains(target_) && !world.get_block(target_).is_air()) target_.y += 1;
        if (!world.contains(target_)) {
            fail("no free space at the target");
            return;
        }
    }
    for (;;) {
        if (ctx.agent == target_ && cursor_ >= plan_.size()) {
            finish();
            return;
        }
        if (cursor_ >= plan_.size()) {
            auto plan = plan_path(world, ctx.agent, target_, allow_modify_);
            if (!plan) {
                fail("cannot reach the target");
                return;
            }
            plan_ = std::move(plan->actions);
            cursor_ = 0;
            if (plan_.empty()) continue;
        }
        const PlanAction a = plan_[cursor_];
        switch (a.kind) {
            case PlanActionKind::move:
                if (manhattan(a.loc, ctx.agent) != 1 || !world.get_block(a.loc).is_air()) {
                    // The world changed under the plan.
                    if (++replans_ > 16) {
                        fail("path keeps changing");
                        return;
                    }
                    cursor_ = plan_.size();
                    continue;
                }
                ctx.move_to(a.loc);
                ++cursor_;
                return;
            case PlanActionKind::break_block: {
                const BlockId b = world.get_block(a.loc);
                ++cursor_;
                if (b.is_air()) continue;
                if (b.id == kBedrock.id) {
                    cursor_ = plan_.size();
                    continue;
                }
                record(ctx.set_block(a.loc, kAir));
                return;
            }
            case PlanActionKind::place_block: {
                ++cursor_;
                if (!world.get_block(a.loc).is_air()) continue;
                // Restore the block and provenance it had when broken.
                Provenance source = Provenance::natural;
                BlockId block = a.block;
                for (auto it = undo_log().rbegin(); it != undo_log().rend(); ++it) {
                    if (it->loc == a.loc && it->new_block.is_air()) {
                        source = it->old_source;
                        block = it->old_block;
                        break;
                    }
                }
                record(ctx.set_block(a.loc, block, source));
                return;
            }
        }
    }
}

// ---- BlockTask ----

std::optional<Location> BlockTask::standing_spot(const TaskContext& ctx, const Location& target) const {
    std::set<Location> remaining;
    for (std::size_t i = cursor_; i < ops_.size(); ++i) remaining.insert(ops_[i].loc);
    std::optional<Location> best;
    int best_d = INT_MAX;
    const int r = kReach - 1;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dz = -r; dz <= r; ++dz) {
            for (int dx = -r; dx <= r; ++dx) {
                const Location c = target + Location{dx, dy, dz};
                if (!ctx.world->contains(c) || !ctx.world->get_block(c).is_air() || remaining.count(c)) continue;
                const int d = manhattan(c, ctx.agent);
                if (d < best_d || (d == best_d && YzxLess{}(c, *best))) {
                    best = c;
                    best_d = d;
                }
            }
        }
    }
    return best;
}

void BlockTask::do_step(TaskContext& ctx) {
    if (!prepared_) {
        prepared_ = true;
        if (!prepare(ctx, ops_)) return;
    }
    while (cursor_ < ops_.size() && skip(ops_[cursor_], ctx)) ++cursor_;
    if (cursor_ >= ops_.size() || halted(ctx)) {
        after_finish(ctx);
        finish();
        return;
    }
    const Op op = ops_[cursor_];
    if (chebyshev(ctx.agent, op.loc) > kReach) {
        if (moved_for_ == cursor_) {
            fail("cannot get within reach");
            return;
        }
        moved_for_ = cursor_;
        auto spot = standing_spot(ctx, op.loc);
        if (!spot) {
            fail("no place to stand");
            return;
        }
        push_child(std::make_unique<MoveTask>(*spot));
        return;
    }
    record(ctx.set_block(op.loc, op.block, op.source));
    ++cursor_;
    while (cursor_ < ops_.size() && skip(ops_[cursor_], ctx)) ++cursor_;
    if (cursor_ >= ops_.size()) {
        after_finish(ctx);
        finish();
    }
}

BuildTask::BuildTask(Schematic schematic, Location origin, std::string label)
    : BlockTask("build"), schematic_(std::move(schematic)), origin_(origin), label_(std::move(label)) {}

bool BuildTask::prepare(TaskContext& ctx, std::vector<Op>& ops) {
    for (const auto& [off, b] : schematic_.blocks()) {
        if (!ctx.world->contains(origin_ + off)) {
            fail("the structure would not fit in the world");
            return false;
        }
        ops.push_back({origin_ + off, b, Provenance::placed_by_agent});
    }
    return true;
}

bool DestroyTask::prepare(TaskContext& ctx, std::vector<Op>& ops) {
    std::vector<Location> order = positions_;
    std::sort(order.begin(), order.end(), [](const Location& a, const Location& b) {
        if (a.y != b.y) return a.y > b.y;
        return YzxLess{}(a, b);
    });
    for (const Location& l : order) {
        if (ctx.world->contains(l)) ops.push_back({l, kAir, Provenance::placed_by_agent});
    }
    return true;
}

bool DestroyTask::skip(const Op& op, const TaskContext& ctx) const {
    const BlockId b = ctx.world->get_block(op.loc);
    return b.is_air() || b.id == kBedrock.id;
}

// ---- Dig / stop conditions ----

LoopAnchor make_anchor(const VoxelWorld& world, const Location& anchor) {
    return {anchor, world.top_solid_at_or_below(anchor.x, anchor.z, anchor.y).value_or(-1)};
}

bool StopCondition::evaluate(const VoxelWorld& world, const LoopAnchor& a) const {
    switch (kind) {
        case Kind::never: return false;
        case Kind::block_type_hit: {
            const auto top = world.top_solid_at_or_below(a.anchor.x, a.anchor.z, a.anchor.y);
            return top && world.get_block({a.anchor.x, *top, a.anchor.z}) == block;
        }
        case Kind::depth_reached: {
            const auto top = world.top_solid_at_or_below(a.anchor.x, a.anchor.z, a.anchor.y);
            if (!top) return true;
            return a.start_top - *top >= depth;
        }
    }
    return false;
}

DigTask::DigTask(Location at, int width, int length, int depth)
    : BlockTask("dig"), at_(at), width_(std::max(1, width)), length_(std::max(1, length)), depth_(std::max(1, depth)) {}

bool DigTask::prepare(TaskContext& ctx, std::vector<Op>& ops) {
    const VoxelWorld& w = *ctx.world;
    if (!w.contains({at_.x, 0, at_.z})) {
        fail("dig location is outside the world");
        return false;
    }
    const auto top = w.top_solid_at_or_below(at_.x, at_.z, at_.y);
    if (!top) return true;
    for (int y = *top; y > *top - depth_; --y) {
        for (int z = at_.z; z < at_.z + length_; ++z) {
            for (int x = at_.x; x < at_.x + width_; ++x) {
                if (w.contains({x, y, z})) ops.push_back({{x, y, z}, kAir, Provenance::placed_by_agent});
            }
        }
    }
    return true;
}

bool DigTask::skip(const Op& op, const TaskContext& ctx) const {
    const BlockId b = ctx.world->get_block(op.loc);
    return b.is_air() || b.id == kBedrock.id;
}

bool DigTask::halted(const TaskContext& ctx) const { return halt_ && halt_->first.evaluate(*ctx.world, halt_->second); }

// ---- Fill ----

std::optional<FillPlan> plan_fill(const VoxelWorld& world, const Location& at, int radius) {
    const Bounds& b = world.bounds();
    const int probe = at.y + 16;
    auto surface = [&](int x, int z) -> int {
        if (x < 0 || z < 0 || x >= b.size_x || z >= b.size_z) return INT_MIN;
        return world.top_solid_at_or_below(x, z, probe).value_or(-1);
    };
    static constexpr int kDirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

    // A column is in a hole when it sits below the most common neighbour height.
    // Ties go to the higher height so the inside of a wide pit still counts.
    auto level_for = [&](int x, int z) -> std::optional<int> {
        const int s = surface(x, z);
        std::map<int, int> counts;
        for (const auto& d : kDirs) {
            const int n = surface(x + d[0], z + d[1]);
            if (n != INT_MIN) ++counts[n];
        }
        if (counts.empty()) return std::nullopt;
        auto best = counts.begin();
        for (auto it = counts.begin(); it != counts.end(); ++it) {
            if (it->second >= best->second) best = it;
        }
        if (best->first <= s) return std::nullopt;
        return best->first;
    };

    // Nearest pit column.
    std::vector<std::pair<int, int>> columns;
    for (int dz = -radius; dz <= radius; ++dz) {
        for (int dx = -radius; dx <= radius; ++dx) columns.emplace_back(dx, dz);
    }
    std::stable_sort(columns.begin(), columns.end(), [](const auto& a, const auto& c) {
        return std::abs(a.first) + std::abs(a.second) < std::abs(c.first) + std::abs(c.second);
    });
    std::optional<std::pair<int, int>> start;
    int level = 0;
    for (const auto& [dx, dz] : columns) {
        const int x = at.x + dx;
        const int z = at.z + dz;
        if (surface(x, z) == INT_MIN) continue;
        if (auto l = level_for(x, z)) {
            start = {x, z};
            level = *l;
            break;
        }
    }
    if (!start) return std::nullopt;
    level = std::min(level, b.size_y - 1);

    std::set<std::pair<int, int>> hole{*start};
    std::deque<std::pair<int, int>> queue{*start};
    while (!queue.empty()) {
        const auto [x, z] = queue.front();
        queue.pop_front();
        for (const auto& d : kDirs) {
            const std::pair<int, int> n{x + d[0], z + d[1]};
            if (std::abs(n.first - start->first) > radius || std::abs(n.second - start->second) > radius) continue;
            if (hole.count(n)) continue;
            const int s = surface(n.first, n.second);
            if (s == INT_MIN || s >= level) continue;
            hole.insert(n);
            queue.push_back(n);
        }
    }

    FillPlan plan;
    plan.level = level;
    std::set<Location> fill;
    for (const auto& [x, z] : hole) {
        for (int y = surface(x, z) + 1; y <= level; ++y) {
            if (world.get_block({x, y, z}).is_air()) fill.insert({x, y, z});
        }
    }
    if (fill.empty()) return std::nullopt;
    std::map<BlockId, int> counts;
    for (const Location& v : fill) {
        for (const Location& off : kFaceOffsets) {
            const Location n = v + off;
            if (!world.contains(n) || fill.count(n)) continue;
            const BlockId nb = world.get_block(n);
            if (!nb.is_air()) ++counts[nb];
        }
    }
    plan.material = BlockId{3, 0};
    int best = 0;
    for (const auto& [blk, n] : counts) {
        if (n > best) {
            best = n;
            plan.material = blk;
        }
    }
    plan.voxels.assign(fill.begin(), fill.end());
    std::sort(plan.voxels.begin(), plan.voxels.end(), YzxLess{});
    return plan;
}

bool FillTask::prepare(TaskContext& ctx, std::vector<Op>& ops) {
    auto plan = plan_fill(*ctx.world, at_);
    if (!plan) {
        fail("I don't see a hole to fill");
        return false;
    }
    for (const Location& v : plan->voxels) ops.push_back({v, plan->material, Provenance::placed_by_agent});
    return true;
}

// ---- Undo ----

bool UndoTask::prepare(TaskContext& ctx, std::vector<Op>& ops) {
    if (!ctx.memory) {
        fail("nothing to undo");
        return false;
    }
    if (!target_) target_ = ctx.memory->last_undoable_task();
    const MemoryObject* obj = target_ ? ctx.memory->find(*target_) : nullptr;
    const TaskData* task = obj ? obj->task() : nullptr;
    if (!task || task->undone || task->undo_log.empty()) {
        fail("nothing to undo");
        return false;
    }
    for (auto it = task->undo_log.rbegin(); it != task->undo_log.rend(); ++it) {
        ops.push_back({it->loc, it->old_block, it->old_source});
    }
    return true;
}

void UndoTask::after_finish(TaskContext& ctx) {
    if (ctx.memory && target_) ctx.memory->mark_undone(*target_);
}

// ---- Spawn / Dance / Loop ----

void SpawnTask::do_step(TaskContext& ctx) {
    const VoxelWorld& w = *ctx.world;
    if (!w.contains({at_.x, 0, at_.z})) {
        fail("spawn location is outside the world");
        return;
    }
    Location loc = at_;
    loc.y = w.top_solid_at_or_below(at_.x, at_.z, std::min(at_.y, w.bounds().size_y - 1)).value_or(-1) + 1;
    if (!w.contains(loc)) {
        fail("no room to spawn");
        return;
    }
    if (ctx.actuator) ctx.actuator->spawn_mob(mob_, loc);
    finish();
}

void DanceTask::do_step(TaskContext& ctx) {
    if (cursor_ < moves_.size()) {
        const Location next = ctx.agent + moves_[cursor_++];
        if (ctx.world->contains(next) && ctx.world->get_block(next).is_air()) ctx.move_to(next);
    }
    if (cursor_ >= moves_.size()) finish();
}

void LoopTask::do_step(TaskContext& ctx) {
    if (!anchor_) anchor_ = make_anchor(*ctx.world, anchor_loc_);
    if (condition_.evaluate(*ctx.world, *anchor_)) {
        finish();
        return;
    }
    if (iterations_ >= cap_) {
        fail("stopped after " + std::to_string(cap_) + " repetitions");
        return;
    }
    ++iterations_;
    push_child(body_(condition_, *anchor_));
}

void LoopTask::on_child_done(Task& child, TaskContext& ctx) {
    if (child.status() == TaskStatus::interrupted) {
        fail(child.error());
        return;
    }
    if (child.kind() == "dig" && child.undo_log().empty()) {
        // Nothing left to dig: stop rather than spin until the cap.
        if (condition_.evaluate(*ctx.world, *anchor_)) {
            finish();
        } else {
            fail("there is nothing left to dig");
        }
    }
}

// ---- Dance registry ----

DanceRegistry DanceRegistry::parse(std::istream& in) {
    DanceRegistry reg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto colon = line.find(':');
        auto bad = [&](const std::string& why) {
            return std::runtime_error("dance registry line " + std::to_string(line_no) + ": " + why);
        };
        if (colon == std::string::npos) throw bad("expected 'name: dx,dy,dz ...'");
        std::string name = line.substr(0, colon);
        name.erase(0, name.find_first_not_of(" \t"));
        name.erase(name.find_last_not_of(" \t") + 1);
        if (name.empty()) throw bad("empty name");
        std::istringstream steps(line.substr(colon + 1));
        std::vector<Location> moves;
        std::string tok;
        while (steps >> tok) {
            Location m;
            char c1 = 0;
            char c2 = 0;
            std::istringstream ts(tok);
            if (!(ts >> m.x >> c1 >> m.y >> c2 >> m.z) || c1 != ',' || c2 != ',' || !ts.eof()) throw bad("bad step '" + tok + "'");
            if (std::abs(m.x) + std::abs(m.y) + std::abs(m.z) != 1) throw bad("steps must be unit moves");
            moves.push_back(m);
        }
        if (moves.empty()) throw bad("dance has no steps");
        if (!reg.dances_.count(name)) reg.order_.push_back(name);
        reg.dances_[name] = std::move(moves);
    }
    return reg;
}

DanceRegistry DanceRegistry::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dance registry " + path);
    return parse(in);
}

const DanceRegistry& DanceRegistry::builtin() {
    static const DanceRegistry reg = [] {
        std::istringstream in{std::string(defaults::dances_text())};
        return parse(in);
    }();
    return reg;
}

const std::vector<Location>* DanceRegistry::find(const std::string& name) const {
    auto it = dances_.find(name);
    return it == dances_.end() ? nullptr : &it->second;
}

std::vector<std::string> DanceRegistry::names() const { return order_; }

}  // namespace voxelbot
