#pragma once
// Interruptible tasks executed from a LIFO stack, one bounded increment per step.

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voxelbot/memory.hpp"
#include "voxelbot/pathfinding.hpp"
#include "voxelbot/schematic.hpp"
#include "voxelbot/world.hpp"

namespace voxelbot {

enum class TaskStatus : std::uint8_t { pending, running, blocked_on_child, finished, interrupted };

[[nodiscard]] const char* to_string(TaskStatus s);

// Side effects leave the agent through this interface.
class Actuator {
public:
    virtual ~Actuator() = default;
    virtual void move(const Location& to, const Look& look) = 0;
    virtual void set_block(const Location& loc, BlockId block, Provenance source) = 0;
    virtual void spawn_mob(MobKind kind, const Location& loc) = 0;
};

class NullActuator : public Actuator {
public:
    void move(const Location&, const Look&) override {}
    void set_block(const Location&, BlockId, Provenance) override {}
    void spawn_mob(MobKind, const Location&) override {}
};

// Everything a task may read or change. The world is the agent's mirror; changes are applied to it
// immediately and forwarded to the actuator.
struct TaskContext {
    VoxelWorld* world = nullptr;
    Actuator* actuator = nullptr;
    MemoryStore* memory = nullptr;
    Location agent;
    Look look;
    std::uint32_t agent_id = 0;
    std::uint64_t step = 0;

    ChangeRecord set_block(const Location& loc, BlockId block, Provenance source = Provenance::placed_by_agent);
    void move_to(const Location& to);
};

inline constexpr int kReach = 4;
inline constexpr int kLoopIterationCap = 1000;

class Task {
public:
    explicit Task(std::string kind) : kind_(std::move(kind)) {}
    virtual ~Task() = default;
    Task(const Task&) = delete;
    Task& operator=(const Task&) = delete;

    [[nodiscard]] const std::string& kind() const { return kind_; }
    [[nodiscard]] TaskStatus status() const { return status_; }
    [[nodiscard]] bool done() const { return status_ == TaskStatus::finished || status_ == TaskStatus::interrupted; }
    [[nodiscard]] const std::vector<ChangeRecord>& undo_log() const { return undo_log_; }
    [[nodiscard]] const std::string& error() const { return error_; }
    [[nodiscard]] std::optional<MemoryId> memory_id() const { return memory_id_; }
    [[nodiscard]] const Task* parent() const { return parent_; }
    // Undo tasks are not themselves undo targets.
    [[nodiscard]] virtual bool undoable() const { return true; }

    // One bounded increment. No-op on a finished or interrupted task.
    void step(TaskContext& ctx);

protected:
    virtual void do_step(TaskContext& ctx) = 0;
    // Called after a child is popped. Default: a failed child fails this task.
    virtual void on_child_done(Task& child, TaskContext& ctx);

    void push_child(std::unique_ptr<Task> child) { pending_child_ = std::move(child); }
    void finish() { status_ = TaskStatus::finished; }
    void fail(std::string why) {
        error_ = std::move(why);
        status_ = TaskStatus::interrupted;
    }
    void record(const ChangeRecord& r) { undo_log_.push_back(r); }

private:
    friend class TaskStack;

    std::string kind_;
    TaskStatus status_ = TaskStatus::pending;
    std::vector<ChangeRecord> undo_log_;
    std::string error_;
    std::optional<MemoryId> memory_id_;
    Task* parent_ = nullptr;
    std::unique_ptr<Task> pending_child_;
};

struct StepReport {
    bool idle = true;
    std::vector<std::unique_ptr<Task>> completed_roots;  // finished or interrupted, in completion order
};

class TaskStack {
public:
    explicit TaskStack(MemoryStore* memory = nullptr) : memory_(memory) {}

    void push(std::unique_ptr<Task> task, TaskContext& ctx);
    // Advances only the top task, then pops every finished task off the top.
    StepReport step(TaskContext& ctx);

    // Interrupts the whole stack. The tasks are kept so resume() can restore them.
    std::size_t stop(TaskContext& ctx);
    std::size_t resume(TaskContext& ctx);
    [[nodiscard]] bool has_stopped() const { return !stopped_.empty(); }

    [[nodiscard]] bool empty() const { return tasks_.empty(); }
    [[nodiscard]] std::size_t size() const { return tasks_.size(); }
    [[nodiscard]] Task* top() { return tasks_.empty() ? nullptr : tasks_.back().get(); }
    [[nodiscard]] std::vector<const Task*> tasks() const;

private:
    void register_task(Task& t, TaskContext& ctx);
    void transition(Task& t, TaskStatus s, TaskContext& ctx);
    void pop_done(TaskContext& ctx, StepReport& report);

    MemoryStore* memory_;
    std::vector<std::unique_ptr<Task>> tasks_;
    std::vector<std::unique_ptr<Task>> stopped_;
};

class MoveTask : public Task {
public:
    explicit MoveTask(Location target, bool allow_modify = true)
        : Task("move"), target_(target), allow_modify_(allow_modify) {}
    [[nodiscard]] const Location& target() const { return target_; }

protected:
    void do_step(TaskContext& ctx) override;

private:
    Location target_;
    bool allow_modify_;
    bool resolved_ = false;
    std::vector<PlanAction> plan_;
    std::size_t cursor_ = 0;
    int replans_ = 0;
};

// A list of block writes executed one per step, moving into reach first when needed.
class BlockTask : public Task {
public:
    struct Op {
        Location loc;
        BlockId block;
        Provenance source = Provenance::placed_by_agent;
    };

    using Task::Task;
    [[nodiscard]] const std::vector<Op>& ops() const { return ops_; }

protected:
    void do_step(TaskContext& ctx) override;
    // Builds the op list on the first step. Returns false (after calling fail) to abort.
    virtual bool prepare(TaskContext& ctx, std::vector<Op>& ops) = 0;
    // Ops returning true are passed over without a write.
    [[nodiscard]] virtual bool skip(const Op&, const TaskContext&) const { return false; }
    // Checked before each op; true ends the task early.
    [[nodiscard]] virtual bool halted(const TaskContext&) const { return false; }
    virtual void after_finish(TaskContext&) {}

private:
    std::optional<Location> standing_spot(const TaskContext& ctx, const Location& target) const;

    bool prepared_ = false;
    std::vector<Op> ops_;
    std::size_t cursor_ = 0;
    std::optional<std::size_t> moved_for_;
};

class BuildTask : public BlockTask {
public:
    BuildTask(Schematic schematic, Location origin, std::string label = {});
    // Name given to the structure once built, e.g. "cube".
    [[nodiscard]] const std::string& label() const { return label_; }

protected:
    bool prepare(TaskContext& ctx, std::vector<Op>& ops) override;

private:
    Schematic schematic_;
    Location origin_;
    std::string label_;
};

class DestroyTask : public BlockTask {
public:
    explicit DestroyTask(std::vector<Location> positions, std::optional<MemoryId> object = std::nullopt)
        : BlockTask("destroy"), positions_(std::move(positions)), object_(object) {}

protected:
    bool prepare(TaskContext& ctx, std::vector<Op>& ops) override;
    [[nodiscard]] bool skip(const Op& op, const TaskContext& ctx) const override;

private:
    std::vector<Location> positions_;
    std::optional<MemoryId> object_;
};

struct LoopAnchor {
    Location anchor;
    std::int32_t start_top = 0;
};

struct StopCondition {
    enum class Kind : std::uint8_t { never, block_type_hit, depth_reached };
    Kind kind = Kind::never;
    BlockId block;
    int depth = 0;

    static StopCondition never() { return {}; }
    static StopCondition block_hit(BlockId b) { return {Kind::block_type_hit, b, 0}; }
    static StopCondition depth_reached(int n) { return {Kind::depth_reached, kAir, n}; }

    // block_type_hit: the top non-air voxel at or below the anchor is the block.
    // depth_reached: that voxel lies at least `depth` below the loop's starting top.
    [[nodiscard]] bool evaluate(const VoxelWorld& world, const LoopAnchor& a) const;
};

[[nodiscard]] LoopAnchor make_anchor(const VoxelWorld& world, const Location& anchor);

class DigTask : public BlockTask {
public:
    // Box of width (x) by length (z) by depth (y, downwards) whose top layer is the highest solid
    // voxel at or below `at`.
    DigTask(Location at, int width, int length, int depth);
    void halt_when(StopCondition c, LoopAnchor a) { halt_ = std::make_pair(c, a); }

protected:
    bool prepare(TaskContext& ctx, std::vector<Op>& ops) override;
    [[nodiscard]] bool skip(const Op& op, const TaskContext& ctx) const override;
    [[nodiscard]] bool halted(const TaskContext& ctx) const override;

private:
    Location at_;
    int width_;
    int length_;
    int depth_;
    std::optional<std::pair<StopCondition, LoopAnchor>> halt_;
};

struct FillPlan {
    std::vector<Location> voxels;  // (y, z, x) order
    BlockId material;
    std::int32_t level = 0;
};

inline constexpr int kFillRadius = 8;

// Finds the pit nearest `at` (a column lower than one of its neighbours) and the air voxels that
// bring its connected low columns up to the surrounding surface level.
[[nodiscard]] std::optional<FillPlan> plan_fill(const VoxelWorld& world, const Location& at, int radius = kFillRadius);

class FillTask : public BlockTask {
public:
    explicit FillTask(Location at) : BlockTask("fill"), at_(at) {}

protected:
    bool prepare(TaskContext& ctx, std::vector<Op>& ops) override;

private:
    Location at_;
};

class UndoTask : public BlockTask {
public:
    explicit UndoTask(std::optional<MemoryId> target = std::nullopt) : BlockTask("undo"), target_(target) {}
    [[nodiscard]] bool undoable() const override { return false; }
    [[nodiscard]] std::optional<MemoryId> target() const { return target_; }

protected:
    bool prepare(TaskContext& ctx, std::vector<Op>& ops) override;
    void after_finish(TaskContext& ctx) override;

private:
    std::optional<MemoryId> target_;
};

class SpawnTask : public Task {
public:
    SpawnTask(MobKind kind, Location at) : Task("spawn"), mob_(kind), at_(at) {}

protected:
    void do_step(TaskContext& ctx) override;

private:
    MobKind mob_;
    Location at_;
};

class DanceTask : public Task {
public:
    DanceTask(std::string name, std::vector<Location> moves) : Task("dance"), name_(std::move(name)), moves_(std::move(moves)) {}

protected:
    void do_step(TaskContext& ctx) override;

private:
    std::string name_;
    std::vector<Location> moves_;
    std::size_t cursor_ = 0;
};

class LoopTask : public Task {
public:
    using BodyFactory = std::function<std::unique_ptr<Task>(const StopCondition&, const LoopAnchor&)>;

    LoopTask(StopCondition condition, Location anchor, BodyFactory body, int cap = kLoopIterationCap)
        : Task("loop"), condition_(condition), anchor_loc_(anchor), body_(std::move(body)), cap_(cap) {}
    [[nodiscard]] int iterations() const { return iterations_; }

protected:
    void do_step(TaskContext& ctx) override;
    void on_child_done(Task& child, TaskContext& ctx) override;

private:
    StopCondition condition_;
    Location anchor_loc_;
    std::optional<LoopAnchor> anchor_;
    BodyFactory body_;
    int cap_;
    int iterations_ = 0;
};

// Named move sequences. Text format, one per line: "name: dx,dy,dz dx,dy,dz ...".
class DanceRegistry {
public:
    static DanceRegistry parse(std::istream& in);
    static DanceRegistry load(const std::string& path);
    static const DanceRegistry& builtin();

    [[nodiscard]] const std::vector<Location>* find(const std::string& name) const;
    [[nodiscard]] std::vector<std::string> names() const;
    [[nodiscard]] std::string default_name() const { return order_.empty() ? std::string{} : order_.front(); }

private:
    std::map<std::string, std::vector<Location>> dances_;
    std::vector<std::string> order_;
};

}  // namespace voxelbot
