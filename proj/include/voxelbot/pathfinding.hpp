#pragma once
// Grid path planning for a flying agent that may break through blocks and put them back.

#include <cstddef>
#include <optional>
#include <vector>

#include "voxelbot/world.hpp"

namespace voxelbot {

inline constexpr int kMoveCost = 1;
inline constexpr int kBreakCost = 4;
inline constexpr int kPlaceCost = 4;
inline constexpr std::size_t kDefaultNodeBudget = 200000;

enum class PlanActionKind : std::uint8_t { move, break_block, place_block };

struct PlanAction {
    PlanActionKind kind = PlanActionKind::move;
    Location loc;
    BlockId block;  // for place_block: the block to restore

    bool operator==(const PlanAction&) const = default;
};

struct Plan {
    std::vector<PlanAction> actions;
    int cost = 0;
    std::size_t expanded = 0;
};

[[nodiscard]] int action_cost(PlanActionKind k);
[[nodiscard]] int plan_cost(const std::vector<PlanAction>& actions);

// Cost of stepping into a voxel; nullopt when impassable. Air costs a move. With allow_modify, a
// solid voxel costs break + move, plus a place to restore it afterwards unless it is the goal.
// Bedrock is never broken.
[[nodiscard]] std::optional<int> enter_cost(const VoxelWorld& world, const Location& l, bool is_goal, bool allow_modify);

// A* over 6-connected voxels with the Manhattan heuristic. Returns nullopt when the goal is
// unreachable or the node budget runs out. start == goal yields an empty plan.
[[nodiscard]] std::optional<Plan> plan_path(const VoxelWorld& world, const Location& start, const Location& goal,
                                            bool allow_modify, std::size_t node_budget = kDefaultNodeBudget);

}  // namespace voxelbot
