#include "voxelbot/pathfinding.hpp"

#include <algorithm>
#include <queue>
#include <tuple>
#include <unordered_map>

namespace voxelbot {

namespace {

struct LocationHash {
    std::size_t operator()(const Location& l) const {
        std::size_t h = static_cast<std::uint32_t>(l.x);
        h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint32_t>(l.y);
        h = h * 0x9E3779B97F4A7C15ULL + static_cast<std::uint32_t>(l.z);
        return h ^ (h >> 29);
    }
};

struct Node {
    int g = 0;
    Location parent;
    bool has_parent = false;
    bool closed = false;
};

}  // namespace

int action_cost(PlanActionKind k) {
    switch (k) {
        case PlanActionKind::move: return kMoveCost;
        case PlanActionKind::break_block: return kBreakCost;
        case PlanActionKind::place_block: return kPlaceCost;
    }
    return 0;
}

int plan_cost(const std::vector<PlanAction>& actions) {
    int c = 0;
    for (const PlanAction& a : actions) c += action_cost(a.kind);
    return c;
}

std::optional<int> enter_cost(const VoxelWorld& world, const Location& l, bool is_goal, bool allow_modify) {
    if (!world.contains(l)) return std::nullopt;
    const BlockId b = world.get_block(l);
    if (b.is_air()) return kMoveCost;
    if (!allow_modify || b.id == kBedrock.id) return std::nullopt;
    return is_goal ? kBreakCost + kMoveCost : kBreakCost + kMoveCost + kPlaceCost;
}

std::optional<Plan> plan_path(const VoxelWorld& world, const Location& start, const Location& goal, bool allow_modify,
                              std::size_t node_budget) {
    if (!world.contains(start) || !world.contains(goal)) return std::nullopt;
    Plan plan;
    if (start == goal) return plan;

    std::unordered_map<Location, Node, LocationHash> nodes;
    // (f, h, insertion order, location); the order term keeps expansion deterministic.
    using Entry = std::tuple<int, int, std::uint64_t, Location>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t seq = 0;
    nodes[start] = Node{0, start, false, false};
    open.emplace(manhattan(start, goal), manhattan(start, goal), seq++, start);

    bool found = false;
    while (!open.empty()) {
        const auto [f, h, order, cur] = open.top();
        open.pop();
        Node& node = nodes[cur];
        if (node.closed) continue;
        node.closed = true;
        if (cur == goal) {
            found = true;
            break;
        }
        if (++plan.expanded > node_budget) return std::nullopt;
        const int g = node.g;
        for (const Location& off : kFaceOffsets) {
            const Location next = cur + off;
            const auto step = enter_cost(world, next, next == goal, allow_modify);
            if (!step) continue;
            const int ng = g + *step;
            auto [it, inserted] = nodes.try_emplace(next);
            if (!inserted && (it->second.closed || it->second.g <= ng)) continue;
            it->second.g = ng;
            it->second.parent = cur;
            it->second.has_parent = true;
            const int nh = manhattan(next, goal);
            open.emplace(ng + nh, nh, seq++, next);
        }
    }
    if (!found) return std::nullopt;

    std::vector<Location> path;
    for (Location at = goal; at != start; at = nodes[at].parent) path.push_back(at);
    std::reverse(path.begin(), path.end());

    std::optional<std::pair<Location, BlockId>> pending_restore;
    for (const Location& at : path) {
        const BlockId b = world.get_block(at);
        if (!b.is_air()) plan.actions.push_back({PlanActionKind::break_block, at, b});
        plan.actions.push_back({PlanActionKind::move, at, kAir});
        if (pending_restore) {
            plan.actions.push_back({PlanActionKind::place_block, pending_restore->first, pending_restore->second});
            pending_restore.reset();
        }
        if (!b.is_air() && at != goal) pending_restore = std::make_pair(at, b);
    }
    plan.cost = plan_cost(plan.actions);
    return plan;
}

}  // namespace voxelbot
