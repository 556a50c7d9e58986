#pragma once
// Independent reference implementations the tests compare against. Kept deliberately naive.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <tuple>
#include <vector>

#include "voxelbot/world.hpp"

namespace oracle {

using voxelbot::BlockId;
using voxelbot::Location;
using voxelbot::VoxelWorld;

inline const Location kSteps[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};

// Breadth-first search through air only. Number of moves, or nullopt.
inline std::optional<int> bfs_air(const VoxelWorld& w, const Location& start, const Location& goal) {
    if (start == goal) return 0;
    std::map<Location, int> dist{{start, 0}};
    std::queue<Location> q;
    q.push(start);
    while (!q.empty()) {
        const Location c = q.front();
        q.pop();
        for (const auto& s : kSteps) {
            const Location n = c + s;
            if (!w.contains(n) || dist.count(n) || !w.get_block(n).is_air()) continue;
            dist[n] = dist[c] + 1;
            if (n == goal) return dist[n];
            q.push(n);
        }
    }
    return std::nullopt;
}

// Uniform-cost search with the agent cost model written out longhand: air 1, bedrock never,
// other solids 1 + 4 (break) + 4 (put back) or 1 + 4 at the goal, and impassable without modification.
inline std::optional<int> ucs(const VoxelWorld& w, const Location& start, const Location& goal, bool allow_modify) {
    auto cost = [&](const Location& l) -> std::optional<int> {
        const BlockId b = w.get_block(l);
        if (b.is_air()) return 1;
        if (!allow_modify || b.id == 7) return std::nullopt;
        return l == goal ? 5 : 9;
    };
    using Item = std::pair<int, Location>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    std::map<Location, int> best{{start, 0}};
    open.push({0, start});
    while (!open.empty()) {
        auto [d, c] = open.top();
        open.pop();
        if (d != best[c]) continue;
        if (c == goal) return d;
        for (const auto& s : kSteps) {
            const Location n = c + s;
            if (!w.contains(n)) continue;
            const auto k = cost(n);
            if (!k) continue;
            auto it = best.find(n);
            if (it == best.end() || d + *k < it->second) {
                best[n] = d + *k;
                open.push({d + *k, n});
            }
        }
    }
    return std::nullopt;
}

// Union-find over every voxel in the world; two voxels join when both are members and face-adjacent.
inline std::set<std::vector<Location>> components(const VoxelWorld& w, const std::function<bool(const Location&)>& member) {
    const auto& b = w.bounds();
    const std::size_t n = b.volume();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t i) {
        while (parent[i] != i) {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        return i;
    };
    auto idx = [&](const Location& l) {
        return (static_cast<std::size_t>(l.x) * b.size_y + l.y) * b.size_z + l.z;
    };
    std::vector<Location> members;
    for (int x = 0; x < b.size_x; ++x) {
        for (int y = 0; y < b.size_y; ++y) {
            for (int z = 0; z < b.size_z; ++z) {
                const Location l{x, y, z};
                if (!member(l)) continue;
                members.push_back(l);
                for (const Location& s : {Location{-1, 0, 0}, Location{0, -1, 0}, Location{0, 0, -1}}) {
                    const Location m = l + s;
                    if (w.contains(m) && member(m)) parent[find(idx(l))] = find(idx(m));
                }
            }
        }
    }
    std::map<std::size_t, std::vector<Location>> groups;
    for (const auto& l : members) groups[find(idx(l))].push_back(l);
    std::set<std::vector<Location>> out;
    for (auto& [root, g] : groups) {
        std::sort(g.begin(), g.end());
        out.insert(g);
    }
    return out;
}

struct RayHit {
    bool hit = false;
    Location voxel;
    double distance = 0.0;
};

// Marches along the ray in fixed small steps and reports the first non-air voxel sampled.
inline RayHit march(const VoxelWorld& w, const voxelbot::Vec3& o, const voxelbot::Vec3& d, double max_range, double step) {
    for (double t = 0.0; t <= max_range; t += step) {
        const Location l{static_cast<int>(std::floor(o.x + d.x * t)), static_cast<int>(std::floor(o.y + d.y * t)),
                         static_cast<int>(std::floor(o.z + d.z * t))};
        if (!w.contains(l)) return {};
        if (!w.get_block(l).is_air()) return {true, l, t};
    }
    return {};
}

// Length of the ray's passage through a unit voxel (slab test), 0 when it misses.
inline double chord(const Location& v, const voxelbot::Vec3& o, const voxelbot::Vec3& d) {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    const double os[3] = {o.x, o.y, o.z};
    const double ds[3] = {d.x, d.y, d.z};
    const int vs[3] = {v.x, v.y, v.z};
    for (int a = 0; a < 3; ++a) {
        if (ds[a] == 0.0) {
            if (os[a] < vs[a] || os[a] >= vs[a] + 1) return 0.0;
            continue;
        }
        double t0 = (vs[a] - os[a]) / ds[a];
        double t1 = (vs[a] + 1 - os[a]) / ds[a];
        if (t0 > t1) std::swap(t0, t1);
        lo = std::max(lo, t0);
        hi = std::min(hi, t1);
    }
    lo = std::max(lo, 0.0);
    return hi > lo ? hi - lo : 0.0;
}

// Counts non-air voxels by scanning every cell.
inline std::size_t scan_non_air(const VoxelWorld& w) {
    std::size_t n = 0;
    const auto& b = w.bounds();
    for (int y = 0; y < b.size_y; ++y)
        for (int z = 0; z < b.size_z; ++z)
            for (int x = 0; x < b.size_x; ++x) n += !w.get_block({x, y, z}).is_air();
    return n;
}

}  // namespace oracle
