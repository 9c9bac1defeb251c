#ifndef BINSTRETCH_DAG_HPP
#define BINSTRETCH_DAG_HPP

#include <map>
#include <tuple>

#include "binstretch/game.hpp"
#include "binstretch/strategy_tree.hpp"

// Strategy trees deduplicated into DAGs: many tree nodes share the same list
// of items and loads, so identical-key subtrees are merged. Last-layer
// compression additionally folds forced runs of identical final items into
// single nodes carrying the whole upcoming list.

namespace binstretch {

struct DagNode {
    std::vector<int> loads;
    std::map<int, int> items;  // derived multiset, size -> count
    std::optional<int> last_item;  // construction-time identity only
    std::vector<int> next_items;   // length > 1 = compressed node
    std::optional<PackingCertificate> packing;
    std::vector<int> children;  // indices, one per distinct canonical successor
    std::string name;           // serialization name; assigned on emit if empty

    bool compressed() const { return next_items.size() > 1; }

    long long volume() const {
        long long v = 0;
        for (auto [size, cnt] : items)
            v += static_cast<long long>(size) * cnt;
        return v;
    }
};

struct StrategyDag {
    std::vector<DagNode> nodes;
    int root = -1;

    size_t edge_count() const {
        size_t n = 0;
        for (const auto& u : nodes)
            n += u.children.size();
        return n;
    }

    // Equality over structure; names are serialization detail.
    bool equivalent(const StrategyDag& other) const {
        if (root != other.root || nodes.size() != other.nodes.size())
            return false;
        for (size_t i = 0; i < nodes.size(); ++i) {
            const DagNode& a = nodes[i];
            const DagNode& b = other.nodes[i];
            if (a.loads != b.loads || a.next_items != b.next_items ||
                a.packing != b.packing || a.children != b.children)
                return false;
        }
        return true;
    }
};

// Longest path measured in adversary moves (compressed lists count in full).
inline size_t dag_max_depth(const StrategyDag& dag) {
    if (dag.root < 0)
        return 0;
    std::vector<long long> depth(dag.nodes.size(), -1);
    // children always hold strictly more volume, so index order by volume is
    // topological; process deepest-volume first
    std::vector<int> order(dag.nodes.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return dag.nodes[a].volume() > dag.nodes[b].volume();
    });
    for (int u : order) {
        long long best = 0;
        for (int c : dag.nodes[u].children)
            best = std::max(best, depth[c]);
        depth[u] = best + static_cast<long long>(dag.nodes[u].next_items.size());
    }
    return static_cast<size_t>(depth[dag.root]);
}

namespace detail {

using DagKey = std::tuple<std::vector<int>, std::vector<int>, int>;

inline DagKey key_of(const StrategyTreeNode& node) {
    return {node.loads, node.items.raw_counts(),
            node.last_item.value_or(-1)};
}

}  // namespace detail

// Hash-consing: subtrees with equal (loads, items[, last item]) merge into
// one node. Two occurrences of the same key must carry the same next-item
// list; anything else is a recorder bug, not valid input.
inline StrategyDag tree_to_dag(const StrategyTree& tree) {
    if (!tree.root)
        throw std::invalid_argument("cannot convert an empty strategy tree");
    StrategyDag dag;
    std::map<detail::DagKey, int> interned;

    auto intern = [&](auto&& self, const StrategyTreeNode& node) -> int {
        detail::DagKey key = detail::key_of(node);
        auto it = interned.find(key);
        if (it != interned.end()) {
            const DagNode& existing = dag.nodes[it->second];
            if (existing.next_items != node.next_items ||
                existing.children.size() != node.children.size())
                throw std::logic_error(
                    "duplicate configuration with diverging strategy");
            return it->second;
        }
        int idx = static_cast<int>(dag.nodes.size());
        dag.nodes.emplace_back();
        interned.emplace(std::move(key), idx);
        {
            DagNode& u = dag.nodes[idx];
            u.loads = node.loads;
            u.items = node.items.to_count_map();
            u.last_item = node.last_item;
            u.next_items = node.next_items;
            u.packing = node.packing;
        }
        std::vector<int> children;
        children.reserve(node.children.size());
        for (const auto& child : node.children)
            children.push_back(self(self, *child));
        dag.nodes[idx].children = std::move(children);
        return idx;
    };
    dag.root = intern(intern, *tree.root);
    return dag;
}

namespace detail {

// Forced run below a node: (size, count) when the node's whole subgame is a
// run of identical items ending in certified overflow on every path.
struct ForcedRun {
    int size;
    int count;
};

inline std::vector<std::optional<ForcedRun>> forced_runs(const StrategyDag& dag) {
    std::vector<int> order(dag.nodes.size());
    for (size_t i = 0; i < order.size(); ++i)
        order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return dag.nodes[a].volume() > dag.nodes[b].volume();
    });
    std::vector<std::optional<ForcedRun>> forced(dag.nodes.size());
    for (int u : order) {
        const DagNode& node = dag.nodes[u];
        if (node.next_items.empty())
            continue;
        int size = node.next_items.front();
        bool uniform = true;
        for (int it : node.next_items)
            uniform &= (it == size);
        if (!uniform)
            continue;
        if (node.children.empty()) {
            if (node.packing.has_value())
                forced[u] = ForcedRun{size, static_cast<int>(node.next_items.size())};
            continue;
        }
        if (node.next_items.size() != 1)
            continue;
        std::optional<ForcedRun> common;
        bool ok = true;
        for (int c : node.children) {
            if (!forced[c].has_value()) {
                ok = false;
                break;
            }
            if (!common.has_value())
                common = forced[c];
            else if (common->size != forced[c]->size ||
                     common->count != forced[c]->count)
                ok = false;
        }
        if (ok && common.has_value() && common->size == size)
            forced[u] = ForcedRun{size, common->count + 1};
    }
    return forced;
}

}  // namespace detail

// Replaces maximal forced runs of identical items by single compressed
// nodes. The surviving certificate is the one from the run's deepest layer,
// which covers the items of every overflow prefix along the run.
inline StrategyDag compress_last_layer(const StrategyDag& dag) {
    if (dag.root < 0)
        return dag;
    auto forced = detail::forced_runs(dag);

    StrategyDag out;
    std::vector<int> remap(dag.nodes.size(), -1);
    auto build = [&](auto&& self, int u) -> int {
        if (remap[u] != -1)
            return remap[u];
        int idx = static_cast<int>(out.nodes.size());
        out.nodes.emplace_back();
        remap[u] = idx;
        const DagNode& src = dag.nodes[u];
        {
            DagNode& dst = out.nodes[idx];
            dst.loads = src.loads;
            dst.items = src.items;
            dst.last_item = src.last_item;
        }
        if (forced[u].has_value() && forced[u]->count > 1) {
            // walk any path to the deepest layer for the covering certificate
            int v = u;
            while (!dag.nodes[v].children.empty())
                v = dag.nodes[v].children.front();
            DagNode& dst = out.nodes[idx];
            dst.next_items.assign(forced[u]->count, forced[u]->size);
            dst.packing = dag.nodes[v].packing;
            return idx;
        }
        out.nodes[idx].next_items = src.next_items;
        out.nodes[idx].packing = src.packing;
        std::vector<int> children;
        children.reserve(src.children.size());
        for (int c : src.children)
            children.push_back(self(self, c));
        out.nodes[idx].children = std::move(children);
        return idx;
    };
    out.root = build(build, dag.root);
    return out;
}

}  // namespace binstretch

#endif  // BINSTRETCH_DAG_HPP
