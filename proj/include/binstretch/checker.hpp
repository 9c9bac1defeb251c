#ifndef BINSTRETCH_CHECKER_HPP
#define BINSTRETCH_CHECKER_HPP

#include <map>
#include <string>

#include "binstretch/dag.hpp"
#include "binstretch/game.hpp"

// Independent certification of strategy DAGs: decides whether a DAG proves
// that the adversary wins the game, by checking the overflow/deadend
// semantics at every node. Deliberately built on the vocabulary and DAG
// types alone; it shares no code with the search engine, its caches or its
// heuristics.

namespace binstretch {

struct Verdict {
    enum class Reason {
        none,
        missing_placement,
        bad_certificate,
        item_mismatch,
        cycle,
        overflow_without_certificate,
        load_mismatch,
        depth_exceeded,
        root_not_zero,
        item_not_positive,
    };

    bool accepted = false;
    Reason reason = Reason::none;
    int node = -1;
    std::string detail;

    static const char* reason_name(Reason r) {
        switch (r) {
        case Reason::none: return "none";
        case Reason::missing_placement: return "missing-placement";
        case Reason::bad_certificate: return "bad-certificate";
        case Reason::item_mismatch: return "item-mismatch";
        case Reason::cycle: return "cycle";
        case Reason::overflow_without_certificate:
            return "overflow-without-certificate";
        case Reason::load_mismatch: return "load-mismatch";
        case Reason::depth_exceeded: return "depth-exceeded";
        case Reason::root_not_zero: return "root-not-zero";
        case Reason::item_not_positive: return "item-not-positive";
        }
        return "unknown";
    }
};

// True iff sending `seq` in order from `loads` overflows some bin on every
// placement path before the list runs out. The recursion lives in the core
// vocabulary; compressed nodes are valid exactly when it holds and their
// certificate covers the full item list.
inline bool expand_compressed(const std::vector<int>& loads,
                              const std::vector<int>& seq,
                              const GameParams& params) {
    return forced_run_overflows(loads, seq, params);
}

namespace detail {

inline Verdict reject(Verdict::Reason reason, int node, std::string detail) {
    return Verdict{false, reason, node, std::move(detail)};
}

}  // namespace detail

inline Verdict check(const StrategyDag& dag, const GameParams& params) {
    using Reason = Verdict::Reason;
    const int m = params.bins;
    const int t = params.target;

    if (dag.root < 0 || dag.root >= static_cast<int>(dag.nodes.size()))
        return detail::reject(Reason::root_not_zero, -1, "no root node");

    // root must be the untouched starting state
    {
        const DagNode& root = dag.nodes[dag.root];
        bool zero = static_cast<int>(root.loads.size()) == m;
        for (int l : root.loads)
            zero &= (l == 0);
        if (!zero || !root.items.empty())
            return detail::reject(Reason::root_not_zero, dag.root,
                                  "root loads or items are not empty");
    }

    // Nodes the root cannot reach carry no weight for the claim and are
    // ignored; the reachable part must be acyclic.
    std::vector<bool> reachable(dag.nodes.size(), false);
    {
        std::vector<int> stack{dag.root};
        reachable[dag.root] = true;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int c : dag.nodes[u].children) {
                if (c < 0 || c >= static_cast<int>(dag.nodes.size()))
                    return detail::reject(Reason::cycle, u, "edge out of range");
                if (!reachable[c]) {
                    reachable[c] = true;
                    stack.push_back(c);
                }
            }
        }
    }
    size_t reachable_count = 0;
    std::vector<int> pending(dag.nodes.size(), 0);
    for (size_t u = 0; u < dag.nodes.size(); ++u) {
        if (!reachable[u])
            continue;
        ++reachable_count;
        for (int c : dag.nodes[u].children)
            ++pending[c];
    }
    if (pending[dag.root] != 0)
        return detail::reject(Reason::cycle, dag.root, "root has an in-edge");

    // derive items independently from the edges, verifying stored multisets
    std::vector<std::map<int, int>> derived(dag.nodes.size());
    std::vector<bool> seen(dag.nodes.size(), false);
    seen[dag.root] = true;
    std::vector<int> topo;
    std::vector<int> queue{dag.root};
    while (!queue.empty()) {
        int u = queue.back();
        queue.pop_back();
        topo.push_back(u);
        const DagNode& node = dag.nodes[u];
        if (node.next_items.empty())
            return detail::reject(Reason::item_not_positive, u,
                                  "node sends no item");
        std::map<int, int> child_items = derived[u];
        ++child_items[node.next_items.front()];
        for (int c : node.children) {
            if (seen[c]) {
                if (derived[c] != child_items)
                    return detail::reject(Reason::item_mismatch, c,
                                          "derived items differ across in-edges");
            } else {
                derived[c] = child_items;
                seen[c] = true;
            }
            if (--pending[c] == 0)
                queue.push_back(c);
        }
    }
    if (topo.size() != reachable_count)
        return detail::reject(Reason::cycle, -1, "graph has a cycle");

    for (int u : topo) {
        const DagNode& node = dag.nodes[u];

        if (node.items != derived[u])
            return detail::reject(Reason::item_mismatch, u,
                                  "stored items differ from derived items");

        if (static_cast<int>(node.loads.size()) != m)
            return detail::reject(Reason::load_mismatch, u, "wrong bin count");
        long long volume = 0;
        for (size_t i = 0; i < node.loads.size(); ++i) {
            int l = node.loads[i];
            if (l < 0 || l >= t)
                return detail::reject(Reason::load_mismatch, u,
                                      "load outside [0, t)");
            if (i > 0 && node.loads[i - 1] < l)
                return detail::reject(Reason::load_mismatch, u,
                                      "loads not sorted non-increasing");
            volume += l;
        }
        long long derived_volume = 0;
        long long derived_count = 0;
        for (auto [size, cnt] : derived[u]) {
            derived_volume += static_cast<long long>(size) * cnt;
            derived_count += cnt;
        }
        if (volume != derived_volume)
            return detail::reject(Reason::load_mismatch, u,
                                  "loads do not sum to the derived volume");

        for (int e : node.next_items)
            if (e < 1)
                return detail::reject(Reason::item_not_positive, u,
                                      "non-positive next item");

        if (derived_count + static_cast<long long>(node.next_items.size()) >
            static_cast<long long>(m) * params.guarantee + 2)
            return detail::reject(Reason::depth_exceeded, u,
                                  "path exceeds m*g+2 adversary moves");

        int e = node.next_items.front();
        bool overflow_somewhere = false;
        for (int b = 0; b < m; ++b)
            overflow_somewhere |= (node.loads[b] + e >= t);

        bool needs_cert = overflow_somewhere || node.compressed();
        if (needs_cert && !node.packing.has_value())
            return detail::reject(Reason::overflow_without_certificate, u,
                                  "overflow reachable but no packing present");
        if (node.packing.has_value()) {
            std::map<int, int> covered = derived[u];
            if (node.compressed()) {
                for (int it : node.next_items)
                    ++covered[it];
            } else {
                ++covered[e];
            }
            if (!validate_packing_counts(covered, *node.packing, params))
                return detail::reject(Reason::bad_certificate, u,
                                      "packing does not certify the items");
        }

        if (node.compressed()) {
            if (!node.children.empty())
                return detail::reject(Reason::missing_placement, u,
                                      "compressed node cannot have children");
            if (!expand_compressed(node.loads, node.next_items, params))
                return detail::reject(Reason::missing_placement, u,
                                      "compressed item list does not force overflow");
        } else {
            for (int b = 0; b < m; ++b) {
                if (b > 0 && node.loads[b] == node.loads[b - 1])
                    continue;
                if (node.loads[b] + e >= t)
                    continue;
                std::vector<int> successor = node.loads;
                successor[b] += e;
                std::sort(successor.begin(), successor.end(),
                          std::greater<int>());
                bool found = false;
                for (int c : node.children) {
                    std::vector<int> child_loads = dag.nodes[c].loads;
                    std::sort(child_loads.begin(), child_loads.end(),
                              std::greater<int>());
                    if (child_loads == successor) {
                        found = true;
                        break;
                    }
                }
                if (!found)
                    return detail::reject(
                        Reason::missing_placement, u,
                        "placement on bin " + std::to_string(b) +
                            " has no matching child");
            }
        }
    }

    return Verdict{true, Verdict::Reason::none, -1, ""};
}

}  // namespace binstretch

#endif  // BINSTRETCH_CHECKER_HPP
