#ifndef BINSTRETCH_STRATEGY_TREE_HPP
#define BINSTRETCH_STRATEGY_TREE_HPP

#include <memory>
#include <optional>
#include <vector>

#include "binstretch/game.hpp"

// Recorded adversary strategy. Each node snapshots the configuration before
// the adversary moves and lists the item(s) it sends there; children are the
// distinct canonical outcomes of the placements that survive below the
// target. next_items longer than one marks a compressed node: a forced run
// of identical items with no children.

namespace binstretch {

struct StrategyTreeNode {
    std::vector<int> loads;
    ItemMultiset items;
    std::optional<int> last_item;
    std::vector<int> next_items;
    std::optional<PackingCertificate> packing;
    std::vector<std::unique_ptr<StrategyTreeNode>> children;

    StrategyTreeNode(std::vector<int> l, ItemMultiset i, std::optional<int> last)
        : loads(std::move(l)), items(std::move(i)), last_item(last) {}
};

struct StrategyTree {
    std::unique_ptr<StrategyTreeNode> root;

    size_t node_count() const {
        if (!root)
            return 0;
        size_t n = 0;
        std::vector<const StrategyTreeNode*> stack{root.get()};
        while (!stack.empty()) {
            const StrategyTreeNode* u = stack.back();
            stack.pop_back();
            ++n;
            for (const auto& c : u->children)
                stack.push_back(c.get());
        }
        return n;
    }
};

}  // namespace binstretch

#endif  // BINSTRETCH_STRATEGY_TREE_HPP
