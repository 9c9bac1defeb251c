#ifndef BINSTRETCH_PRUNING_HPP
#define BINSTRETCH_PRUNING_HPP

#include <cassert>
#include <map>
#include <span>

#include "binstretch/feasibility.hpp"
#include "binstretch/game.hpp"
#include "binstretch/strategy_tree.hpp"

// Fast winning-state detection. Good situations 1-3 prove the packing player
// wins from a configuration; the large-item and five/nine heuristics prove
// the adversary wins, with constructive witnesses that the recorder can
// materialize into checkable strategy nodes.

namespace binstretch {

// Total load of all but the last bin is at least (m-1)*g - alpha: everything
// that can still arrive fits on the last bin.
inline bool gs1(std::span<const int> loads, const GameParams& params) {
    const int m = params.bins;
    long long total = 0;
    for (int l : loads)
        total += l;
    long long all_but_last = total - loads[m - 1];
    return all_but_last >= static_cast<long long>(m - 1) * params.guarantee -
                               params.slack;
}

// Two bins A,B set aside; the rest already hold (m-2)*g - 2*alpha - 1 and one
// of them, C, is still below alpha. Generalized for m >= 4 only.
inline bool gs2(std::span<const int> loads, const GameParams& params) {
    const int m = params.bins;
    if (m < 4)
        return false;
    long long total = 0;
    for (int l : loads)
        total += l;
    long long need = static_cast<long long>(m - 2) * params.guarantee -
                     2 * params.slack - 1;
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            if (total - loads[a] - loads[b] < need)
                continue;
            for (int c = 0; c < m; ++c) {
                if (c != a && c != b && loads[c] < params.slack)
                    return true;
            }
        }
    }
    return false;
}

// Sum of loads excluding the last two (s), the load the last bin must reach
// for GS1 to hold after reordering (r), and the overflow o = t - r.
struct Gs3Quantities {
    long long s;
    long long r;
    long long o;
};

inline Gs3Quantities compute_gs3(std::span<const int> loads,
                                 const GameParams& params) {
    const int m = params.bins;
    long long total = 0;
    for (int l : loads)
        total += l;
    Gs3Quantities q{};
    q.s = total - loads[m - 1] - loads[m - 2];
    long long all_but_last = total - loads[m - 1];
    long long rhs = static_cast<long long>(m - 1) * params.guarantee -
                    params.slack;
    // Filling the last bin to r gives all-but-minimum load of either
    // all_but_last (r still the minimum) or all_but_last + r - loads[m-2].
    if (all_but_last >= rhs)
        q.r = 0;
    else
        q.r = rhs - all_but_last + loads[m - 2];
    q.o = params.target - q.r;
    return q;
}

inline bool gs3(std::span<const int> loads, const GameParams& params) {
    const int m = params.bins;
    if (m < 4)
        return false;
    Gs3Quantities q = compute_gs3(loads, params);
    if (q.r > params.target - 1)
        return false;
    long long low = static_cast<long long>(m - 1) * params.guarantee -
                    params.slack - q.o - q.s;
    auto in_band = [&](long long v) { return v > low && v <= params.slack; };
    return in_band(loads[m - 2]) || in_band(loads[m - 1]);
}

// Shared environment for heuristics that must test whether extra items can
// still arrive. The multiset is borrowed and always restored.
struct FeasEnv {
    ItemMultiset& items;
    const GameParams& params;
    const ZobristTables& tables;
    uint64_t items_hash;
    FeasibilityCache* fcache;
    DpScratch& scratch;

    // Feasibility of items plus `copies` extra items of each (size, count)
    // pair. Consults and feeds the feasibility cache.
    bool feasible_with(std::span<const std::pair<int, int>> extra) {
        long long extra_volume = 0;
        long long extra_count = 0;
        for (auto [size, count] : extra) {
            if (size > params.guarantee)
                return false;
            extra_volume += static_cast<long long>(size) * count;
            extra_count += count;
        }
        long long cap = static_cast<long long>(params.bins) * params.guarantee;
        if (items.total() + extra_volume > cap)
            return false;

        uint64_t h = items_hash;
        for (auto [size, count] : extra) {
            for (int i = 0; i < count; ++i) {
                int freq = items.count(size);
                h ^= tables.item_key_raw(size, freq) ^
                     tables.item_key_raw(size, freq + 1);
                items.add(size);
            }
        }
        bool result;
        auto cached = fcache ? fcache->lookup(h) : std::nullopt;
        if (cached.has_value()) {
            result = *cached;
        } else {
            result = dynprog_max(items, params, tables, scratch) >= 0;
            if (fcache)
                fcache->insert(h, result);
        }
        for (auto [size, count] : extra)
            for (int i = 0; i < count; ++i)
                items.remove(size);
        return result;
    }

    bool feasible_with(int size, int copies) {
        std::pair<int, int> one{size, copies};
        return feasible_with(std::span<const std::pair<int, int>>(&one, 1));
    }
};

struct AdversaryWitness {
    enum class Kind { large_item, five_nine };
    Kind kind;
    std::vector<int> forced_items;  // large_item: the copies; five_nine: adaptive
};

// Once a bin with load l >= t - g exists, an item of size t - l tips it
// over, and m - k copies of it (k = index of the loaded bin) may leave the
// later bins no room to absorb two each. Each qualifying bin contributes two
// run candidates: the smallest item that overflows it, and the larger item
// whose pair overflows every later bin. A candidate becomes a witness only
// when the forced run provably overflows on every placement path and the
// copies are feasible with the current items.
namespace detail {

// Copies of size `item` the bins absorb without any reaching the target.
// For identical items the absorptions are independent, so a run forces an
// overflow exactly when it exceeds this capacity.
inline int run_capacity(std::span<const int> loads, int item,
                        const GameParams& params) {
    int capacity = 0;
    for (int l : loads)
        capacity += (params.target - 1 - l) / item;
    return capacity;
}

}  // namespace detail

inline std::optional<AdversaryWitness> large_item_heuristic(
    const BinConfiguration& c, const GameParams& params, FeasEnv& env) {
    const int m = params.bins;
    const int t = params.target;
    for (int k = m - 1; k >= 0; --k) {
        int load = c.loads[k];
        if (load < t - params.guarantee)
            continue;
        int base = std::max(t - load, 1);
        int paired = base;
        if (k < m - 1) {
            // two copies overflow even the least-loaded later bin
            paired = std::max(base, (t - c.loads[m - 1] + 1) / 2);
        }
        int copies = m - k;
        for (int candidate : {base, paired}) {
            if (candidate > params.guarantee)
                continue;
            if (detail::run_capacity(c.loads, candidate, params) >= copies) {
                // the bins can absorb the whole run; try the larger item
                if (candidate == paired)
                    break;
                continue;
            }
            if (env.feasible_with(candidate, copies))
                return AdversaryWitness{
                    AdversaryWitness::Kind::large_item,
                    std::vector<int>(static_cast<size_t>(copies), candidate)};
            break;  // a larger run of the same length cannot pack either
        }
    }
    return std::nullopt;
}

namespace detail {

// One step of the 19/14 recipe: with a bin at 10 or more the nines finish
// the game; with few bins under 5 the fourteens do; otherwise send another 5.
enum class FiveNinePhase { send_nine, send_fourteen, send_five, dead };

inline FiveNinePhase five_nine_phase(std::span<const int> loads,
                                     const GameParams& params, FeasEnv& env) {
    const int m = params.bins;
    bool high_bin = false;
    int under_five = 0;
    for (int l : loads) {
        if (l >= 10)
            high_bin = true;
        if (l < 5)
            ++under_five;
    }
    if (high_bin && env.feasible_with(9, m))
        return FiveNinePhase::send_nine;
    if (env.feasible_with(14, under_five + 1))
        return FiveNinePhase::send_fourteen;
    if (!high_bin) {
        // sending a 5 must keep m nines feasible afterwards
        std::array<std::pair<int, int>, 2> extra{{{5, 1}, {9, m}}};
        if (env.feasible_with(std::span<const std::pair<int, int>>(extra)))
            return FiveNinePhase::send_five;
    }
    return FiveNinePhase::dead;
}

inline bool five_nine_simulate(std::vector<int>& loads,
                               const GameParams& params, FeasEnv& env,
                               std::map<std::vector<int>, bool>& memo) {
    auto it = memo.find(loads);
    if (it != memo.end())
        return it->second;
    FiveNinePhase phase = five_nine_phase(loads, params, env);
    bool result;
    if (phase == FiveNinePhase::send_nine ||
        phase == FiveNinePhase::send_fourteen) {
        result = true;  // pigeonhole run, no search needed
    } else if (phase == FiveNinePhase::dead) {
        result = false;
    } else {
        env.items.add(5);
        env.items_hash ^= env.tables.item_key_raw(5, env.items.count(5) - 1) ^
                          env.tables.item_key_raw(5, env.items.count(5));
        result = true;
        for (int b = 0; b < params.bins && result; ++b) {
            if (b > 0 && loads[b] == loads[b - 1])
                continue;
            if (loads[b] + 5 > params.target - 1)
                continue;  // overflow placement, adversary already wins
            std::vector<int> next = loads;
            next[b] += 5;
            std::sort(next.begin(), next.end(), std::greater<int>());
            result = five_nine_simulate(next, params, env, memo);
        }
        env.items_hash ^= env.tables.item_key(5, env.items.count(5) - 1) ^
                          env.tables.item_key(5, env.items.count(5));
        env.items.remove(5);
    }
    memo[loads] = result;
    return result;
}

}  // namespace detail

// Specific to the 19/14 game: complementary 5s and 9s. Applies once some bin
// holds 5 and every bin is non-empty; wins if repeatedly sending 5s always
// reaches a state finished off by 14s or 9s.
inline std::optional<AdversaryWitness> five_nine_heuristic(
    const BinConfiguration& c, const GameParams& params, FeasEnv& env) {
    if (params.target != 19 || params.guarantee != 14)
        return std::nullopt;
    const int m = params.bins;
    if (c.loads[0] < 5 || c.loads[m - 1] < 1)
        return std::nullopt;
    if (!env.feasible_with(9, m))
        return std::nullopt;
    std::map<std::vector<int>, bool> memo;
    std::vector<int> loads = c.loads;
    if (detail::five_nine_simulate(loads, params, env, memo))
        return AdversaryWitness{AdversaryWitness::Kind::five_nine, {}};
    return std::nullopt;
}

namespace detail {

// Run of identical items sent to completion. The trigger's feasibility check
// covered the whole run, so sub-multisets along it stay feasible; the
// pigeonhole argument bounds the surviving placements by the budget.
inline std::unique_ptr<StrategyTreeNode> expand_forced_run(
    const BinConfiguration& c, int item, int budget, const GameParams& params,
    FeasEnv& env) {
    if (budget <= 0)
        throw std::logic_error("forced run outlived its budget");
    auto node =
        std::make_unique<StrategyTreeNode>(c.loads, env.items, c.last_item);
    node->next_items = {item};
    env.items.add(item);
    bool overflow = false;
    for (int b = 0; b < params.bins; ++b) {
        if (b > 0 && c.loads[b] == c.loads[b - 1])
            continue;
        if (c.loads[b] + item > params.target - 1) {
            overflow = true;
            continue;
        }
        BinConfiguration child = c;
        child.loads[b] += item;
        std::sort(child.loads.begin(), child.loads.end(), std::greater<int>());
        child.items = env.items;
        if (child.last_item.has_value())
            child.last_item = item;
        node->children.push_back(
            expand_forced_run(child, item, budget - 1, params, env));
    }
    env.items.remove(item);
    if (overflow || node->children.empty()) {
        ItemMultiset with_next = node->items;
        with_next.add(item);
        auto packing = find_packing(with_next, params);
        if (!packing.has_value())
            throw std::logic_error("forced run lost feasibility");
        node->packing = std::move(*packing);
    }
    return node;
}

}  // namespace detail

// Materializes the five/nine recipe as explicit strategy nodes, following
// exactly the triggers the detection used: 5s while no trigger holds, then a
// forced run of nines or fourteens. Only called on configurations the
// heuristic reported as won.
inline std::unique_ptr<StrategyTreeNode> five_nine_expand(
    const BinConfiguration& c, const GameParams& params, FeasEnv& env) {
    detail::FiveNinePhase phase = detail::five_nine_phase(c.loads, params, env);
    if (phase == detail::FiveNinePhase::send_nine)
        return detail::expand_forced_run(c, 9, params.bins, params, env);
    if (phase == detail::FiveNinePhase::send_fourteen) {
        int under_five = 0;
        for (int l : c.loads)
            under_five += (l < 5) ? 1 : 0;
        return detail::expand_forced_run(c, 14, under_five + 1, params, env);
    }
    if (phase == detail::FiveNinePhase::dead)
        throw std::logic_error("five/nine expansion entered a dead state");

    auto node =
        std::make_unique<StrategyTreeNode>(c.loads, env.items, c.last_item);
    node->next_items = {5};
    env.items.add(5);
    env.items_hash ^= env.tables.item_key(5, env.items.count(5) - 1) ^
                      env.tables.item_key(5, env.items.count(5));
    bool overflow = false;
    for (int b = 0; b < params.bins; ++b) {
        if (b > 0 && c.loads[b] == c.loads[b - 1])
            continue;
        if (c.loads[b] + 5 > params.target - 1) {
            overflow = true;
            continue;
        }
        BinConfiguration child = c;
        child.loads[b] += 5;
        std::sort(child.loads.begin(), child.loads.end(), std::greater<int>());
        child.items = env.items;
        if (child.last_item.has_value())
            child.last_item = 5;
        node->children.push_back(five_nine_expand(child, params, env));
    }
    env.items_hash ^= env.tables.item_key(5, env.items.count(5) - 1) ^
                      env.tables.item_key(5, env.items.count(5));
    env.items.remove(5);
    if (overflow || node->children.empty()) {
        ItemMultiset with_next = node->items;
        with_next.add(5);
        auto packing = find_packing(with_next, params);
        if (!packing.has_value())
            throw std::logic_error("five/nine expansion lost feasibility");
        node->packing = std::move(*packing);
    }
    return node;
}

}  // namespace binstretch

#endif  // BINSTRETCH_PRUNING_HPP
