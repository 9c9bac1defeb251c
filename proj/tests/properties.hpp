#ifndef BINSTRETCH_TESTS_PROPERTIES_HPP
#define BINSTRETCH_TESTS_PROPERTIES_HPP

#include <gtest/gtest.h>

#include <random>

#include "binstretch/checker.hpp"
#include "binstretch/dot.hpp"
#include "binstretch/search.hpp"
#include "oracle.hpp"

// Property suites shared between the unit tests and the acceptance run.
// Each function asserts with gtest macros and is parametrized only by size
// knobs, so the acceptance suite can run the full-strength versions.

namespace binstretch::props {

// Full search (caches, pruning, heuristics) against the plain minimax
// oracle. At full generality the verdicts must be identical. Under a
// monotonicity restriction the engine may additionally win through
// restriction-exempt heuristic witnesses, so there the oracle verdict
// implies the engine verdict, and an engine win implies the unrestricted
// game is won.
inline void oracle_equivalence_sweep(int max_t = 9, int max_g = 7) {
    for (int m : {2, 3}) {
        for (int t = 2; t <= max_t; ++t) {
            for (int g = 1; g <= max_g; ++g) {
                if (t <= g)
                    continue;
                GameParams p(m, t, g);
                ZobristTables tables(p, 42);
                StateCache scache(14);
                FeasibilityCache fcache(14);
                auto engine_found = [&](int k) {
                    scache.clear();
                    fcache.clear();
                    SearchOptions opts;
                    opts.monotonicity = k;
                    return sequential(p, opts, tables, &scache, &fcache).found;
                };
                oracle::GameOracle full_oracle(m, t, g);
                bool full = full_oracle.adversary_wins_game();
                ASSERT_EQ(engine_found(-1), full)
                    << "m=" << m << " t=" << t << " g=" << g;
                for (int k : {0, 1, 2}) {
                    if (k >= g - 1)
                        continue;
                    bool engine = engine_found(k);
                    oracle::GameOracle restricted(m, t, g, k);
                    if (restricted.adversary_wins_game())
                        ASSERT_TRUE(engine) << "m=" << m << " t=" << t
                                            << " g=" << g << " k=" << k;
                    if (engine)
                        ASSERT_TRUE(full) << "m=" << m << " t=" << t
                                          << " g=" << g << " k=" << k;
                }
            }
        }
    }
}

// Every configuration the good situations flag must be algorithm-won under
// plain minimax, over every reachable state of the given games.
inline void gs_soundness_sweep() {
    for (auto [m, t, g] : {std::tuple{3, 8, 6}, {4, 8, 6}, {4, 7, 5}}) {
        GameParams p(m, t, g);
        oracle::GameOracle game(m, t, g);
        auto states = oracle::oracle_reachable(m, t, g);
        int flagged = 0;
        for (const auto& st : states) {
            if (!(gs1(st.loads, p) || gs2(st.loads, p) || gs3(st.loads, p)))
                continue;
            ++flagged;
            ASSERT_FALSE(game.adversary_wins(st.loads, st.counts))
                << "m=" << m << " t=" << t << " g=" << g;
        }
        ASSERT_GT(flagged, 0);
    }
}

// dynprog_max against direct enumeration for every multiset of at most
// `max_items` items, m <= 3, g <= 10.
inline void dynprog_vs_enumeration(int max_items) {
    for (int m : {1, 2, 3}) {
        for (int g : {3, 6, 10}) {
            GameParams p(m, g + 2, g);
            ZobristTables tables(p, 7);
            DpScratch scratch;
            std::vector<int> counts(g + 1, 0);
            ItemMultiset items(g);
            auto rec = [&](auto&& self, int size, int left) -> void {
                if (size > g) {
                    ASSERT_EQ(dynprog_max(items, p, tables, scratch),
                              oracle::oracle_max_item(counts, m, g))
                        << "m=" << m << " g=" << g;
                    return;
                }
                self(self, size + 1, left);
                for (int k = 1; k <= left; ++k) {
                    counts[size] += 1;
                    items.add(size);
                    self(self, size + 1, left - k);
                }
                for (int k = counts[size]; k > 0; --k)
                    items.remove(size);
                counts[size] = 0;
            };
            rec(rec, 1, max_items);
        }
    }
}

// Incremental hash updates equal from-scratch hashing along random walks.
inline void zobrist_incremental_walks(int min_checks) {
    GameParams p(3, 19, 14);
    ZobristTables tables(p, 77);
    std::mt19937 rng(5);
    int checks = 0;
    while (checks < min_checks) {
        BinConfiguration c = BinConfiguration::empty_start(p);
        if (rng() % 2 == 0)
            c.last_item = 1 + static_cast<int>(rng() % 14);
        uint64_t h = hash_config(tables, c);
        for (int step = 0; step < 12; ++step) {
            int e = 1 + static_cast<int>(rng() % 14);
            int b = static_cast<int>(rng() % 3);
            BinConfiguration next = add_item(c, e, b);
            if (c.last_item.has_value())
                next.last_item = e;
            if (max_load(next) >= p.target)
                break;
            h = hash_successor(tables, h, c, next, e);
            ASSERT_EQ(h, hash_config(tables, next));
            c = std::move(next);
            ++checks;
        }
    }
}

inline std::vector<std::pair<GameParams, StrategyDag>> recorded_corpus() {
    std::vector<std::pair<GameParams, StrategyDag>> corpus;
    for (auto [m, t, g] : {std::tuple{2, 4, 3}, {3, 4, 3}, {2, 6, 5},
                           {3, 7, 5}, {2, 7, 5}, {3, 9, 7}}) {
        GameParams p(m, t, g);
        ZobristTables tables(p, 17);
        StateCache scache(14);
        FeasibilityCache fcache(14);
        SequentialResult r =
            sequential(p, {}, tables, &scache, &fcache, {}, true);
        if (!r.found)
            continue;
        StrategyDag dag = tree_to_dag(*r.tree);
        corpus.emplace_back(p, std::move(dag));
        corpus.emplace_back(p, compress_last_layer(corpus.back().second));
    }
    return corpus;
}

// Emit -> parse -> emit byte identity over the recorded corpus.
inline void dot_round_trip_corpus() {
    auto corpus = recorded_corpus();
    ASSERT_FALSE(corpus.empty());
    for (const auto& [params, dag] : corpus) {
        std::string text = emit_dot(dag, params);
        ParsedDot parsed = parse_dot(text);
        ASSERT_TRUE(parsed.dag.equivalent(dag));
        ASSERT_EQ(emit_dot(parsed.dag, parsed.params), text);
    }
}

// Single mutations over accepted DAGs: the checker must reject the mutant or
// the game oracle must confirm the claimed bound still holds. Zero unsound
// acceptances.
inline void checker_mutation_fuzz(int mutations_per_dag) {
    auto corpus = recorded_corpus();
    ASSERT_FALSE(corpus.empty());
    std::mt19937 rng(1234);
    std::map<std::tuple<int, int, int>, bool> game_truth;
    for (const auto& [params, dag] : corpus) {
        ASSERT_TRUE(check(dag, params).accepted);
        int applied = 0;
        int guard = 0;
        while (applied < mutations_per_dag && guard < mutations_per_dag * 20) {
            ++guard;
            StrategyDag mutant = dag;
            int node = static_cast<int>(rng() % mutant.nodes.size());
            DagNode& u = mutant.nodes[node];
            bool changed = false;
            switch (rng() % 5) {
            case 0:  // drop an edge
                if (!u.children.empty()) {
                    u.children.erase(u.children.begin() +
                                     (rng() % u.children.size()));
                    changed = true;
                }
                break;
            case 1: {  // perturb one load
                int idx = static_cast<int>(rng() % u.loads.size());
                int delta = (rng() % 2 == 0) ? 1 : -1;
                if (u.loads[idx] + delta >= 0) {
                    u.loads[idx] += delta;
                    changed = true;
                }
                break;
            }
            case 2:  // remove a certificate
                if (u.packing.has_value()) {
                    u.packing.reset();
                    changed = true;
                }
                break;
            case 3:  // overfill a certificate bin
                if (u.packing.has_value() && !u.packing->bins.empty()) {
                    auto& bin = u.packing->bins[rng() % u.packing->bins.size()];
                    bin.push_back(params.guarantee);
                    changed = true;
                }
                break;
            case 4: {  // swap a next item for zero
                int idx = static_cast<int>(rng() % u.next_items.size());
                u.next_items[idx] = 0;
                changed = true;
                break;
            }
            }
            if (!changed)
                continue;
            ++applied;
            Verdict v = check(mutant, params);
            if (!v.accepted)
                continue;
            // the mutant still parses as a claim about the same game; it may
            // only be accepted if the game is genuinely adversary-won
            auto key = std::make_tuple(params.bins, params.target,
                                       params.guarantee);
            auto it = game_truth.find(key);
            if (it == game_truth.end()) {
                oracle::GameOracle game(params.bins, params.target,
                                        params.guarantee);
                it = game_truth.emplace(key, game.adversary_wins_game()).first;
            }
            ASSERT_TRUE(it->second)
                << "unsound acceptance after mutation at node " << node;
        }
        ASSERT_EQ(applied, mutations_per_dag);
    }
}

}  // namespace binstretch::props

#endif  // BINSTRETCH_TESTS_PROPERTIES_HPP
