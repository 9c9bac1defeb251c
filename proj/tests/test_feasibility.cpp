#include <gtest/gtest.h>

#include <random>

#include "binstretch/feasibility.hpp"
#include "oracle.hpp"
#include "properties.hpp"

using namespace binstretch;

namespace {

ItemMultiset make_items(int max_size, std::initializer_list<int> sizes) {
    ItemMultiset items(max_size);
    for (int s : sizes)
        items.add(s);
    return items;
}

ItemMultiset random_items(std::mt19937& rng, int max_size, int max_count) {
    ItemMultiset items(max_size);
    int n = static_cast<int>(rng() % (max_count + 1));
    for (int i = 0; i < n; ++i)
        items.add(1 + static_cast<int>(rng() % max_size));
    return items;
}

}  // namespace

TEST(Obf, FirstPlacementGoesToEmptyBin) {
    GameParams p(3, 19, 14);
    ObfState obf(p);
    obf.insert(5);
    EXPECT_EQ(obf.bin_sums(), (std::vector<int>{5, 0, 0}));
    EXPECT_TRUE(obf.consistent());
}

TEST(Obf, MostLoadedFittingBin) {
    GameParams p(3, 19, 14);
    ObfState obf(p);
    obf.insert(13);
    obf.insert(9);
    obf.insert(3);  // 13+3 > 14, so the bin at 9 takes it
    EXPECT_EQ(obf.bin_sums(), (std::vector<int>{13, 12, 0}));
}

TEST(Obf, NothingFitsMarksInconsistent) {
    GameParams p(3, 19, 14);
    ObfState obf(p);
    for (int i = 0; i < 3; ++i) {
        obf.insert(14);
    }
    EXPECT_TRUE(obf.consistent());
    obf.insert(1);
    EXPECT_FALSE(obf.consistent());
    EXPECT_FALSE(obf.lower_bound().has_value());
    obf.remove(1);  // backtracking repairs the packing
    EXPECT_TRUE(obf.consistent());
    EXPECT_EQ(obf.lower_bound(), 0);
}

TEST(Obf, LowerBoundIsLeastLoadedGap) {
    GameParams p(3, 19, 14);
    ObfState obf(p);
    obf.insert(5);
    EXPECT_EQ(obf.lower_bound(), 14);  // two bins still empty
    ObfState full(p);
    full.insert(14);
    full.insert(14);
    full.insert(14);
    EXPECT_EQ(full.lower_bound(), 0);
}

TEST(Obf, RemovalMustMatchLastInsert) {
    GameParams p(3, 19, 14);
    ObfState obf(p);
    obf.insert(5);
    EXPECT_THROW(obf.remove(3), std::logic_error);
}

TEST(Bfd, EmptyMultisetLeavesFullBin) {
    GameParams p(3, 19, 14);
    EXPECT_EQ(bfd_lowerbound(ItemMultiset(14), p), 14);
}

TEST(Bfd, ThreeNines) {
    GameParams p(3, 19, 14);
    // oracle: best packing spreads one 9 per bin, leaving 5 free
    EXPECT_EQ(oracle::oracle_max_item({0, 0, 0, 0, 0, 0, 0, 0, 0, 3}, 3, 14), 5);
    EXPECT_EQ(bfd_lowerbound(make_items(14, {9, 9, 9}), p), 5);
}

TEST(Bfd, TensAndFoursPackTight) {
    GameParams p(3, 19, 14);
    std::vector<int> counts(15, 0);
    counts[10] = 3;
    counts[4] = 3;
    EXPECT_EQ(oracle::oracle_max_item(counts, 3, 14), 0);
    EXPECT_EQ(bfd_lowerbound(make_items(14, {10, 10, 10, 4, 4, 4}), p), 0);
}

TEST(Dynprog, SpecValues) {
    GameParams p(3, 19, 14);
    ZobristTables tables(p, 42);
    EXPECT_EQ(dynprog_max(ItemMultiset(14), p, tables), 14);
    EXPECT_EQ(dynprog_max(make_items(14, {14, 14, 14}), p, tables), 0);
    EXPECT_EQ(dynprog_max(make_items(14, {9, 9, 9, 5}), p, tables), 5);
    EXPECT_EQ(dynprog_max(make_items(14, {9, 9, 9, 9}), p, tables), -1);
}

TEST(Dynprog, MatchesEnumerationExhaustivelySmall) {
    props::dynprog_vs_enumeration(4);
}

TEST(Dynprog, MatchesEnumerationRandomly) {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 400; ++trial) {
        int m = 2 + static_cast<int>(rng() % 2);
        int g = 4 + static_cast<int>(rng() % 7);
        GameParams p(m, g + 2, g);
        ZobristTables tables(p, trial);
        DpScratch scratch;
        ItemMultiset items = random_items(rng, g, 8);
        std::vector<int> counts = items.raw_counts();
        EXPECT_EQ(dynprog_max(items, p, tables, scratch),
                  oracle::oracle_max_item(counts, m, g));
    }
}

TEST(Dynprog, DedupNeverChangesTheResult) {
    std::mt19937 rng(29);
    for (int trial = 0; trial < 200; ++trial) {
        int m = 2 + static_cast<int>(rng() % 2);
        int g = 4 + static_cast<int>(rng() % 7);
        GameParams p(m, g + 2, g);
        ZobristTables tables(p, trial);
        ItemMultiset items = random_items(rng, g, 7);
        DpScratch with_dedup;
        DpScratch without_dedup;
        without_dedup.use_dedup = false;
        EXPECT_EQ(dynprog_max(items, p, tables, with_dedup),
                  dynprog_max(items, p, tables, without_dedup));
    }
}

TEST(Dynprog, FeasibilityDecisionEquivalence) {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        int m = 2 + static_cast<int>(rng() % 2);
        int g = 3 + static_cast<int>(rng() % 6);
        GameParams p(m, g + 2, g);
        ZobristTables tables(p, trial);
        DpScratch scratch;
        ItemMultiset items = random_items(rng, g, 7);
        oracle::PackOracle packer(m, g);
        EXPECT_EQ(dynprog_max(items, p, tables, scratch) >= 0,
                  packer.feasible(items.raw_counts()));
    }
}

TEST(FindPacking, ProducesValidCertificates) {
    std::mt19937 rng(37);
    GameParams p(3, 19, 14);
    for (int trial = 0; trial < 200; ++trial) {
        ItemMultiset items = random_items(rng, 14, 7);
        oracle::PackOracle packer(3, 14);
        auto cert = find_packing(items, p);
        EXPECT_EQ(cert.has_value(), packer.feasible(items.raw_counts()));
        if (cert.has_value())
            EXPECT_TRUE(validate_packing(items, *cert, p));
    }
}

TEST(FeasibilityCacheQuery, TernaryAnswers) {
    GameParams p(3, 19, 14);
    ZobristTables tables(p, 3);
    FeasibilityCache cache(12);
    ItemMultiset items = make_items(14, {9, 9, 9});
    uint64_t items_hash = hash_items(tables, items);
    EXPECT_EQ(query_feasibility_cache(cache, tables, items_hash, items, 5),
              Ternary::unknown);

    // the pipeline proves y = 5 for {9,9,9} and caches both facts
    ObfState obf(p);
    obf.init_from(items);
    DpScratch scratch;
    MaxFeasTrace trace;
    int y = max_feasible(items, p, std::nullopt, obf, &cache, tables,
                         items_hash, scratch, &trace);
    ASSERT_EQ(y, 5);
    EXPECT_EQ(query_feasibility_cache(cache, tables, items_hash, items, 5),
              Ternary::feasible);
    EXPECT_EQ(query_feasibility_cache(cache, tables, items_hash, items, 6),
              Ternary::infeasible);
}

TEST(MaxFeas, RootAllowsAnyGuaranteeItem) {
    GameParams p(3, 19, 14);
    ZobristTables tables(p, 5);
    ItemMultiset items(14);
    ObfState obf(p);
    obf.init_from(items);
    DpScratch scratch;
    EXPECT_EQ(max_feasible(items, p, std::nullopt, obf, nullptr, tables,
                           hash_items(tables, items), scratch),
              14);
}

TEST(MaxFeas, OneEmptyBinLeft) {
    GameParams p(3, 19, 14);
    ZobristTables tables(p, 5);
    ItemMultiset items = make_items(14, {14, 14});
    ObfState obf(p);
    obf.init_from(items);
    DpScratch scratch;
    EXPECT_EQ(max_feasible(items, p, std::nullopt, obf, nullptr, tables,
                           hash_items(tables, items), scratch),
              14);
}

TEST(MaxFeas, CascadeMatchesDynprogOnRandomInstances) {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 10000; ++trial) {
        int m = 2 + static_cast<int>(rng() % 2);
        int g = 3 + static_cast<int>(rng() % 8);
        GameParams p(m, g + 1 + static_cast<int>(rng() % 4), g);
        ZobristTables tables(p, trial);
        DpScratch scratch;
        FeasibilityCache cache(10);
        ItemMultiset items = random_items(rng, g, 6);
        if (items.total() > m * g)
            continue;
        oracle::PackOracle packer(m, g);
        if (!packer.feasible(items.raw_counts()))
            continue;
        ObfState obf(p);
        obf.init_from(items);
        int exact = dynprog_max(items, p, tables, scratch);
        // prev_y is an arbitrary sound upper bound from the parent vertex
        std::optional<int> prev_y;
        if (rng() % 2 == 0)
            prev_y = std::min(g, exact + static_cast<int>(rng() % 3));
        MaxFeasTrace trace;
        int y = max_feasible(items, p, prev_y, obf, &cache, tables,
                             hash_items(tables, items), scratch, &trace);
        ASSERT_EQ(y, exact);
        // sandwich invariant at every recorded stage
        ASSERT_LE(trace.init.lb, exact);
        ASSERT_GE(trace.init.ub, exact);
        ASSERT_LE(trace.lb_after_cache, exact);
        ASSERT_GE(trace.ub_after_cache, exact);
        ASSERT_LE(trace.lb_after_bfd, exact);
    }
}

TEST(MaxFeas, EstimatesNeverExceedExact) {
    std::mt19937 rng(43);
    for (int trial = 0; trial < 1000; ++trial) {
        int m = 2 + static_cast<int>(rng() % 2);
        int g = 3 + static_cast<int>(rng() % 8);
        GameParams p(m, g + 2, g);
        ZobristTables tables(p, trial);
        DpScratch scratch;
        ItemMultiset items = random_items(rng, g, 6);
        oracle::PackOracle packer(m, g);
        if (!packer.feasible(items.raw_counts()))
            continue;
        int exact = dynprog_max(items, p, tables, scratch);
        EXPECT_LE(bfd_lowerbound(items, p), exact);
        ObfState obf(p);
        obf.init_from(items);
        auto obf_lb = obf.lower_bound();
        if (obf_lb.has_value())
            EXPECT_LE(*obf_lb, exact);
    }
}
