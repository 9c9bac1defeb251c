#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "binstretch/checker.hpp"
#include "binstretch/dot.hpp"
#include "binstretch/search.hpp"
#include "oracle.hpp"
#include "properties.hpp"

using namespace binstretch;

namespace {

std::string read_fixture(const char* name) {
    std::ifstream in(std::string(BINSTRETCH_TEST_DATA_DIR) + "/" + name,
                     std::ios::binary);
    EXPECT_TRUE(in.good()) << "missing fixture " << name;
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

StrategyDag record_game(const GameParams& p, uint64_t seed = 42) {
    ZobristTables tables(p, seed);
    StateCache scache(14);
    FeasibilityCache fcache(14);
    SequentialResult r =
        sequential(p, {}, tables, &scache, &fcache, {}, true);
    EXPECT_TRUE(r.found);
    return tree_to_dag(*r.tree);
}

}  // namespace

TEST(TreeToDag, NoDuplicatesKeepsNodeCount) {
    GameParams p(2, 4, 3);
    ZobristTables tables(p, 1);
    StateCache scache(12);
    FeasibilityCache fcache(12);
    SequentialResult r = sequential(p, {}, tables, &scache, &fcache, {}, true);
    ASSERT_TRUE(r.found && r.tree.has_value());
    StrategyDag dag = tree_to_dag(*r.tree);
    EXPECT_LE(dag.nodes.size(), r.tree->node_count());
    EXPECT_EQ(dag.root, 0);  // interning starts at the tree root
}

TEST(TreeToDag, MergesSharedStates) {
    // two placements of the first item of the 4/3 game lead to one canonical
    // child, and deeper layers share states across branches
    GameParams p(3, 4, 3);
    StrategyDag dag = record_game(p);
    Verdict v = check(dag, p);
    EXPECT_TRUE(v.accepted) << Verdict::reason_name(v.reason);
}

TEST(Fig1, ParsesToSevenNodes) {
    ParsedDot parsed = parse_dot(read_fixture("fig1.dot"));
    EXPECT_EQ(parsed.params, GameParams(3, 4, 3));
    EXPECT_EQ(parsed.dag.nodes.size(), 7u);
    EXPECT_EQ(parsed.dag.edge_count(), 6u);
    EXPECT_EQ(dag_max_depth(parsed.dag), 5u);
}

TEST(Compression, ForcedPairOfTens) {
    // loads [11,9,0] with a recorded run of two tens collapses to a single
    // compressed node carrying the pair and the final certificate
    StrategyDag dag;
    dag.nodes.resize(2);
    dag.root = 0;
    dag.nodes[0].loads = {11, 9, 0};
    dag.nodes[0].items = {{4, 2}, {3, 1}, {9, 1}};
    dag.nodes[0].next_items = {10};
    dag.nodes[0].children = {1};
    dag.nodes[1].loads = {11, 10, 9};
    dag.nodes[1].items = {{4, 2}, {3, 1}, {9, 1}, {10, 1}};
    dag.nodes[1].next_items = {10};
    dag.nodes[1].packing =
        PackingCertificate{{{10, 4}, {10, 4}, {9, 3}}};

    StrategyDag compressed = compress_last_layer(dag);
    ASSERT_EQ(compressed.nodes.size(), 1u);
    EXPECT_EQ(compressed.nodes[0].next_items, (std::vector<int>{10, 10}));
    EXPECT_EQ(compressed.nodes[0].packing, dag.nodes[1].packing);
}

TEST(Compression, UntouchedWhenNothingForced) {
    ParsedDot parsed = parse_dot(read_fixture("fig1.dot"));
    StrategyDag compressed = compress_last_layer(parsed.dag);
    // the 4/3 strategy adapts at every step except trivial single leaves,
    // so compression must preserve semantics either way
    GameParams p(3, 4, 3);
    EXPECT_TRUE(check(parsed.dag, p).accepted);
    EXPECT_TRUE(check(compressed, p).accepted);
}

TEST(Compression, SemanticsPreservedOnRecordedGames) {
    for (auto [m, t, g] : {std::tuple{2, 4, 3}, {3, 4, 3}, {3, 7, 5}}) {
        GameParams p(m, t, g);
        ZobristTables tables(p, 5);
        StateCache scache(12);
        FeasibilityCache fcache(12);
        SequentialResult r =
            sequential(p, {}, tables, &scache, &fcache, {}, true);
        if (!r.found)
            continue;
        StrategyDag dag = tree_to_dag(*r.tree);
        StrategyDag cdag = compress_last_layer(dag);
        EXPECT_EQ(check(dag, p).accepted, check(cdag, p).accepted);
        EXPECT_TRUE(check(cdag, p).accepted);
        EXPECT_LE(cdag.nodes.size(), dag.nodes.size());
    }
}

TEST(Dot, RoundTripIsByteExact) {
    props::dot_round_trip_corpus();
    // hand-written fixture round-trips through its normal form
    std::string fig1 = read_fixture("fig1.dot");
    ParsedDot parsed = parse_dot(fig1);
    std::string emitted = emit_dot(parsed.dag, parsed.params);
    EXPECT_EQ(emit_dot(parse_dot(emitted).dag, parsed.params), emitted);
}

TEST(Dot, EmptyGraphHasNoRoot) {
    try {
        parse_dot("digraph g {\nbs_m=3;\nbs_t=4;\nbs_g=3;\n}\n");
        FAIL() << "expected a parse error";
    } catch (const DotParseError& e) {
        EXPECT_NE(std::string(e.what()).find("no root"), std::string::npos);
    }
}

TEST(Dot, RejectsCycles) {
    std::string text =
        "digraph g {\nbs_m=1;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"0\" next=\"1\"];\n"
        "b [loads=\"1\" next=\"1\"];\n"
        "c [loads=\"2\" next=\"1\"];\n"
        "a -> b;\nb -> c;\nc -> b;\n}\n";
    EXPECT_THROW(parse_dot(text), DotParseError);
}

TEST(Dot, RejectsDanglingEdges) {
    std::string text =
        "digraph g {\nbs_m=1;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"0\" next=\"1\"];\n"
        "a -> ghost;\n}\n";
    try {
        parse_dot(text);
        FAIL() << "expected a parse error";
    } catch (const DotParseError& e) {
        EXPECT_EQ(e.line(), 6);
    }
}

TEST(Dot, RejectsMalformedAttributes) {
    std::string bad_value =
        "digraph g {\nbs_m=1;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"zero\" next=\"1\"];\n}\n";
    EXPECT_THROW(parse_dot(bad_value), DotParseError);
    std::string unknown_attr =
        "digraph g {\nbs_m=1;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"0\" next=\"1\" shape=\"box\"];\n}\n";
    EXPECT_THROW(parse_dot(unknown_attr), DotParseError);
    std::string wrong_arity =
        "digraph g {\nbs_m=2;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"0\" next=\"1\"];\n}\n";
    EXPECT_THROW(parse_dot(wrong_arity), DotParseError);
}

TEST(Dot, RejectsInconsistentDerivations) {
    // c is reached with different item multisets from a and b
    std::string text =
        "digraph g {\nbs_m=2;\nbs_t=5;\nbs_g=4;\n"
        "a [loads=\"0,0\" next=\"1\"];\n"
        "b [loads=\"1,0\" next=\"2\"];\n"
        "c [loads=\"2,1\" next=\"1\"];\n"
        "d [loads=\"1,0\" next=\"3\"];\n"
        "a -> b;\nb -> c;\na -> d;\nd -> c;\n}\n";
    try {
        parse_dot(text);
        FAIL() << "expected a parse error";
    } catch (const DotParseError& e) {
        EXPECT_NE(std::string(e.what()).find("derivation"), std::string::npos);
    }
}

TEST(Dot, RejectsCompressedNodesWithChildren) {
    std::string text =
        "digraph g {\nbs_m=1;\nbs_t=4;\nbs_g=3;\n"
        "a [loads=\"0\" next=\"1,1\"];\n"
        "b [loads=\"1\" next=\"1\"];\n"
        "a -> b;\n}\n";
    EXPECT_THROW(parse_dot(text), DotParseError);
}

TEST(DagUnfold, CheckerEquivalentToOriginalTree) {
    // unfold the DAG back into a tree and compare checker verdicts
    GameParams p(3, 4, 3);
    ZobristTables tables(p, 9);
    StateCache scache(12);
    FeasibilityCache fcache(12);
    SequentialResult r = sequential(p, {}, tables, &scache, &fcache, {}, true);
    ASSERT_TRUE(r.found && r.tree.has_value());
    StrategyDag dag = tree_to_dag(*r.tree);

    // a DAG unfolds by duplicating shared nodes
    StrategyDag unfolded;
    auto copy = [&](auto&& self, int u) -> int {
        int idx = static_cast<int>(unfolded.nodes.size());
        unfolded.nodes.push_back(dag.nodes[u]);
        unfolded.nodes[idx].children.clear();
        unfolded.nodes[idx].name.clear();
        std::vector<int> children;
        for (int c : dag.nodes[u].children)
            children.push_back(self(self, c));
        unfolded.nodes[idx].children = std::move(children);
        return idx;
    };
    unfolded.root = copy(copy, dag.root);
    EXPECT_GE(unfolded.nodes.size(), dag.nodes.size());
    EXPECT_EQ(check(dag, p).accepted, check(unfolded, p).accepted);
    EXPECT_TRUE(check(unfolded, p).accepted);
}
