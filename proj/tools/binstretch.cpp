// Command-line front end: minimax search for adversary lower-bound
// strategies, DAG emission, verification and statistics.

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "binstretch/checker.hpp"
#include "binstretch/dot.hpp"
#include "binstretch/parallel.hpp"
#include "binstretch/search.hpp"

namespace {

using namespace binstretch;
using Clock = std::chrono::steady_clock;

constexpr int kExitFound = 0;
constexpr int kExitNotFound = 1;
constexpr int kExitError = 2;

struct RunReport {
    GameParams params;
    std::string verdict;  // found / not-found / aborted
    std::optional<int> monotonicity;
    std::optional<size_t> tree_nodes;
    std::optional<size_t> dag_nodes;
    std::optional<size_t> cdag_nodes;
    long long wall_ms = 0;
    uint64_t seed = 0;
    int workers = 1;
    std::string output_file;
    bool verified = false;

    void print(std::ostream& os) const {
        os << "game " << params.target << "/" << params.guarantee << " on "
           << params.bins << " bins: " << verdict;
        if (monotonicity.has_value())
            os << " (monotonicity " << *monotonicity << ")";
        os << ", " << wall_ms << " ms\n";
        os << "verdict=" << verdict << "\n";
        os << "m=" << params.bins << "\n";
        os << "t=" << params.target << "\n";
        os << "g=" << params.guarantee << "\n";
        os << "monotonicity="
           << (monotonicity.has_value() ? std::to_string(*monotonicity) : "none")
           << "\n";
        if (tree_nodes.has_value())
            os << "tree_nodes=" << *tree_nodes << "\n";
        if (dag_nodes.has_value())
            os << "dag_nodes=" << *dag_nodes << "\n";
        if (cdag_nodes.has_value())
            os << "cdag_nodes=" << *cdag_nodes << "\n";
        os << "wall_ms=" << wall_ms << "\n";
        os << "seed=" << seed << "\n";
        os << "workers=" << workers << "\n";
        if (!output_file.empty()) {
            os << "output=" << output_file << "\n";
            os << "verified=" << (verified ? "yes" : "no") << "\n";
        }
    }
};

std::vector<int> parse_item_list(const std::string& text) {
    std::vector<int> items;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        if (part.empty())
            continue;
        items.push_back(std::stoi(part));
    }
    return items;
}

struct SearchConfig {
    int bins = 0, target = 0, guarantee = 0;
    int monotonicity = -1;
    bool iterate = false;
    std::string initial;
    int workers = 1;
    std::string output;
    uint64_t seed = 0x1234abcd;
    int hash_bits = 25;
    bool no_gs = false, no_large_item = false, no_five_nine = false;
    bool two_sided = false;
    std::string item_order = "desc";
    int task_depth = 6;
    double task_load_fraction = 0.3;
    int batch_size = 250;
    uint64_t node_limit = 0;
    bool progress = false;
};

void add_search_flags(CLI::App* cmd, SearchConfig& cfg) {
    cmd->add_option("-m,--bins", cfg.bins, "number of bins")->required();
    cmd->add_option("-t,--target", cfg.target, "adversary target load")
        ->required();
    cmd->add_option("-g,--guarantee", cfg.guarantee, "offline guarantee capacity")
        ->required();
    auto* mono = cmd->add_option("--monotonicity", cfg.monotonicity,
                                 "fixed monotonicity restriction k");
    auto* iter = cmd->add_flag("--iterate-monotonicity", cfg.iterate,
                               "iterate k = 0..g-1, report the smallest win");
    mono->excludes(iter);
    iter->excludes(mono);
    cmd->add_option("--initial", cfg.initial,
                    "comma-separated forced first items, e.g. \"5,1,1\"");
    cmd->add_option("--workers", cfg.workers, "worker thread count")
        ->envname("BINSTRETCH_WORKERS");
    cmd->add_option("--seed", cfg.seed, "Zobrist table seed")
        ->envname("BINSTRETCH_SEED");
    cmd->add_option("--hash-bits", cfg.hash_bits,
                    "log2 of cache entries (default 25)");
    cmd->add_flag("--no-gs", cfg.no_gs, "disable good-situation pruning");
    cmd->add_flag("--no-large-item", cfg.no_large_item,
                  "disable the large item heuristic");
    cmd->add_flag("--no-five-nine", cfg.no_five_nine,
                  "disable the five/nine heuristic");
    cmd->add_flag("--two-sided-cache", cfg.two_sided,
                  "cache adversary wins as well");
    cmd->add_option("--item-order", cfg.item_order,
                    "adversary candidate order: desc or asc")
        ->check(CLI::IsMember({"desc", "asc"}));
    cmd->add_option("--task-depth", cfg.task_depth,
                    "item-count frontier for parallel tasks");
    cmd->add_option("--task-load-fraction", cfg.task_load_fraction,
                    "load frontier as a fraction of g");
    cmd->add_option("--batch-size", cfg.batch_size, "task batch size");
    cmd->add_option("--node-limit", cfg.node_limit,
                    "abort after this many adversary nodes (0 = off)");
    cmd->add_flag("--progress", cfg.progress, "report progress to stderr");
}

SearchOptions to_options(const SearchConfig& cfg) {
    SearchOptions opts;
    opts.monotonicity = cfg.monotonicity;
    opts.use_gs = !cfg.no_gs;
    opts.use_large_item = !cfg.no_large_item;
    opts.use_five_nine = !cfg.no_five_nine;
    opts.two_sided_cache = cfg.two_sided;
    opts.item_order = cfg.item_order == "asc" ? ItemOrder::smallest_first
                                              : ItemOrder::largest_first;
    opts.max_nodes = cfg.node_limit;
    return opts;
}

struct DriverResult {
    bool found = false;
    bool aborted = false;
    std::optional<int> k_min;
    std::optional<StrategyTree> tree;
};

// Runs one (m,t,g) game per the configuration: sequential or parallel,
// fixed monotonicity or iterated.
DriverResult drive(const GameParams& params, const SearchConfig& cfg,
                   const SearchOptions& base_opts, const ZobristTables& tables,
                   StateCache& scache, FeasibilityCache& fcache,
                   std::span<const int> prefix, bool record) {
    DriverResult out;
    ProgressFn seq_progress;
    if (cfg.progress)
        seq_progress = [](const SearchStats& s) {
            std::cerr << "progress: " << s.adversary_nodes
                      << " adversary nodes, " << s.cache_hits << " cache hits, "
                      << s.dp_calls << " dp calls\n";
        };
    ParallelProgressFn par_progress;
    if (cfg.progress)
        par_progress = [](size_t done, size_t pruned, size_t total) {
            std::cerr << "progress: tasks " << done << " done, " << pruned
                      << " pruned of " << total << "\n";
        };

    auto run_one = [&](int k) -> std::pair<bool, bool> {  // found, aborted
        SearchOptions opts = base_opts;
        opts.monotonicity = k;
        scache.clear();
        if (cfg.workers > 1) {
            ParallelOptions popts;
            popts.thresholds.depth_k = cfg.task_depth;
            popts.thresholds.load_fraction = cfg.task_load_fraction;
            popts.workers = cfg.workers;
            popts.batch_size = cfg.batch_size;
            ParallelResult r = run_parallel(params, opts, popts, tables, &scache,
                                            &fcache, prefix, record, par_progress);
            out.tree = std::move(r.tree);
            return {r.found, r.aborted};
        }
        SequentialResult r = sequential(params, opts, tables, &scache, &fcache,
                                        prefix, record, nullptr, seq_progress,
                                        uint64_t{1} << 20);
        out.tree = std::move(r.tree);
        return {r.found, r.aborted};
    };

    if (cfg.iterate) {
        for (int k = 0; k <= params.guarantee - 1; ++k) {
            if (cfg.progress)
                std::cerr << "progress: monotonicity " << k << "\n";
            auto [found, aborted] = run_one(k);
            if (aborted) {
                out.aborted = true;
                return out;
            }
            if (found) {
                out.found = true;
                out.k_min = k;
                return out;
            }
        }
        return out;
    }
    auto [found, aborted] = run_one(cfg.monotonicity);
    out.found = found;
    out.aborted = aborted;
    if (found)
        out.k_min = base_opts.resolved_monotonicity(params);
    return out;
}

int cmd_search(const SearchConfig& cfg) {
    GameParams params(cfg.bins, cfg.target, cfg.guarantee);
    SearchOptions opts = to_options(cfg);
    ZobristTables tables(params, cfg.seed);
    StateCache scache(cfg.hash_bits);
    FeasibilityCache fcache(cfg.hash_bits);
    std::vector<int> prefix = parse_item_list(cfg.initial);

    auto start_time = Clock::now();
    bool record = !cfg.output.empty();
    DriverResult r =
        drive(params, cfg, opts, tables, scache, fcache, prefix, record);

    RunReport report{params};
    report.seed = cfg.seed;
    report.workers = cfg.workers;
    report.verdict = r.aborted ? "aborted" : (r.found ? "found" : "not-found");
    report.monotonicity = r.k_min;
    report.output_file = cfg.output;

    int exit_code = r.found ? kExitFound : kExitNotFound;
    if (r.found && record) {
        if (!r.tree.has_value()) {
            std::cerr << "error: search reported a win but recorded no tree\n";
            return kExitError;
        }
        report.tree_nodes = r.tree->node_count();
        StrategyDag dag = tree_to_dag(*r.tree);
        report.dag_nodes = dag.nodes.size();
        StrategyDag cdag = compress_last_layer(dag);
        report.cdag_nodes = cdag.nodes.size();
        std::string text = emit_dot(cdag, params);
        {
            std::ofstream out(cfg.output, std::ios::binary);
            if (!out) {
                std::cerr << "error: cannot write " << cfg.output << "\n";
                return kExitError;
            }
            out << text;
        }
        // self-certification: never report success on an unverified file
        try {
            std::ifstream in(cfg.output, std::ios::binary);
            std::stringstream buffer;
            buffer << in.rdbuf();
            ParsedDot parsed = parse_dot(buffer.str());
            Verdict v = check(parsed.dag, parsed.params);
            if (!v.accepted) {
                std::cerr << "error: emitted strategy failed verification: "
                          << Verdict::reason_name(v.reason) << " at node "
                          << v.node << "\n";
                return kExitError;
            }
            report.verified = true;
        } catch (const DotParseError& e) {
            std::cerr << "error: emitted strategy failed to parse: " << e.what()
                      << "\n";
            return kExitError;
        }
    }
    report.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         Clock::now() - start_time)
                         .count();
    report.print(std::cout);
    return exit_code;
}

int cmd_verify(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << path << "\n";
        return kExitError;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        ParsedDot parsed = parse_dot(buffer.str());
        Verdict v = check(parsed.dag, parsed.params);
        if (v.accepted) {
            std::cout << "accepted: valid lower bound strategy for "
                      << parsed.params.target << "/" << parsed.params.guarantee
                      << " on " << parsed.params.bins << " bins\n";
            return kExitFound;
        }
        std::cerr << "rejected: " << Verdict::reason_name(v.reason) << " at node "
                  << v.node << " (" << v.detail << ")\n";
        return kExitNotFound;
    } catch (const DotParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_stats(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        std::cerr << "error: cannot read " << path << "\n";
        return kExitError;
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        ParsedDot parsed = parse_dot(buffer.str());
        size_t compressed = 0;
        for (const auto& u : parsed.dag.nodes)
            compressed += u.compressed() ? 1 : 0;
        std::cout << "m=" << parsed.params.bins << "\n"
                  << "t=" << parsed.params.target << "\n"
                  << "g=" << parsed.params.guarantee << "\n"
                  << "nodes=" << parsed.dag.nodes.size() << "\n"
                  << "edges=" << parsed.dag.edge_count() << "\n"
                  << "max_depth=" << dag_max_depth(parsed.dag) << "\n"
                  << "compressed_nodes=" << compressed << "\n";
        return kExitFound;
    } catch (const DotParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitError;
    }
}

int cmd_sweep(SearchConfig cfg, const std::string& ratios) {
    std::stringstream ss(ratios);
    std::string part;
    std::cout << "fraction\tdecimal\tfound\tmon\twall_ms\n";
    while (std::getline(ss, part, ',')) {
        if (part.empty())
            continue;
        size_t slash = part.find('/');
        if (slash == std::string::npos) {
            std::cerr << "error: ratio '" << part << "' is not t/g\n";
            return kExitError;
        }
        SearchConfig one = cfg;
        one.target = std::stoi(part.substr(0, slash));
        one.guarantee = std::stoi(part.substr(slash + 1));
        GameParams params(one.bins, one.target, one.guarantee);
        SearchOptions opts = to_options(one);
        ZobristTables tables(params, one.seed);
        StateCache scache(one.hash_bits);
        FeasibilityCache fcache(one.hash_bits);
        std::vector<int> prefix = parse_item_list(one.initial);
        auto start_time = Clock::now();
        DriverResult r =
            drive(params, one, opts, tables, scache, fcache, prefix, false);
        long long ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                           Clock::now() - start_time)
                           .count();
        std::cout << one.target << "/" << one.guarantee << "\t"
                  << static_cast<double>(one.target) / one.guarantee << "\t"
                  << (r.aborted ? "aborted" : (r.found ? "yes" : "no")) << "\t"
                  << (r.k_min.has_value() ? std::to_string(*r.k_min) : "-")
                  << "\t" << ms << "\n";
    }
    return kExitFound;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Online bin stretching lower bound search and certification"};
    app.require_subcommand(1);

    SearchConfig search_cfg;
    CLI::App* search = app.add_subcommand(
        "search", "search for an adversary lower-bound strategy");
    add_search_flags(search, search_cfg);
    std::string output;
    search->add_option("-o,--output", search_cfg.output,
                       "write the winning strategy DAG to this DOT file");

    std::string verify_path;
    CLI::App* verify =
        app.add_subcommand("verify", "check a strategy DAG file");
    verify->add_option("file", verify_path, "DOT strategy file")->required();

    std::string stats_path;
    CLI::App* stats =
        app.add_subcommand("stats", "node/edge statistics of a strategy file");
    stats->add_option("file", stats_path, "DOT strategy file")->required();

    SearchConfig sweep_cfg;
    std::string ratios;
    CLI::App* sweep =
        app.add_subcommand("sweep", "run a list of t/g ratios and summarize");
    sweep->add_option("-m,--bins", sweep_cfg.bins, "number of bins")->required();
    sweep->add_option("--ratios", ratios, "comma-separated t/g list")
        ->required();
    sweep->add_flag("--iterate-monotonicity", sweep_cfg.iterate,
                    "iterate monotonicity per ratio");
    sweep->add_option("--workers", sweep_cfg.workers, "worker thread count")
        ->envname("BINSTRETCH_WORKERS");
    sweep->add_option("--seed", sweep_cfg.seed, "Zobrist table seed")
        ->envname("BINSTRETCH_SEED");
    sweep->add_option("--hash-bits", sweep_cfg.hash_bits,
                      "log2 of cache entries");
    sweep->add_option("--node-limit", sweep_cfg.node_limit,
                      "abort each ratio after this many adversary nodes");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (search->parsed())
            return cmd_search(search_cfg);
        if (verify->parsed())
            return cmd_verify(verify_path);
        if (stats->parsed())
            return cmd_stats(stats_path);
        if (sweep->parsed())
            return cmd_sweep(sweep_cfg, ratios);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
