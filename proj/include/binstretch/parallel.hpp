#ifndef BINSTRETCH_PARALLEL_HPP
#define BINSTRETCH_PARALLEL_HPP

#include <cmath>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>
#include <variant>

#include "binstretch/search.hpp"

// Coordinator/worker evaluation: the coordinator expands the game tree to a
// depth/load frontier, the frontier leaves become tasks, workers evaluate
// tasks with the shared caches, and results propagate back up with minimax
// short-circuiting. Tasks whose outcome can no longer influence the root are
// pruned. The coordinator and workers communicate only through the message
// types below over in-process queues; the same contract would carry over a
// socket transport.

namespace binstretch {

struct TaskThresholds {
    int depth_k = 6;            // item-count frontier
    double load_fraction = 0.3; // fraction of g; task load l = ceil(fraction*g)

    int load_threshold(const GameParams& params) const {
        return static_cast<int>(
            std::ceil(load_fraction * params.guarantee));
    }
};

struct Task {
    int id;
    BinConfiguration config;
};

// Messages of the coordinator/worker contract.
struct MsgAssign {
    std::vector<int> task_ids;
};
struct MsgShutdown {};
struct MsgResult {
    int task_id;
    Winner winner;
    int worker_id;
};
struct MsgBatchRequest {
    int worker_id;
};

using WorkerInboxMsg = std::variant<MsgAssign, MsgShutdown>;
using CoordinatorMsg = std::variant<MsgResult, MsgBatchRequest>;

template <typename T>
class MessageQueue {
  public:
    void push(T msg) {
        {
            std::lock_guard<std::mutex> lock(mutex_);
            queue_.push_back(std::move(msg));
        }
        cv_.notify_one();
    }

    T pop() {
        std::unique_lock<std::mutex> lock(mutex_);
        cv_.wait(lock, [&] { return !queue_.empty(); });
        T msg = std::move(queue_.front());
        queue_.pop_front();
        return msg;
    }

  private:
    std::mutex mutex_;
    std::condition_variable cv_;
    std::deque<T> queue_;
};

// Partial game DAG owned by the coordinator. Adversary vertices are deduped
// on their canonical configuration, so a vertex can have several parents;
// propagation and pruning treat it as a shared subproblem.
struct Frontier {
    struct Vertex {
        enum class Kind : uint8_t { adversary, algorithm, task, decided };
        Kind kind = Kind::adversary;
        std::optional<Winner> value;
        std::vector<int> children;
        std::vector<int> parents;
        int task_id = -1;
        int undecided = 0;
    };

    std::vector<Vertex> verts;
    int root = -1;
    // task id -> frontier vertices carrying it (several after dedup merges)
    std::vector<std::vector<int>> task_vertices;

    bool root_decided() const {
        return root >= 0 && verts[root].value.has_value();
    }
};

namespace detail {

struct FrontierBuilder {
    const GameParams& params;
    const SearchOptions& opts;
    const TaskThresholds& thresholds;
    const ZobristTables& tables;
    StateCache* state_cache;
    FeasibilityCache* feas_cache;

    Frontier frontier;
    std::vector<Task> tasks;
    std::map<std::tuple<std::vector<int>, std::vector<int>, int>, int> interned_adv;
    std::map<std::tuple<std::vector<int>, std::vector<int>, int>, int> task_ids;
    ObfState obf{params};
    DpScratch scratch;
    int monotonicity = 0;
    bool track_last = false;
    int load_limit = 0;

    int new_vertex(Frontier::Vertex::Kind kind) {
        frontier.verts.push_back({});
        frontier.verts.back().kind = kind;
        return static_cast<int>(frontier.verts.size()) - 1;
    }

    int decided_vertex(Winner w) {
        int v = new_vertex(Frontier::Vertex::Kind::decided);
        frontier.verts[v].value = w;
        return v;
    }

    static std::tuple<std::vector<int>, std::vector<int>, int> key_of(
        const BinConfiguration& cfg) {
        return {cfg.loads, cfg.items.raw_counts(), cfg.last_item.value_or(-1)};
    }

    int expand_adv(const BinConfiguration& cfg, std::optional<int> prev_y) {
        auto key = key_of(cfg);
        if (auto it = interned_adv.find(key); it != interned_adv.end())
            return it->second;

        // the first adversary vertex past either threshold becomes a task
        if (cfg.items.total() >= load_limit ||
            cfg.items.item_count() >= thresholds.depth_k) {
            auto tit = task_ids.find(key);
            int tid;
            if (tit != task_ids.end()) {
                tid = tit->second;
            } else {
                tid = static_cast<int>(tasks.size());
                tasks.push_back({tid, cfg});
                task_ids.emplace(key, tid);
                frontier.task_vertices.emplace_back();
            }
            int v = new_vertex(Frontier::Vertex::Kind::task);
            frontier.verts[v].task_id = tid;
            frontier.task_vertices[tid].push_back(v);
            interned_adv.emplace(std::move(key), v);
            return v;
        }

        if (opts.use_state_cache && state_cache != nullptr) {
            uint64_t h = hash_config(tables, cfg);
            if (auto hit = state_cache->lookup(h)) {
                int v = decided_vertex(*hit ? Winner::algorithm
                                            : Winner::adversary);
                interned_adv.emplace(std::move(key), v);
                return v;
            }
        }

        // adversary-win heuristics, mirroring the sequential engine's gates
        {
            ItemMultiset items_copy = cfg.items;
            FeasEnv env{items_copy, params, tables, hash_items(tables, items_copy),
                        feas_cache, scratch};
            bool won = false;
            if (opts.use_large_item &&
                cfg.loads[0] >= params.target - params.guarantee)
                won = large_item_heuristic(cfg, params, env).has_value();
            if (!won && opts.use_five_nine && params.target == 19 &&
                params.guarantee == 14 && cfg.loads[0] >= 5 &&
                cfg.loads[params.bins - 1] >= 1)
                won = five_nine_heuristic(cfg, params, env).has_value();
            if (won) {
                int v = decided_vertex(Winner::adversary);
                interned_adv.emplace(std::move(key), v);
                return v;
            }
        }

        obf.init_from(cfg.items);
        int y = max_feasible(cfg.items, params, prev_y, obf, feas_cache, tables,
                             hash_items(tables, cfg.items), scratch);
        int lo = 1;
        if (track_last && cfg.last_item.has_value())
            lo = std::max(1, *cfg.last_item - monotonicity);

        int v = new_vertex(Frontier::Vertex::Kind::adversary);
        interned_adv.emplace(std::move(key), v);
        std::vector<int> children;
        bool desc = opts.item_order == ItemOrder::largest_first;
        for (int e = desc ? y : lo; desc ? e >= lo : e <= y; desc ? --e : ++e)
            children.push_back(expand_alg(cfg, e, y));
        frontier.verts[v].children = std::move(children);
        for (int c : frontier.verts[v].children)
            frontier.verts[c].parents.push_back(v);
        return v;
    }

    int expand_alg(const BinConfiguration& cfg, int item, int y_here) {
        if (opts.use_gs && (gs1(cfg.loads, params) || gs2(cfg.loads, params) ||
                            gs3(cfg.loads, params)))
            return decided_vertex(Winner::algorithm);
        int v = new_vertex(Frontier::Vertex::Kind::algorithm);
        std::vector<int> children;
        std::set<std::vector<int>> seen;
        for (int b = 0; b < params.bins; ++b) {
            if (b > 0 && cfg.loads[b] == cfg.loads[b - 1])
                continue;
            if (cfg.loads[b] + item > params.target - 1)
                continue;
            BinConfiguration child = add_item(cfg, item, b);
            if (track_last)
                child.last_item = item;
            else
                child.last_item.reset();
            if (!seen.insert(child.loads).second)
                continue;
            children.push_back(expand_adv(child, y_here));
        }
        frontier.verts[v].children = std::move(children);
        for (int c : frontier.verts[v].children)
            frontier.verts[c].parents.push_back(v);
        if (frontier.verts[v].children.empty()) {
            // every placement overflows
            frontier.verts[v].kind = Frontier::Vertex::Kind::decided;
            frontier.verts[v].value = Winner::adversary;
        }
        return v;
    }
};

}  // namespace detail

// Expands the game from the start configurations until every branch reaches
// the task frontier, a cached verdict, a pruning rule, or a heuristic win.
// Tasks are deduplicated on their canonical configuration.
inline std::pair<Frontier, std::vector<Task>> generate_tasks(
    const GameParams& params, const SearchOptions& opts,
    const TaskThresholds& thresholds, const ZobristTables& tables,
    StateCache* state_cache, FeasibilityCache* feas_cache,
    const std::vector<BinConfiguration>& starts) {
    detail::FrontierBuilder builder{params,      opts,       thresholds,
                                    tables,      state_cache, feas_cache};
    builder.monotonicity = opts.resolved_monotonicity(params);
    builder.track_last = opts.tracks_last_item(params);
    builder.load_limit = std::max(1, thresholds.load_threshold(params));

    int root = builder.new_vertex(Frontier::Vertex::Kind::algorithm);
    std::vector<int> children;
    for (const auto& start : starts)
        children.push_back(builder.expand_adv(start, std::nullopt));
    builder.frontier.verts[root].children = std::move(children);
    for (int c : builder.frontier.verts[root].children)
        builder.frontier.verts[c].parents.push_back(root);
    if (builder.frontier.verts[root].children.empty())
        builder.frontier.verts[root].value = Winner::adversary;
    builder.frontier.root = root;
    return {std::move(builder.frontier), std::move(builder.tasks)};
}

namespace detail {

// Minimax propagation over the frontier DAG; worklist-based to keep stack
// depth flat.
inline void propagate(Frontier& f, int vertex, Winner w) {
    std::vector<std::pair<int, Winner>> work{{vertex, w}};
    while (!work.empty()) {
        auto [v, value] = work.back();
        work.pop_back();
        auto& vert = f.verts[v];
        if (vert.value.has_value())
            continue;
        vert.value = value;
        for (int p : vert.parents) {
            auto& parent = f.verts[p];
            if (parent.value.has_value())
                continue;
            bool decides;
            Winner pw;
            if (parent.kind == Frontier::Vertex::Kind::adversary) {
                decides = (value == Winner::adversary);
                pw = Winner::adversary;
            } else {
                decides = (value == Winner::algorithm);
                pw = Winner::algorithm;
            }
            if (decides) {
                work.push_back({p, pw});
            } else if (--parent.undecided == 0) {
                work.push_back({p, parent.kind == Frontier::Vertex::Kind::adversary
                                       ? Winner::algorithm
                                       : Winner::adversary});
            }
        }
    }
}

inline void init_undecided(Frontier& f) {
    // undecided starts at the full edge count; every child decision
    // decrements exactly once when it propagates
    for (auto& v : f.verts)
        v.undecided = static_cast<int>(v.children.size());
    // snapshot the generation-time leaves before firing them, so a vertex
    // decided by an earlier cascade is never propagated twice
    std::vector<std::pair<int, Winner>> seeds;
    for (size_t i = 0; i < f.verts.size(); ++i) {
        if (f.verts[i].value.has_value()) {
            seeds.emplace_back(static_cast<int>(i), *f.verts[i].value);
            f.verts[i].value.reset();
        }
    }
    for (auto [i, w] : seeds)
        propagate(f, i, w);
    // interior vertices with no children at all (e.g. an adversary vertex
    // whose candidate list came up empty)
    for (size_t i = 0; i < f.verts.size(); ++i) {
        auto& v = f.verts[i];
        if (!v.value.has_value() && v.children.empty() &&
            (v.kind == Frontier::Vertex::Kind::adversary ||
             v.kind == Frontier::Vertex::Kind::algorithm)) {
            propagate(f, static_cast<int>(i),
                      v.kind == Frontier::Vertex::Kind::adversary
                          ? Winner::algorithm
                          : Winner::adversary);
        }
    }
}

// A task stays live while some undecided path connects it to the root.
inline std::vector<bool> live_tasks(const Frontier& f, size_t task_count) {
    std::vector<bool> vertex_live(f.verts.size(), false);
    std::vector<int> stack;
    if (f.root >= 0 && !f.verts[f.root].value.has_value()) {
        vertex_live[f.root] = true;
        stack.push_back(f.root);
    }
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int c : f.verts[v].children) {
            if (!vertex_live[c] && !f.verts[c].value.has_value()) {
                vertex_live[c] = true;
                stack.push_back(c);
            }
        }
    }
    std::vector<bool> live(task_count, false);
    for (size_t tid = 0; tid < task_count; ++tid)
        for (int v : f.task_vertices[tid])
            if (vertex_live[v])
                live[tid] = true;
    return live;
}

}  // namespace detail

struct ParallelOptions {
    TaskThresholds thresholds;
    int workers = 2;
    int batch_size = 250;  // paper range 250-500
    bool prune = true;
};

struct ParallelResult {
    bool found = false;
    bool aborted = false;
    std::optional<StrategyTree> tree;
    SearchStats stats;
    size_t task_count = 0;
    size_t tasks_evaluated = 0;
    size_t tasks_pruned = 0;
};

using ParallelProgressFn =
    std::function<void(size_t done, size_t pruned, size_t total)>;

// Coordinator: synchronizes the task table, hands out batches on request,
// ingests results as they stream in, propagates them through the frontier,
// and prunes tasks that can no longer matter. Terminates when the root
// verdict is known.
inline ParallelResult run_parallel(
    const GameParams& params, const SearchOptions& opts,
    const ParallelOptions& popts, const ZobristTables& tables,
    StateCache* state_cache, FeasibilityCache* feas_cache,
    std::span<const int> prefix = {}, bool record = false,
    ParallelProgressFn progress = nullptr,
    const std::atomic<uint8_t>* cancel = nullptr) {
    ParallelResult result;
    bool track = opts.tracks_last_item(params);

    std::vector<BinConfiguration> starts =
        apply_initial_strategy(params, prefix, tables);

    auto [frontier, tasks] = generate_tasks(params, opts, popts.thresholds,
                                            tables, state_cache, feas_cache,
                                            starts);
    result.task_count = tasks.size();
    detail::init_undecided(frontier);

    // per-task cancellation/pruning flags shared with the workers
    std::vector<std::atomic<uint8_t>> pruned_flags(tasks.size());
    for (auto& f : pruned_flags)
        f.store(0, std::memory_order_relaxed);

    MessageQueue<CoordinatorMsg> coordinator_inbox;
    std::vector<std::unique_ptr<MessageQueue<WorkerInboxMsg>>> worker_inboxes;
    int workers = std::max(1, popts.workers);
    for (int i = 0; i < workers; ++i)
        worker_inboxes.push_back(std::make_unique<MessageQueue<WorkerInboxMsg>>());

    // the synchronized task table is shared read-only with every worker
    const std::vector<Task>& task_table = tasks;

    std::vector<std::thread> pool;
    std::vector<SearchStats> worker_stats(workers);
    for (int wid = 0; wid < workers; ++wid) {
        pool.emplace_back([&, wid] {
            SearchContext ctx(params, opts, tables, state_cache, feas_cache);
            coordinator_inbox.push(MsgBatchRequest{wid});
            while (true) {
                WorkerInboxMsg msg = worker_inboxes[wid]->pop();
                if (std::holds_alternative<MsgShutdown>(msg))
                    break;
                const auto& assign = std::get<MsgAssign>(msg);
                for (int tid : assign.task_ids) {
                    if (pruned_flags[tid].load(std::memory_order_relaxed) != 0)
                        continue;  // abandoned before start
                    ctx.set_cancel(&pruned_flags[tid]);
                    Winner w = ctx.evaluate(task_table[tid].config);
                    if (!ctx.aborted())
                        coordinator_inbox.push(MsgResult{tid, w, wid});
                }
                coordinator_inbox.push(MsgBatchRequest{wid});
            }
            worker_stats[wid] = ctx.stats();
        });
    }

    // coordinator loop on the main thread
    size_t next_task = 0;
    size_t done_count = 0;
    int in_flight = 0;  // workers currently holding a batch
    std::vector<bool> has_batch(static_cast<size_t>(workers), false);
    std::vector<bool> task_finished(tasks.size(), false);
    size_t results_since_prune = 0;

    auto mark_pruned = [&](const std::vector<bool>& live) {
        for (size_t tid = 0; tid < tasks.size(); ++tid) {
            if (!live[tid] && !task_finished[tid] &&
                pruned_flags[tid].load(std::memory_order_relaxed) == 0) {
                pruned_flags[tid].store(1, std::memory_order_relaxed);
                task_finished[tid] = true;
                ++result.tasks_pruned;
            }
        }
    };

    auto build_batch = [&]() -> std::vector<int> {
        std::vector<int> ids;
        while (next_task < tasks.size() &&
               static_cast<int>(ids.size()) < popts.batch_size) {
            int tid = static_cast<int>(next_task++);
            if (!task_finished[tid] &&
                pruned_flags[tid].load(std::memory_order_relaxed) == 0)
                ids.push_back(tid);
        }
        return ids;
    };

    std::vector<int> hungry;
    bool cancelled = false;
    while (!frontier.root_decided()) {
        if (cancel != nullptr && cancel->load(std::memory_order_relaxed) != 0) {
            cancelled = true;
            break;
        }
        if (next_task >= tasks.size() && in_flight == 0 &&
            static_cast<int>(hungry.size()) == workers)
            break;  // nothing running, nothing assignable, root still open
        CoordinatorMsg msg = coordinator_inbox.pop();
        if (std::holds_alternative<MsgBatchRequest>(msg)) {
            int wid = std::get<MsgBatchRequest>(msg).worker_id;
            if (has_batch[wid]) {
                has_batch[wid] = false;
                --in_flight;
            }
            std::vector<int> ids = build_batch();
            if (ids.empty()) {
                hungry.push_back(wid);  // replied once work exists or at shutdown
            } else {
                has_batch[wid] = true;
                ++in_flight;
                worker_inboxes[wid]->push(MsgAssign{std::move(ids)});
            }
            continue;
        }
        const auto& res = std::get<MsgResult>(msg);
        if (task_finished[res.task_id])
            continue;
        task_finished[res.task_id] = true;
        ++done_count;
        ++result.tasks_evaluated;
        for (int v : frontier.task_vertices[res.task_id])
            detail::propagate(frontier, v, res.winner);
        if (progress)
            progress(done_count, result.tasks_pruned, tasks.size());
        if (popts.prune && ++results_since_prune >= 32) {
            results_since_prune = 0;
            mark_pruned(detail::live_tasks(frontier, tasks.size()));
        }
        // feed hungry workers
        while (!hungry.empty()) {
            std::vector<int> ids = build_batch();
            if (ids.empty())
                break;
            int wid = hungry.back();
            hungry.pop_back();
            has_batch[wid] = true;
            ++in_flight;
            worker_inboxes[wid]->push(MsgAssign{std::move(ids)});
        }
    }

    for (int wid = 0; wid < workers; ++wid)
        worker_inboxes[wid]->push(MsgShutdown{});
    // prune flags double as cancellation for tasks in flight
    for (auto& f : pruned_flags)
        f.store(1, std::memory_order_relaxed);
    for (auto& th : pool)
        th.join();
    for (const auto& s : worker_stats)
        result.stats.accumulate(s);

    if (cancelled) {
        result.aborted = true;
        return result;
    }
    if (!frontier.root_decided()) {
        result.aborted = true;
        return result;
    }
    result.found = (*frontier.verts[frontier.root].value == Winner::adversary);

    if (result.found && record) {
        SearchContext ctx(params, opts, tables, state_cache, feas_cache);
        BinConfiguration root_cfg = BinConfiguration::empty_start(params);
        StrategyTree tree;
        tree.root = detail::record_prefix(root_cfg, prefix, 0, track, ctx, params);
        result.tree = std::move(tree);
    }
    return result;
}

}  // namespace binstretch

#endif  // BINSTRETCH_PARALLEL_HPP
