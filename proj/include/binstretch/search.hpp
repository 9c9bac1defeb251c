#ifndef BINSTRETCH_SEARCH_HPP
#define BINSTRETCH_SEARCH_HPP

#include <array>
#include <atomic>
#include <cassert>
#include <functional>
#include <set>

#include "binstretch/cache.hpp"
#include "binstretch/feasibility.hpp"
#include "binstretch/game.hpp"
#include "binstretch/pruning.hpp"
#include "binstretch/strategy_tree.hpp"
#include "binstretch/zobrist.hpp"

// The minimax engine. eval_adv picks the adversary's items, eval_alg the
// placements; the game is determinate, so results are exact booleans and no
// alpha-beta window is needed. Verdicts are computed in a first pass with
// caching; winning strategies are recorded in a second descent that replays
// only the adversary-winning branch.

namespace binstretch {

enum class Winner : uint8_t { algorithm, adversary };

enum class ItemOrder { largest_first, smallest_first };

struct SearchOptions {
    int monotonicity = -1;  // -1 or g-1: full generality
    bool use_gs = true;
    bool use_large_item = true;
    bool use_five_nine = true;
    bool use_state_cache = true;
    bool two_sided_cache = false;
    ItemOrder item_order = ItemOrder::largest_first;
    int depth_budget = 0;    // adversary moves; 0 = m*g + 2
    uint64_t max_nodes = 0;  // abort knob for out-of-budget instances; 0 = off

    int resolved_monotonicity(const GameParams& params) const {
        int full = params.guarantee - 1;
        if (monotonicity < 0 || monotonicity > full)
            return full;
        return monotonicity;
    }
    bool tracks_last_item(const GameParams& params) const {
        return resolved_monotonicity(params) < params.guarantee - 1;
    }
};

struct SearchStats {
    uint64_t adversary_nodes = 0;
    uint64_t algorithm_nodes = 0;
    uint64_t cache_hits = 0;
    uint64_t gs_prunes = 0;
    uint64_t heuristic_wins = 0;
    uint64_t dp_calls = 0;

    void accumulate(const SearchStats& other) {
        adversary_nodes += other.adversary_nodes;
        algorithm_nodes += other.algorithm_nodes;
        cache_hits += other.cache_hits;
        gs_prunes += other.gs_prunes;
        heuristic_wins += other.heuristic_wins;
        dp_calls += other.dp_calls;
    }
};

using ProgressFn = std::function<void(const SearchStats&)>;

class SearchContext {
  public:
    SearchContext(const GameParams& params, const SearchOptions& opts,
                  const ZobristTables& tables, StateCache* state_cache,
                  FeasibilityCache* feas_cache,
                  const std::atomic<uint8_t>* cancel = nullptr)
        : params_(params),
          opts_(opts),
          tables_(tables),
          state_cache_(state_cache),
          feas_cache_(feas_cache),
          cancel_(cancel),
          cfg_(BinConfiguration::empty_start(params)),
          obf_(params) {
        if (params.bins > kMaxEngineBins)
            throw std::invalid_argument("search engine supports at most 16 bins");
        if (params.guarantee > kMaxEngineSize)
            throw std::invalid_argument("search engine supports guarantee up to 255");
        monotonicity_ = opts.resolved_monotonicity(params);
        track_last_ = opts.tracks_last_item(params);
        depth_budget_ = opts.depth_budget > 0
                            ? opts.depth_budget
                            : params.bins * params.guarantee + 2;
    }

    // Full evaluation from `start`. The verdict is exact up to the 63-bit
    // cache payload caveat; emitted strategies are re-certified downstream.
    Winner evaluate(const BinConfiguration& start) {
        load_state(start);
        return eval_adv(std::nullopt);
    }

    // Records the adversary's winning strategy from `start`. Callers must
    // have established that the adversary wins there.
    std::unique_ptr<StrategyTreeNode> record(const BinConfiguration& start) {
        load_state(start);
        return record_adv(std::nullopt);
    }

    bool aborted() const { return aborted_; }
    SearchStats stats() const {
        SearchStats s = stats_;
        s.dp_calls = scratch_.dp_calls;
        return s;
    }
    const GameParams& params() const { return params_; }

    void set_progress(ProgressFn fn, uint64_t interval) {
        progress_ = std::move(fn);
        progress_interval_ = interval;
    }

    void set_cancel(const std::atomic<uint8_t>* cancel) { cancel_ = cancel; }

  private:
    struct Undo {
        std::array<int, kMaxEngineBins> loads;
        std::optional<int> last_item;
        uint64_t cfg_hash;
        uint64_t items_hash;
    };

    void load_state(const BinConfiguration& start) {
        if (static_cast<int>(start.loads.size()) != params_.bins)
            throw std::invalid_argument("start configuration has wrong bin count");
        if (!is_canonical(start.loads) || max_load(start) >= params_.target)
            throw std::invalid_argument("start configuration is not a live canonical state");
        long long sum = 0;
        for (int l : start.loads)
            sum += l;
        if (sum != start.items.total())
            throw std::invalid_argument("start loads do not match item volume");
        cfg_ = start;
        if (!track_last_)
            cfg_.last_item.reset();
        cfg_hash_ = hash_config(tables_, cfg_);
        items_hash_ = hash_items(tables_, cfg_.items);
        obf_.init_from(cfg_.items);
        aborted_ = false;
    }

    Undo apply_place(int item, int bin) {
        Undo u;
        std::copy(cfg_.loads.begin(), cfg_.loads.end(), u.loads.begin());
        u.last_item = cfg_.last_item;
        u.cfg_hash = cfg_hash_;
        u.items_hash = items_hash_;

        int val = cfg_.loads[bin] + item;
        int pos = bin;
        while (pos > 0 && cfg_.loads[pos - 1] < val) {
            cfg_.loads[pos] = cfg_.loads[pos - 1];
            --pos;
        }
        cfg_.loads[pos] = val;
        for (int i = pos; i <= bin; ++i)
            cfg_hash_ ^= tables_.load_key_raw(i, u.loads[i]) ^
                         tables_.load_key_raw(i, cfg_.loads[i]);

        int freq = cfg_.items.count(item);
        uint64_t flip = tables_.item_key_raw(item, freq) ^
                        tables_.item_key_raw(item, freq + 1);
        cfg_.items.add(item);
        items_hash_ ^= flip;
        cfg_hash_ ^= flip;

        if (track_last_) {
            if (cfg_.last_item.has_value())
                cfg_hash_ ^= tables_.last_key(*cfg_.last_item);
            cfg_.last_item = item;
            cfg_hash_ ^= tables_.last_key(item);
        }
        return u;
    }

    void undo_place(int item, const Undo& u) {
        std::copy(u.loads.begin(), u.loads.begin() + params_.bins,
                  cfg_.loads.begin());
        cfg_.items.remove(item);
        cfg_.last_item = u.last_item;
        cfg_hash_ = u.cfg_hash;
        items_hash_ = u.items_hash;
    }

    std::optional<int> min_next_item() const {
        if (!track_last_ || !cfg_.last_item.has_value())
            return std::nullopt;
        int lo = *cfg_.last_item - monotonicity_;
        return lo > 1 ? std::optional<int>(lo) : std::nullopt;
    }

    FeasEnv feas_env() {
        return FeasEnv{cfg_.items, params_,  tables_,
                       items_hash_, feas_cache_, scratch_};
    }

    // The restriction narrows only the searched candidate list; heuristic
    // witnesses stand on their own and the emitted strategy is certified, so
    // they fire regardless of the last item.
    std::optional<AdversaryWitness> try_heuristics() {
        if (opts_.use_large_item &&
            cfg_.loads[0] >= params_.target - params_.guarantee) {
            FeasEnv env = feas_env();
            if (auto w = large_item_heuristic(cfg_, params_, env))
                return w;
        }
        if (opts_.use_five_nine && params_.target == 19 &&
            params_.guarantee == 14 && cfg_.loads[0] >= 5 &&
            cfg_.loads[params_.bins - 1] >= 1) {
            FeasEnv env = feas_env();
            if (auto w = five_nine_heuristic(cfg_, params_, env))
                return w;
        }
        return std::nullopt;
    }

    bool check_abort() {
        if (aborted_)
            return true;
        if ((stats_.adversary_nodes & 0xFFF) == 0) {
            if (cancel_ != nullptr &&
                cancel_->load(std::memory_order_relaxed) != 0)
                aborted_ = true;
            if (progress_ && stats_.adversary_nodes % progress_interval_ == 0)
                progress_(stats());
        }
        if (opts_.max_nodes != 0 && stats_.adversary_nodes > opts_.max_nodes)
            aborted_ = true;
        return aborted_;
    }

    Winner eval_adv(std::optional<int> prev_y) {
        ++stats_.adversary_nodes;
        if (check_abort())
            return Winner::algorithm;  // unwinding value, never cached
        if (cfg_.items.item_count() >= depth_budget_)
            return Winner::algorithm;  // adversary ran out of moves

        if (opts_.use_state_cache && state_cache_ != nullptr) {
            if (auto hit = state_cache_->lookup(cfg_hash_)) {
                ++stats_.cache_hits;
                return *hit ? Winner::algorithm : Winner::adversary;
            }
        }

        // same verdict the per-candidate checks in eval_alg would reach,
        // established once per configuration
        if (opts_.use_gs && (gs1(cfg_.loads, params_) || gs2(cfg_.loads, params_) ||
                             gs3(cfg_.loads, params_))) {
            ++stats_.gs_prunes;
            if (opts_.use_state_cache && state_cache_ != nullptr)
                state_cache_->insert(cfg_hash_, true);
            return Winner::algorithm;
        }

        if (try_heuristics().has_value()) {
            ++stats_.heuristic_wins;
            if (opts_.two_sided_cache && state_cache_ != nullptr)
                state_cache_->insert(cfg_hash_, false);
            return Winner::adversary;
        }

        int y = max_feasible(cfg_.items, params_, prev_y, obf_, feas_cache_,
                             tables_, items_hash_, scratch_);
        int lo = 1;
        if (auto mn = min_next_item())
            lo = *mn;

        bool desc = opts_.item_order == ItemOrder::largest_first;
        for (int e = desc ? y : lo; desc ? e >= lo : e <= y; desc ? --e : ++e) {
            obf_.insert(e);
            Winner w = eval_alg(e, y);
            obf_.remove(e);
            if (w == Winner::adversary) {
                if (!aborted_ && opts_.two_sided_cache && state_cache_ != nullptr)
                    state_cache_->insert(cfg_hash_, false);
                return Winner::adversary;
            }
            if (aborted_)
                return Winner::algorithm;
        }

        if (!aborted_ && opts_.use_state_cache && state_cache_ != nullptr)
            state_cache_->insert(cfg_hash_, true);
        return Winner::algorithm;
    }

    Winner eval_alg(int item, int y_here) {
        ++stats_.algorithm_nodes;
        if (opts_.use_gs && (gs1(cfg_.loads, params_) || gs2(cfg_.loads, params_) ||
                             gs3(cfg_.loads, params_))) {
            ++stats_.gs_prunes;
            return Winner::algorithm;
        }
        for (int b = 0; b < params_.bins; ++b) {
            if (b > 0 && cfg_.loads[b] == cfg_.loads[b - 1])
                continue;
            if (cfg_.loads[b] + item > params_.target - 1)
                continue;
            Undo u = apply_place(item, b);
            Winner w = eval_adv(y_here);
            undo_place(item, u);
            if (w == Winner::algorithm)
                return Winner::algorithm;
            if (aborted_)
                return Winner::adversary;  // unwinding value
        }
        // no surviving placement (possibly none legal at all): adversary wins
        return Winner::adversary;
    }

    std::unique_ptr<StrategyTreeNode> record_adv(std::optional<int> prev_y) {
        if (auto w = try_heuristics()) {
            if (w->kind == AdversaryWitness::Kind::large_item) {
                auto node = std::make_unique<StrategyTreeNode>(
                    cfg_.loads, cfg_.items, cfg_.last_item);
                node->next_items = w->forced_items;
                ItemMultiset with_next = cfg_.items;
                for (int it : w->forced_items)
                    with_next.add(it);
                auto packing = find_packing(with_next, params_);
                if (!packing.has_value())
                    throw std::logic_error("large-item witness lost feasibility");
                node->packing = std::move(*packing);
                return node;
            }
            FeasEnv env = feas_env();
            return five_nine_expand(cfg_, params_, env);
        }

        int y = max_feasible(cfg_.items, params_, prev_y, obf_, feas_cache_,
                             tables_, items_hash_, scratch_);
        int lo = 1;
        if (auto mn = min_next_item())
            lo = *mn;
        bool desc = opts_.item_order == ItemOrder::largest_first;
        for (int e = desc ? y : lo; desc ? e >= lo : e <= y; desc ? --e : ++e) {
            obf_.insert(e);
            Winner w = eval_alg(e, y);
            if (w != Winner::adversary) {
                obf_.remove(e);
                continue;
            }
            auto node = std::make_unique<StrategyTreeNode>(cfg_.loads, cfg_.items,
                                                           cfg_.last_item);
            node->next_items = {e};
            bool overflow = false;
            for (int b = 0; b < params_.bins; ++b) {
                if (b > 0 && cfg_.loads[b] == cfg_.loads[b - 1])
                    continue;
                if (cfg_.loads[b] + e > params_.target - 1) {
                    overflow = true;
                    continue;
                }
                Undo u = apply_place(e, b);
                node->children.push_back(record_adv(y));
                undo_place(e, u);
            }
            obf_.remove(e);
            if (overflow || node->children.empty()) {
                ItemMultiset with_next = cfg_.items;
                with_next.add(e);
                auto packing = find_packing(with_next, params_);
                if (!packing.has_value())
                    throw std::logic_error("recorded item lost feasibility");
                node->packing = std::move(*packing);
            }
            return node;
        }
        throw std::logic_error("recording found no winning adversary move");
    }

    GameParams params_;
    SearchOptions opts_;
    const ZobristTables& tables_;
    StateCache* state_cache_;
    FeasibilityCache* feas_cache_;
    const std::atomic<uint8_t>* cancel_;

    BinConfiguration cfg_;
    uint64_t cfg_hash_ = 0;
    uint64_t items_hash_ = 0;
    ObfState obf_;
    DpScratch scratch_;
    SearchStats stats_;
    int monotonicity_ = 0;
    bool track_last_ = false;
    int depth_budget_ = 0;
    bool aborted_ = false;
    ProgressFn progress_;
    uint64_t progress_interval_ = uint64_t{1} << 22;
};

// All canonical configurations the algorithm player can reach while the
// adversary sends exactly `prefix`. Placements that would hit the target are
// adversary wins and drop out; the lower bound from a prefix holds iff the
// adversary wins every configuration returned.
inline std::vector<BinConfiguration> apply_initial_strategy(
    const GameParams& params, std::span<const int> prefix,
    const ZobristTables& tables) {
    std::vector<BinConfiguration> configs{BinConfiguration::empty_start(params)};
    DpScratch scratch;
    ItemMultiset sent(params.guarantee);
    for (int item : prefix) {
        if (item < 1 || item > params.guarantee)
            throw std::invalid_argument("initial strategy item out of range");
        sent.add(item);
        if (dynprog_max(sent, params, tables, scratch) < 0)
            throw std::invalid_argument("initial strategy prefix is infeasible");
        std::set<std::vector<int>> seen;
        std::vector<BinConfiguration> next;
        for (const auto& cfg : configs) {
            for (int b = 0; b < params.bins; ++b) {
                if (b > 0 && cfg.loads[b] == cfg.loads[b - 1])
                    continue;
                if (cfg.loads[b] + item > params.target - 1)
                    continue;
                BinConfiguration child = add_item(cfg, item, b);
                if (seen.insert(child.loads).second)
                    next.push_back(std::move(child));
            }
        }
        configs = std::move(next);
        if (configs.empty())
            break;  // adversary already won inside the prefix
    }
    return configs;
}

struct SequentialResult {
    bool found = false;
    bool aborted = false;
    std::optional<StrategyTree> tree;
    SearchStats stats;
};

namespace detail {

// Tree chain for the forced prefix: one node per prefix item, children per
// surviving canonical placement, then the recorded subgame strategies.
inline std::unique_ptr<StrategyTreeNode> record_prefix(
    const BinConfiguration& cfg, std::span<const int> prefix, size_t level,
    bool track_last, SearchContext& ctx, const GameParams& params) {
    if (level == prefix.size())
        return ctx.record(cfg);
    int item = prefix[level];
    auto node =
        std::make_unique<StrategyTreeNode>(cfg.loads, cfg.items, cfg.last_item);
    node->next_items = {item};
    bool overflow = false;
    for (int b = 0; b < params.bins; ++b) {
        if (b > 0 && cfg.loads[b] == cfg.loads[b - 1])
            continue;
        if (cfg.loads[b] + item > params.target - 1) {
            overflow = true;
            continue;
        }
        BinConfiguration child = add_item(cfg, item, b);
        child.last_item.reset();  // prefix items never restrict the search
        node->children.push_back(
            record_prefix(child, prefix, level + 1, track_last, ctx, params));
    }
    if (overflow || node->children.empty()) {
        ItemMultiset with_next = cfg.items;
        with_next.add(item);
        auto packing = find_packing(with_next, params);
        if (!packing.has_value())
            throw std::logic_error("prefix item lost feasibility");
        node->packing = std::move(*packing);
    }
    return node;
}

}  // namespace detail

// The sequential driver: evaluates every start configuration induced by the
// (possibly empty) initial prefix; found iff the adversary wins them all.
// Under a restriction, the first item searched after a forced prefix is
// itself unrestricted: the restriction binds pairs of searched items only.
// Start configurations therefore carry no last-item mark.
inline SequentialResult sequential(
    const GameParams& params, const SearchOptions& opts,
    const ZobristTables& tables, StateCache* state_cache,
    FeasibilityCache* feas_cache, std::span<const int> prefix = {},
    bool record = false, const std::atomic<uint8_t>* cancel = nullptr,
    ProgressFn progress = nullptr, uint64_t progress_interval = 0) {
    SequentialResult result;
    bool track = opts.tracks_last_item(params);

    std::vector<BinConfiguration> starts =
        apply_initial_strategy(params, prefix, tables);

    SearchContext ctx(params, opts, tables, state_cache, feas_cache, cancel);
    if (progress)
        ctx.set_progress(progress, progress_interval ? progress_interval
                                                     : (uint64_t{1} << 22));
    result.found = true;
    for (const auto& start : starts) {
        Winner w = ctx.evaluate(start);
        if (ctx.aborted()) {
            result.aborted = true;
            result.found = false;
            break;
        }
        if (w == Winner::algorithm) {
            result.found = false;
            break;
        }
    }
    result.stats = ctx.stats();

    if (result.found && record) {
        BinConfiguration root = BinConfiguration::empty_start(params);
        StrategyTree tree;
        tree.root = detail::record_prefix(root, prefix, 0, track, ctx, params);
        result.tree = std::move(tree);
    }
    return result;
}

struct MonotonicityResult {
    bool found = false;
    bool aborted = false;
    std::optional<int> k_min;
    std::optional<StrategyTree> tree;
    SearchStats stats;
};

// Smallest monotonicity restriction under which the adversary wins: k = 0
// limits the adversary to non-decreasing item sizes, k = g-1 is the full
// game. Verdict caches cannot be shared between restrictions and are cleared
// per step; feasibility facts carry over.
inline MonotonicityResult iterate_monotonicity(
    const GameParams& params, const SearchOptions& base_opts,
    const ZobristTables& tables, StateCache* state_cache,
    FeasibilityCache* feas_cache, std::span<const int> prefix = {},
    bool record = false, const std::atomic<uint8_t>* cancel = nullptr,
    ProgressFn progress = nullptr) {
    MonotonicityResult result;
    for (int k = 0; k <= params.guarantee - 1; ++k) {
        SearchOptions opts = base_opts;
        opts.monotonicity = k;
        if (state_cache != nullptr)
            state_cache->clear();
        SequentialResult r = sequential(params, opts, tables, state_cache,
                                        feas_cache, prefix, record, cancel,
                                        progress);
        result.stats.accumulate(r.stats);
        if (r.aborted) {
            result.aborted = true;
            return result;
        }
        if (r.found) {
            result.found = true;
            result.k_min = k;
            result.tree = std::move(r.tree);
            return result;
        }
    }
    return result;
}

}  // namespace binstretch

#endif  // BINSTRETCH_SEARCH_HPP
