#ifndef BINSTRETCH_FEASIBILITY_HPP
#define BINSTRETCH_FEASIBILITY_HPP

#include <array>
#include <cassert>
#include <cstdint>
#include <map>
#include <optional>

#include "binstretch/cache.hpp"
#include "binstretch/game.hpp"
#include "binstretch/zobrist.hpp"

// Computing the maximum feasible next item y for a configuration: cheap
// estimates first (online best fit, cached verdicts, best fit decreasing),
// the exact dynamic program only when a gap remains.

namespace binstretch {

constexpr int kMaxEngineBins = 16;   // search/DP fast paths; core types are general
constexpr int kMaxEngineSize = 255;  // DP tuples store one byte per bin

// Bounds state of the cascade; y' from the previous adversary vertex caps
// the upper bound, m*g - V caps what can still arrive.
struct FeasibilityBounds {
    int lb = 0;
    int ub = 0;
    std::optional<int> prev_y;
    int volume = 0;
};

// Mirrors a best-fit packing of the current search path's items into m bins
// of capacity g. Inserts follow the adversary's item selections, removals
// follow backtracking, so the placement history forms a stack. Items that do
// not fit anywhere park in an unplaced pile and make the state inconsistent
// until they are backtracked away.
class ObfState {
  public:
    explicit ObfState(const GameParams& params)
        : params_(params), sums_(params.bins, 0) {}

    void reset() {
        std::fill(sums_.begin(), sums_.end(), 0);
        trail_.clear();
        unplaced_ = 0;
    }

    // Seeds the packing for a mid-game start (tasks, initial strategies)
    // by inserting the items in decreasing size order.
    void init_from(const ItemMultiset& items) {
        reset();
        trail_.reserve(static_cast<size_t>(params_.bins) * params_.guarantee + 4);
        for (int size : items.to_sorted_items())
            insert(size);
    }

    void insert(int size) {
        int best = -1;
        for (int b = 0; b < params_.bins; ++b) {
            if (sums_[b] + size <= params_.guarantee &&
                (best == -1 || sums_[b] > sums_[best]))
                best = b;
        }
        if (best == -1) {
            ++unplaced_;
            trail_.push_back({size, -1});
        } else {
            sums_[best] += size;
            trail_.push_back({size, best});
        }
    }

    void remove(int size) {
        if (trail_.empty() || trail_.back().size != size)
            throw std::logic_error("OBF removal does not match last insert");
        auto [sz, bin] = trail_.back();
        trail_.pop_back();
        if (bin == -1)
            --unplaced_;
        else
            sums_[bin] -= sz;
    }

    bool consistent() const { return unplaced_ == 0; }

    // g minus the least-loaded bin; absent while the packing is broken.
    std::optional<int> lower_bound() const {
        if (!consistent())
            return std::nullopt;
        int min_sum = sums_[0];
        for (int b = 1; b < params_.bins; ++b)
            min_sum = std::min(min_sum, sums_[b]);
        return params_.guarantee - min_sum;
    }

    const std::vector<int>& bin_sums() const { return sums_; }

  private:
    struct Placement {
        int size;
        int bin;  // -1 = unplaced
    };
    GameParams params_;
    std::vector<int> sums_;
    std::vector<Placement> trail_;
    int unplaced_ = 0;
};

// Best fit decreasing over the whole multiset: items in decreasing size
// order, each into the bin minimizing leftover space among those it fits.
// Returns the largest item that still fits after packing everything, or 0
// when BFD itself fails to place some item.
inline int bfd_lowerbound(const ItemMultiset& items, const GameParams& params) {
    std::array<int, kMaxEngineBins> sums_buf{};
    std::span<int> sums(sums_buf.data(), static_cast<size_t>(params.bins));
    for (int size = items.max_size(); size >= 1; --size) {
        for (int k = items.count(size); k > 0;) {
            int best = -1;
            for (int b = 0; b < params.bins; ++b) {
                if (sums[b] + size <= params.guarantee &&
                    (best == -1 || sums[b] > sums[best]))
                    best = b;
            }
            if (best == -1)
                return 0;
            // Equal-size items keep landing in the same bin while they fit.
            int room = (params.guarantee - sums[best]) / size;
            int packed = std::min(k, room);
            sums[best] += packed * size;
            k -= packed;
        }
    }
    int min_sum = *std::min_element(sums.begin(), sums.end());
    return params.guarantee - min_sum;
}

// Reusable buffers for the queue DP. One per worker.
struct DpScratch {
    static constexpr int kDedupBits = 12;  // 2^12 words
    std::vector<std::array<uint8_t, kMaxEngineBins>> queue_a;
    std::vector<std::array<uint8_t, kMaxEngineBins>> queue_b;
    std::vector<uint64_t> dedup;
    bool use_dedup = true;
    uint64_t dp_calls = 0;

    DpScratch() : dedup(size_t{1} << kDedupBits, 0) {}
};

// Exact maximum feasible item: the largest y packable together with `items`
// into m bins of capacity g, computed by generating all reachable canonical
// load tuples. Returns -1 when `items` itself does not pack. Lossy hash
// dedup may leave duplicate tuples in the queue; that costs time, never
// correctness.
inline int dynprog_max(const ItemMultiset& items, const GameParams& params,
                       const ZobristTables& tables, DpScratch& scratch) {
    const int m = params.bins;
    const int g = params.guarantee;
    if (m > kMaxEngineBins || g > kMaxEngineSize)
        throw std::invalid_argument("dynprog_max: parameters exceed engine bounds");

    ++scratch.dp_calls;
    auto& cur = scratch.queue_a;
    auto& next = scratch.queue_b;
    cur.clear();
    cur.push_back({});  // all-zero tuple

    const uint64_t* load_keys = tables.load_keys.data();
    const int load_range = tables.load_range;
    uint64_t call_salt = scratch.dp_calls * 0xd1342543de82ef95ull;
    int step = 0;
    for (int size = items.max_size(); size >= 1; --size) {
        for (int k = items.count(size); k > 0; --k) {
            ++step;
            // folding the call and step indices into the hash segregates
            // them, so the dedup array is never cleared
            uint64_t step_salt =
                call_salt + static_cast<uint64_t>(step) * 0x9e3779b97f4a7c15ull;
            next.clear();
            for (const auto& tuple : cur) {
                for (int b = 0; b < m; ++b) {
                    if (b > 0 && tuple[b] == tuple[b - 1])
                        continue;  // same canonical successor
                    if (tuple[b] + size > g)
                        continue;
                    auto t2 = tuple;
                    // keep non-increasing order
                    int val = t2[b] + size;
                    int pos = b;
                    while (pos > 0 && t2[pos - 1] < val) {
                        t2[pos] = t2[pos - 1];
                        --pos;
                    }
                    t2[pos] = static_cast<uint8_t>(val);
                    if (scratch.use_dedup) {
                        uint64_t h = step_salt;
                        for (int i = 0; i < m; ++i)
                            h ^= load_keys[i * load_range + t2[i]];
                        uint64_t f = h >> (64 - DpScratch::kDedupBits);
                        if (scratch.dedup[f] == h)
                            continue;
                        scratch.dedup[f] = h;
                    }
                    next.push_back(t2);
                }
            }
            cur.swap(next);
            if (cur.empty())
                return -1;
        }
    }

    int best = 0;
    for (const auto& tuple : cur) {
        int min_load = tuple[m - 1];  // canonical order: last entry is least
        best = std::max(best, g - min_load);
    }
    return best;
}

inline int dynprog_max(const ItemMultiset& items, const GameParams& params,
                       const ZobristTables& tables) {
    DpScratch scratch;
    return dynprog_max(items, params, tables, scratch);
}

// Extracts an explicit packing for a feasible multiset by backtracking over
// bins in decreasing item order, memoizing failed canonical load tuples.
// Used when recording certificates; not on the search hot path.
inline std::optional<PackingCertificate> find_packing(const ItemMultiset& items,
                                                      const GameParams& params) {
    std::vector<int> sorted = items.to_sorted_items();
    const int m = params.bins;
    const int g = params.guarantee;
    std::vector<std::vector<int>> bins(m);
    std::vector<int> sums(m, 0);
    std::map<std::pair<size_t, std::vector<int>>, bool> failed;

    auto rec = [&](auto&& self, size_t idx) -> bool {
        if (idx == sorted.size())
            return true;
        std::vector<int> key = sums;
        std::sort(key.begin(), key.end());
        auto mk = std::make_pair(idx, key);
        if (failed.count(mk))
            return false;
        int size = sorted[idx];
        for (int b = 0; b < m; ++b) {
            if (sums[b] + size > g)
                continue;
            if (b > 0 && sums[b] == sums[b - 1])
                continue;  // symmetric choice
            sums[b] += size;
            bins[b].push_back(size);
            if (self(self, idx + 1))
                return true;
            bins[b].pop_back();
            sums[b] -= size;
        }
        failed[mk] = true;
        return false;
    };
    if (!rec(rec, 0))
        return std::nullopt;
    return PackingCertificate{bins};
}

enum class Ternary { feasible, infeasible, unknown };

// Cache verdict for items + {candidate}; O(1) via the incremental item hash.
inline Ternary query_feasibility_cache(const FeasibilityCache& cache,
                                       const ZobristTables& tables,
                                       uint64_t items_hash,
                                       const ItemMultiset& items,
                                       int candidate) {
    int freq = items.count(candidate);
    uint64_t h = items_hash ^ tables.item_key_raw(candidate, freq) ^
                 tables.item_key_raw(candidate, freq + 1);
    auto hit = cache.lookup(h);
    if (!hit.has_value())
        return Ternary::unknown;
    return *hit ? Ternary::feasible : Ternary::infeasible;
}

// Stage-by-stage bounds, recorded for tests when a trace sink is supplied.
struct MaxFeasTrace {
    FeasibilityBounds init;
    std::optional<int> obf_bound;
    int lb_after_cache = 0;
    int ub_after_cache = 0;
    int lb_after_bfd = 0;
    bool dp_called = false;
};

// The full estimate cascade. Requires `obf` to mirror `items` and
// `items_hash` to equal hash_items(tables, items).
inline int max_feasible(const ItemMultiset& items, const GameParams& params,
                        std::optional<int> prev_y, const ObfState& obf,
                        FeasibilityCache* fcache, const ZobristTables& tables,
                        uint64_t items_hash, DpScratch& scratch,
                        MaxFeasTrace* trace = nullptr) {
    const int g = params.guarantee;
    const int volume = items.total();
    int remaining = params.bins * g - volume;
    assert(remaining >= 0);

    int ub = std::min(prev_y.value_or(g), remaining);
    int lb = 0;
    auto obf_lb = obf.lower_bound();
    if (obf_lb.has_value())
        lb = std::min(*obf_lb, ub);
    if (trace) {
        trace->init = {lb, ub, prev_y, volume};
        trace->obf_bound = obf_lb;
    }

    if (lb < ub && fcache != nullptr) {
        for (int s = ub; s > lb; --s) {
            Ternary q = query_feasibility_cache(*fcache, tables, items_hash,
                                                items, s);
            if (q == Ternary::infeasible) {
                ub = s - 1;
            } else if (q == Ternary::feasible) {
                lb = s;
                break;
            }
        }
    }
    if (trace) {
        trace->lb_after_cache = lb;
        trace->ub_after_cache = ub;
    }

    if (lb < ub)
        lb = std::max(lb, std::min(bfd_lowerbound(items, params), ub));
    if (trace)
        trace->lb_after_bfd = lb;

    if (lb < ub) {
        if (trace)
            trace->dp_called = true;
        int y = dynprog_max(items, params, tables, scratch);
        if (fcache != nullptr) {
            if (y >= 1) {
                int freq = items.count(y);
                fcache->insert(items_hash ^ tables.item_key_raw(y, freq) ^
                                   tables.item_key_raw(y, freq + 1),
                               true);
            }
            if (y < 0) {
                fcache->insert(items_hash, false);
            } else if (y + 1 <= g) {
                int freq = items.count(y + 1);
                fcache->insert(items_hash ^ tables.item_key_raw(y + 1, freq) ^
                                   tables.item_key_raw(y + 1, freq + 1),
                               false);
            }
        }
        return y;
    }
    return lb;
}

}  // namespace binstretch

#endif  // BINSTRETCH_FEASIBILITY_HPP
