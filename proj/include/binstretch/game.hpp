#ifndef BINSTRETCH_GAME_HPP
#define BINSTRETCH_GAME_HPP

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Shared vocabulary of the bin stretching game: parameters, canonical
// configurations, packing certificates.

namespace binstretch {

// The game is parametrized by the number of bins m, the target load t that
// the adversary tries to force, and the guarantee capacity g that every sent
// multiset must respect. slack = (t-1) - g is the extra space available to
// the packing player; it may be negative for degenerate inputs.
struct GameParams {
    int bins;
    int target;
    int guarantee;
    int slack;

    GameParams(int m, int t, int g)
        : bins(m), target(t), guarantee(g), slack(t - 1 - g) {
        if (m < 1)
            throw std::invalid_argument("bin count must be at least 1");
        if (g < 1)
            throw std::invalid_argument("guarantee must be at least 1");
        if (t < 2)
            throw std::invalid_argument("target must be at least 2");
    }

    bool operator==(const GameParams&) const = default;
};

// Multiset of item sizes in [1, max_size], stored as a counts array with a
// cached total volume. Sizes above the guarantee are rejected: such an item
// can never be part of a feasible input.
class ItemMultiset {
  public:
    explicit ItemMultiset(int max_size)
        : counts_(static_cast<size_t>(max_size) + 1, 0) {
        if (max_size < 1)
            throw std::invalid_argument("max item size must be at least 1");
    }

    int max_size() const { return static_cast<int>(counts_.size()) - 1; }

    void add(int size) {
        check_size(size);
        ++counts_[size];
        total_ += size;
        ++num_items_;
    }

    void remove(int size) {
        check_size(size);
        if (counts_[size] == 0)
            throw std::logic_error("removing absent item of size " +
                                   std::to_string(size));
        --counts_[size];
        total_ -= size;
        --num_items_;
    }

    int count(int size) const {
        return size >= 1 && size <= max_size() ? counts_[size] : 0;
    }

    int total() const { return total_; }       // volume V
    int item_count() const { return num_items_; }
    bool empty() const { return num_items_ == 0; }

    // Sizes repeated by multiplicity, largest first.
    std::vector<int> to_sorted_items() const {
        std::vector<int> out;
        out.reserve(static_cast<size_t>(num_items_));
        for (int s = max_size(); s >= 1; --s)
            for (int k = 0; k < counts_[s]; ++k)
                out.push_back(s);
        return out;
    }

    std::map<int, int> to_count_map() const {
        std::map<int, int> out;
        for (int s = 1; s <= max_size(); ++s)
            if (counts_[s] > 0)
                out[s] = counts_[s];
        return out;
    }

    const std::vector<int>& raw_counts() const { return counts_; }

    bool operator==(const ItemMultiset&) const = default;

  private:
    void check_size(int size) const {
        if (size < 1 || size > max_size())
            throw_bad_size(size);
    }

    [[noreturn]] [[gnu::noinline]] void throw_bad_size(int size) const {
        throw std::out_of_range("item size " + std::to_string(size) +
                                " outside [1," + std::to_string(max_size()) +
                                "]");
    }

    std::vector<int> counts_;
    int total_ = 0;
    int num_items_ = 0;
};

// Sorts a load vector into the canonical non-increasing order.
inline std::vector<int> canonicalize(std::vector<int> loads, int bins) {
    if (static_cast<int>(loads.size()) != bins)
        throw std::invalid_argument("load vector has " +
                                    std::to_string(loads.size()) +
                                    " entries, expected " +
                                    std::to_string(bins));
    std::sort(loads.begin(), loads.end(), std::greater<int>());
    return loads;
}

inline bool is_canonical(const std::vector<int>& loads) {
    return std::is_sorted(loads.rbegin(), loads.rend());
}

// A game state right before the adversary moves: canonical loads plus the
// multiset of items sent so far. last_item is tracked only under a
// monotonicity restriction, where the bin configuration alone does not
// determine the legal next moves.
struct BinConfiguration {
    std::vector<int> loads;  // non-increasing, one entry per bin
    ItemMultiset items;
    std::optional<int> last_item;

    static BinConfiguration empty_start(const GameParams& params) {
        return BinConfiguration{std::vector<int>(params.bins, 0),
                                ItemMultiset(params.guarantee), std::nullopt};
    }

    bool operator==(const BinConfiguration&) const = default;
};

inline int max_load(const BinConfiguration& c) {
    return c.loads.empty() ? 0 : c.loads.front();
}

// Places one item of size `size` into bin `bin` and re-canonicalizes.
// A resulting load >= t is not an error here; callers decide whether the
// successor is a terminal state before storing it.
inline BinConfiguration add_item(const BinConfiguration& c, int size, int bin) {
    if (size < 1)
        throw std::invalid_argument("item size must be positive");
    if (bin < 0 || bin >= static_cast<int>(c.loads.size()))
        throw std::out_of_range("bin index out of range");
    BinConfiguration next = c;
    next.loads[bin] += size;
    std::sort(next.loads.begin(), next.loads.end(), std::greater<int>());
    next.items.add(size);
    if (c.last_item.has_value())
        next.last_item = size;
    return next;
}

// An explicit m-bin packing used as a feasibility witness.
struct PackingCertificate {
    std::vector<std::vector<int>> bins;

    bool operator==(const PackingCertificate&) const = default;
};

// True iff `p` packs at least the items of `needed` (counted per size) into
// exactly `params.bins` bins of load at most `params.guarantee`. Returns
// false on any violation, including non-positive item sizes in `p`.
inline bool validate_packing_counts(const std::map<int, int>& needed,
                                    const PackingCertificate& p,
                                    const GameParams& params) {
    if (static_cast<int>(p.bins.size()) != params.bins)
        return false;
    std::map<int, int> have;
    for (const auto& bin : p.bins) {
        long long sum = 0;
        for (int item : bin) {
            if (item < 1)
                return false;
            sum += item;
            ++have[item];
        }
        if (sum > params.guarantee)
            return false;
    }
    for (const auto& [size, cnt] : needed) {
        auto it = have.find(size);
        if (it == have.end() || it->second < cnt)
            return false;
    }
    return true;
}

inline bool validate_packing(const ItemMultiset& items,
                             const PackingCertificate& p,
                             const GameParams& params) {
    return validate_packing_counts(items.to_count_map(), p, params);
}

// True iff sending `run` in order from `loads` drives some bin to the target
// on every placement path before the list runs out. Memoized on (canonical
// loads, position); the multiset of the remaining suffix is fixed by the
// position alone.
inline bool forced_run_overflows(const std::vector<int>& loads,
                                 const std::vector<int>& run,
                                 const GameParams& params) {
    std::map<std::pair<std::vector<int>, size_t>, bool> memo;
    auto rec = [&](auto&& self, const std::vector<int>& cur, size_t idx) -> bool {
        if (idx == run.size())
            return false;  // items exhausted, the packer survived
        auto key = std::make_pair(cur, idx);
        auto it = memo.find(key);
        if (it != memo.end())
            return it->second;
        int e = run[idx];
        bool all_overflow = true;
        for (int b = 0; b < params.bins; ++b) {
            if (b > 0 && cur[b] == cur[b - 1])
                continue;
            if (cur[b] + e >= params.target)
                continue;
            std::vector<int> next = cur;
            next[b] += e;
            std::sort(next.begin(), next.end(), std::greater<int>());
            if (!self(self, next, idx + 1)) {
                all_overflow = false;
                break;
            }
        }
        memo[key] = all_overflow;
        return all_overflow;
    };
    return rec(rec, loads, 0);
}

}  // namespace binstretch

#endif  // BINSTRETCH_GAME_HPP
