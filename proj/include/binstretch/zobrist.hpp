#ifndef BINSTRETCH_ZOBRIST_HPP
#define BINSTRETCH_ZOBRIST_HPP

#include <cstdint>
#include <random>
#include <span>

#include "binstretch/game.hpp"

// Zobrist hashing of bin configurations: one random 64-bit key per
// (item size, frequency) pair, per (bin position, load) pair, and per
// possible last-item mark. A configuration hashes to the XOR of the keys of
// all pairs it realizes, so single placements update the hash in O(m).

namespace binstretch {

struct ZobristTables {
    int bins;
    int guarantee;
    int max_frequency;  // m*g, the most copies of one size a feasible input can hold
    int load_range;     // loads 0..load_range-1 are hashable
    uint64_t seed;

    // item_keys[(size-1) * (max_frequency+1) + freq], sizes 1..g
    std::vector<uint64_t> item_keys;
    // load_keys[pos * load_range + load], positions 0..m-1
    std::vector<uint64_t> load_keys;
    // last_keys[size], sizes 1..g; index 0 unused
    std::vector<uint64_t> last_keys;

    ZobristTables(const GameParams& params, uint64_t seed_value)
        : bins(params.bins),
          guarantee(params.guarantee),
          max_frequency(params.bins * params.guarantee),
          // DP load tuples go up to g even when g >= t, so cover both.
          load_range(std::max(params.target, params.guarantee + 1)),
          seed(seed_value) {
        std::mt19937_64 rng(seed_value);
        item_keys.resize(static_cast<size_t>(guarantee) * (max_frequency + 1));
        for (auto& k : item_keys)
            k = rng();
        load_keys.resize(static_cast<size_t>(bins) * load_range);
        for (auto& k : load_keys)
            k = rng();
        last_keys.resize(static_cast<size_t>(guarantee) + 1);
        for (auto& k : last_keys)
            k = rng();
    }

    uint64_t item_key(int size, int freq) const {
        if (size < 1 || size > guarantee || freq < 0 || freq > max_frequency)
            throw std::out_of_range("item/frequency pair outside Zobrist table");
        return item_keys[static_cast<size_t>(size - 1) * (max_frequency + 1) +
                         freq];
    }

    uint64_t load_key(int pos, int load) const {
        if (pos < 0 || pos >= bins || load < 0 || load >= load_range)
            throw std::out_of_range("position/load pair outside Zobrist table");
        return load_keys[static_cast<size_t>(pos) * load_range + load];
    }

    uint64_t last_key(int size) const {
        if (size < 1 || size > guarantee)
            throw std::out_of_range("last item outside Zobrist table");
        return last_keys[size];
    }

    // unchecked accessors for the engine's hot paths; inputs are maintained
    // in range by construction there
    uint64_t item_key_raw(int size, int freq) const {
        return item_keys[static_cast<size_t>(size - 1) * (max_frequency + 1) +
                         freq];
    }
    uint64_t load_key_raw(int pos, int load) const {
        return load_keys[static_cast<size_t>(pos) * load_range + load];
    }
};

// XOR of the keys whose pair membership flipped; the identity for an empty
// list. The spelled-out incremental update primitive.
inline uint64_t hash_update(uint64_t hash, std::span<const uint64_t> flipped) {
    for (uint64_t key : flipped)
        hash ^= key;
    return hash;
}

// Hash of an item multiset alone. Zero-frequency pairs participate: the
// pair list of a configuration covers every size, frequent or not.
inline uint64_t hash_items(const ZobristTables& tables,
                           const ItemMultiset& items) {
    uint64_t h = 0;
    for (int s = 1; s <= tables.guarantee; ++s)
        h ^= tables.item_key(s, items.count(s));
    return h;
}

// Hash of a load tuple alone (also used for DP tuples of capacity-g bins).
inline uint64_t hash_loads(const ZobristTables& tables,
                           std::span<const int> loads) {
    uint64_t h = 0;
    for (int pos = 0; pos < static_cast<int>(loads.size()); ++pos)
        h ^= tables.load_key(pos, loads[pos]);
    return h;
}

inline uint64_t hash_config(const ZobristTables& tables,
                            const BinConfiguration& c) {
    uint64_t h = hash_loads(tables, c.loads) ^ hash_items(tables, c.items);
    if (c.last_item.has_value())
        h ^= tables.last_key(*c.last_item);
    return h;
}

// Hash of the successor after placing `size`, given the predecessor hash and
// both canonical load vectors. O(m): only positions whose load changed flip.
inline uint64_t hash_successor(const ZobristTables& tables, uint64_t hash,
                               const BinConfiguration& before,
                               const BinConfiguration& after, int size) {
    for (int pos = 0; pos < tables.bins; ++pos)
        if (before.loads[pos] != after.loads[pos])
            hash ^= tables.load_key(pos, before.loads[pos]) ^
                    tables.load_key(pos, after.loads[pos]);
    int freq = after.items.count(size);
    hash ^= tables.item_key(size, freq - 1) ^ tables.item_key(size, freq);
    if (before.last_item.has_value())
        hash ^= tables.last_key(*before.last_item);
    if (after.last_item.has_value())
        hash ^= tables.last_key(*after.last_item);
    return hash;
}

}  // namespace binstretch

#endif  // BINSTRETCH_ZOBRIST_HPP
