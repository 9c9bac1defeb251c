#ifndef BINSTRETCH_CACHE_HPP
#define BINSTRETCH_CACHE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>

// Fixed-size lossy cache mapping 63 bits of hash to one result bit, packed
// into a single 64-bit word per entry. Addressed by a hash prefix with a
// short linear probe window; full windows evict a random victim. Entries are
// read and written with single atomic operations, so concurrent workers may
// lose updates but never observe torn words.

namespace binstretch {

class BitCache {
  public:
    explicit BitCache(int address_bits, int probe_limit = 4)
        : address_bits_(address_bits), probe_limit_(probe_limit) {
        if (address_bits < 3 || address_bits > 40)
            throw std::invalid_argument("cache address bits outside [3,40]");
        if (probe_limit < 1)
            throw std::invalid_argument("probe limit must be at least 1");
        size_ = size_t{1} << address_bits;
        slots_ = std::make_unique<std::atomic<uint64_t>[]>(size_);
        clear();
    }

    // The stored word keeps the top 63 bits of the hash; bit 0 carries the
    // value. A hash whose payload would be the reserved empty word is
    // remapped to a fixed nonzero payload.
    static uint64_t payload(uint64_t hash) {
        uint64_t p = hash & ~uint64_t{1};
        return p != 0 ? p : 2;
    }

    void insert(uint64_t hash, bool bit) {
        uint64_t p = payload(hash);
        uint64_t word = p | (bit ? 1 : 0);
        size_t home = slot_of(hash);
        for (int i = 0; i < probe_limit_; ++i) {
            size_t s = (home + i) & (size_ - 1);
            uint64_t cur = slots_[s].load(std::memory_order_relaxed);
            if (cur == 0 || (cur & ~uint64_t{1}) == p) {
                slots_[s].store(word, std::memory_order_relaxed);
                return;
            }
        }
        size_t victim = (home + next_random() % probe_limit_) & (size_ - 1);
        slots_[victim].store(word, std::memory_order_relaxed);
    }

    std::optional<bool> lookup(uint64_t hash) const {
        uint64_t p = payload(hash);
        size_t home = slot_of(hash);
        for (int i = 0; i < probe_limit_; ++i) {
            size_t s = (home + i) & (size_ - 1);
            uint64_t cur = slots_[s].load(std::memory_order_relaxed);
            if (cur == 0)
                return std::nullopt;  // inserts fill the first free slot
            if ((cur & ~uint64_t{1}) == p)
                return (cur & 1) != 0;
        }
        return std::nullopt;
    }

    void clear() {
        for (size_t i = 0; i < size_; ++i)
            slots_[i].store(0, std::memory_order_relaxed);
    }

    size_t entry_count() const { return size_; }
    int address_bits() const { return address_bits_; }
    int probe_limit() const { return probe_limit_; }

  private:
    size_t slot_of(uint64_t hash) const { return hash >> (64 - address_bits_); }

    static uint64_t next_random() {
        // splitmix64; per-thread so eviction choices stay deterministic
        // in single-worker runs.
        thread_local uint64_t state = 0x9e3779b97f4a7c15ull;
        state += 0x9e3779b97f4a7c15ull;
        uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::unique_ptr<std::atomic<uint64_t>[]> slots_;
    size_t size_;
    int address_bits_;
    int probe_limit_;
};

using StateCache = BitCache;
using FeasibilityCache = BitCache;

}  // namespace binstretch

#endif  // BINSTRETCH_CACHE_HPP
