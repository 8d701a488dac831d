#pragma once

#include <cstdint>
#include <initializer_list>

namespace hyperconv {

// Counter-based generator: output depends only on (key, counter), so streams
// derived from the same path are identical regardless of thread scheduling.
// Streams are split by hashing a path of 64-bit components, e.g.
// {seed, trial, epoch, layer}.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    static std::uint64_t derive_key(std::initializer_list<std::uint64_t> path) {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (std::uint64_t p : path) {
            h ^= mix(p + 0x2545f4914f6cdd1dull);
            h = mix(h);
        }
        return h;
    }

    static CounterRng stream(std::initializer_list<std::uint64_t> path) {
        return CounterRng(derive_key(path));
    }

    std::uint64_t next_u64() { return mix(key_ + counter_++ * 0x9e3779b97f4a7c15ull); }

    // uniform in [0, 1)
    double next_uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_uniform(); }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace hyperconv
