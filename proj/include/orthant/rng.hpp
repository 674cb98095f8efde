#pragma once

#include <cmath>
#include <cstdint>

namespace orthant {

/// Counter-based random stream: every value is a pure function of
/// (key, counter), so parallel consumers stay deterministic regardless of
/// scheduling.  Mixing is the splitmix64 finalizer over a Weyl sequence.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key, std::uint64_t counter = 0)
        : key_(key), ctr_(counter) {}

    static std::uint64_t value(std::uint64_t key, std::uint64_t counter) {
        std::uint64_t z = key + 0x9E3779B97F4A7C15ull * (counter + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Derives an independent stream key, e.g. one per Monte Carlo rep.
    static std::uint64_t derive_key(std::uint64_t key, std::uint64_t stream) {
        return value(key ^ 0xA5A5A5A5A5A5A5A5ull, stream);
    }

    std::uint64_t next_u64() { return value(key_, ctr_++); }

    /// Uniform in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    int uniform_int(int n) {  // 0..n-1
        return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n));
    }

    double normal() {
        // Box-Muller; one sample per call keeps the stream counter simple.
        const double u1 = std::max(next_double(), 0x1.0p-60);
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t key_;
    std::uint64_t ctr_;
};

}  // namespace orthant
