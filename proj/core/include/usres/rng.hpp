#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace usres {

/// Counter-based pseudo-random stream built on splitmix64 finalizers.
/// Every draw is a pure function of (key, counter), so streams derived
/// from distinct keys are independent and safe to consume from
/// concurrent workers without shared state.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}

    /// Mixes a list of identifiers into a stream key, e.g.
    /// {seed, cell_index, trial_index}.
    static std::uint64_t derive_key(std::initializer_list<std::uint64_t> ids) {
        std::uint64_t k = 0x9e3779b97f4a7c15ULL;
        for (std::uint64_t id : ids) k = mix(k ^ mix(id));
        return k;
    }

    std::uint64_t next_u64() { return at(counter_++); }

    /// Stateless access: value of the stream at an absolute counter position.
    std::uint64_t at(std::uint64_t counter) const {
        return mix(key_ + 0x9e3779b97f4a7c15ULL * (counter + 1));
    }

    /// Uniform in [0, 1).
    double uniform() { return to_unit(next_u64()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller on two counter draws.
    double normal() {
        const double u1 = to_unit(next_u64());
        const double u2 = to_unit(next_u64());
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Normal draw addressed by index, independent of stream state.
    /// Used for per-sample noise so that sample n always sees the same
    /// deviate regardless of evaluation order.
    double normal_at(std::uint64_t index) const {
        const double u1 = to_unit(at(2 * index));
        const double u2 = to_unit(at(2 * index + 1));
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    static double to_unit(std::uint64_t v) {
        return static_cast<double>(v >> 11) * 0x1.0p-53;
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace usres
