#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rankloss {

/// Seeded random stream with hand-rolled distributions.
///
/// mt19937_64 output is pinned by the standard, but the std distribution
/// classes are not; sampling is implemented here so identical seeds give
/// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform double in the open interval (0, 1).
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    /// Uniform integer in [0, bound) by rejection.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % bound;
    }

    /// Standard normal via Box-Muller, pairs cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform_open();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// Sample n distinct indices from [0, pool) without replacement.
    std::vector<int> sample_without_replacement(int pool, int n) {
        std::vector<int> idx(static_cast<std::size_t>(pool));
        for (int i = 0; i < pool; ++i) idx[static_cast<std::size_t>(i)] = i;
        // partial Fisher-Yates: draw n positions from the front
        for (int i = 0; i < n; ++i) {
            const int j = i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(pool - i)));
            std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        }
        idx.resize(static_cast<std::size_t>(n));
        return idx;
    }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace rankloss
