#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rotkit/vec3.hpp"

namespace rotkit {

/// Seeded random source with distribution transforms implemented in-house so
/// that streams are reproducible independent of the standard library build.
/// One instance per thread of execution; never shared.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be > 0.
    int uniform_int(int n) {
        int v = static_cast<int>(uniform() * static_cast<double>(n));
        return v < n ? v : n - 1;
    }

    /// Standard normal via Box-Muller; caches the second deviate.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    Vec3 normal3() {
        double a = normal(), b = normal(), c = normal();
        return {a, b, c};
    }

    Vec3 unit_vector() {
        Vec3 v;
        double n = 0.0;
        do {
            v = normal3();
            n = v.norm();
        } while (n < 1e-12);
        return v / n;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (int i = static_cast<int>(xs.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(xs[i], xs[j]);
        }
    }

    /// Stateless mix for deriving independent per-cell seeds from a master
    /// seed (splitmix64 finalizer).
    static uint64_t mix(uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    static uint64_t derive(uint64_t master, uint64_t index) {
        return mix(master ^ mix(index + 0x517cc1b727220a95ULL));
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace rotkit
