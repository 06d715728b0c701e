#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace osaom {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Seedable generator with self-contained samplers. std::mt19937_64 output is
// fully specified by the standard, and we avoid std::*_distribution because
// their algorithms are implementation-defined; run-for-run reproducibility is
// part of the CLI contract.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Independent stream derived from a master seed; used to give every
    // simulation run its own generator regardless of thread scheduling.
    static Rng derive(std::uint64_t master, std::uint64_t stream) {
        std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream * 0x9e3779b97f4a7c15ULL);
        splitmix64(s);
        return Rng(splitmix64(s));
    }

    std::uint64_t next_u64() { return gen_(); }

    // Uniform on [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Strictly positive exponential waiting time.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t span = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<int>(x % span);
    }

    // Index draw from unnormalized nonnegative weights.
    int categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform() * total;
        for (std::size_t k = 0; k + 1 < weights.size(); ++k) {
            u -= weights[k];
            if (u < 0.0) return static_cast<int>(k);
        }
        return static_cast<int>(weights.size()) - 1;
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace osaom
