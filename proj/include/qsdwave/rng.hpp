#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "qsdwave/errors.hpp"

namespace qsdwave {

namespace detail {

// splitmix64 finalizer; used only to derive engine states from (seed, stream_id).
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace detail

// Deterministic, splittable random stream.
//
// Splitting rule: the engine state is splitmix64(splitmix64(seed) ^ mix(stream_id)),
// so identical (seed, stream_id) pairs reproduce bit-identical sequences and
// distinct stream_ids give statistically independent streams that may run in
// parallel replicas.
//
// Raw-draw accounting (one raw draw = one 64-bit engine output):
//   u01 / u01_open     1 draw
//   gaussian           exactly 2 draws (Box-Muller, no cached spare)
//   exponential        1 draw
//   poisson(m)         variable (Knuth product method; means > 64 are split
//                      recursively into halves, which is exact for Poisson)
//   uniform_index      >= 1 draw (unbiased rejection, geometric tail)
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id), engine_(derive_state(seed, stream_id)) {}

    static std::uint64_t derive_state(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = detail::splitmix64(s);
        std::uint64_t t = stream_id ^ 0xD1B54A32D192ED03ULL;
        std::uint64_t b = detail::splitmix64(t);
        std::uint64_t c = a ^ b;
        return detail::splitmix64(c);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_raw() { return engine_(); }

    // Uniform on [0, 1), 53-bit resolution.
    double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1]; safe as a log() argument.
    double u01_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    // Standard normal via Box-Muller (cosine branch only: exactly two raw draws).
    double gaussian() {
        const double u1 = u01_open();
        const double u2 = u01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw parameter_error("RngStream::exponential: rate must be > 0");
        return -std::log(u01_open()) / rate;
    }

    std::uint64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw parameter_error("RngStream::poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean > 64.0) return poisson(mean / 2.0) + poisson(mean / 2.0);
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= u01_open();
        } while (p > limit);
        return k - 1;
    }

    // Unbiased uniform index in {0, ..., n-1}.
    std::size_t uniform_index(std::size_t n) {
        if (n == 0) throw parameter_error("RngStream::uniform_index: n must be >= 1");
        if (n == 1) return 0;
        const std::uint64_t range = static_cast<std::uint64_t>(n);
        const std::uint64_t bound = (UINT64_MAX / range) * range;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= bound);
        return static_cast<std::size_t>(r % range);
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::mt19937_64 engine_;
};

}  // namespace qsdwave
