#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "cdph/errors.hpp"
#include "cdph/matrix.hpp"

namespace cdph {

/// Seedable random source with platform-independent output.
///
/// The engine is std::mt19937_64 (bit-exact by the standard); everything on
/// top of it (uniforms, exponentials, Poisson, categorical rows) is explicit
/// arithmetic rather than std:: distributions, whose algorithms are
/// implementation-defined. Fixed seed therefore means identical draws on any
/// conforming platform. Not thread-safe: use one instance per thread,
/// derived via stream().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Independent sub-stream: seed mixed with the stream id by splitmix64.
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream_id + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return Rng(z ^ (z >> 31));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1].
    double uniform_pos() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

    double exponential(double rate) {
        if (!(rate > 0.0)) throw ValidationError("exponential: rate must be positive");
        return -std::log(uniform_pos()) / rate;
    }

    /// Poisson by counting unit-exponential arrivals up to `mean`.
    /// O(mean) per draw; exact for any non-negative mean.
    long poisson(double mean) {
        if (mean < 0.0) throw ValidationError("poisson: negative mean");
        if (mean == 0.0) return 0;
        long count = 0;
        double total = -std::log(uniform_pos());
        while (total <= mean) {
            ++count;
            total += -std::log(uniform_pos());
        }
        return count;
    }

    /// Inverse-cdf sampling over a probability row with an implicit
    /// leftover event: returns an index into `probs`, or probs.size() when
    /// the draw falls into the residual mass 1 - sum(probs).
    std::size_t categorical(const Vec& probs) {
        const double u = uniform();
        double acc = 0.0;
        for (std::size_t i = 0; i < probs.size(); ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return probs.size();
    }

private:
    std::mt19937_64 engine_;
};

} // namespace cdph
