#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace witten {

/// Worker count: WITTEN_THREADS when set, else hardware concurrency (at least 1).
unsigned worker_count();

/// Runs body(i) for i in [0, count) on up to worker_count() threads.
/// Callers write results into slot i so the outcome is order independent.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// splitmix64-based generator; identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next();
    /// Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller.
    double normal();
    /// Independent child stream; the parent advances by one draw.
    Rng split();

private:
    std::uint64_t state_;
};

/// Radical inverse of i in the given prime base (Halton component).
double radical_inverse(std::uint64_t i, unsigned base);

}  // namespace witten
