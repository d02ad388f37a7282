#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdisk {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Library error. Carries a short human-readable reason ("insufficient nodes",
/// "interior only", "left domain", ...).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thread count from PDISK_THREADS, falling back to hardware concurrency.
int default_thread_count();

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index is
/// processed exactly once; callers store results by index so output does not
/// depend on scheduling.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

/// Deterministic uniform doubles in [lo, hi) from a 64-bit Mersenne twister.
/// The mapping is fixed here rather than relying on std::uniform_real_distribution,
/// whose output is implementation-defined.
class Rng {
public:
    explicit Rng(unsigned long long seed);
    double uniform(double lo = 0.0, double hi = 1.0);
    cplx in_disk(double radius);

private:
    std::mt19937_64 engine_;
};

}  // namespace pdisk
