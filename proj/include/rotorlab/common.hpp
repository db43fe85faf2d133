#pragma once

#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rotorlab {

using i64 = std::int64_t;
using i128 = __int128;
using u64 = std::uint64_t;

struct defaults {
    static constexpr double root_tol = 1e-10;          // lift-equation residuals
    static constexpr double locking_tol = 1e-10;       // parameter bisection width
    static constexpr double integrate_tol = 1e-9;      // adaptive step error target
    static constexpr double variation_tol = 1e-8;      // refinement convergence
    static constexpr double closure_tol = 1e-6;        // closed-orbit residual
    static constexpr double cf_residual = 9.094947017729282e-13;  // 2^-40 expansion halt
};

[[noreturn]] inline void fail(const std::string& what) { throw std::runtime_error(what); }

inline void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

// Overflow-checked 64-bit ops; exact layers refuse to wrap silently.
inline i64 checked_add(i64 a, i64 b) {
    i64 r;
    if (__builtin_add_overflow(a, b, &r)) fail("integer overflow in exact arithmetic (add)");
    return r;
}
inline i64 checked_mul(i64 a, i64 b) {
    i64 r;
    if (__builtin_mul_overflow(a, b, &r)) fail("integer overflow in exact arithmetic (mul)");
    return r;
}

inline i64 gcd64(i64 a, i64 b) {
    if (a < 0) a = -a;
    if (b < 0) b = -b;
    while (b != 0) {
        i64 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// Worker cap honoured by every parallel loop. 0 means "hardware".
inline unsigned worker_count() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("ROTORLAB_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0 && v < 1024) return static_cast<unsigned>(std::min<long>(v, hw * 4));
    }
    return hw;
}

// Static chunking keeps output order deterministic regardless of worker count.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    unsigned workers = worker_count();
    if (workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

// One generator per experiment, seeded explicitly: same seed, same stream.
class Rng {
public:
    explicit Rng(u64 seed) : gen_(seed) {}
    double uniform() { return dist_(gen_); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    i64 uniform_int(i64 lo, i64 hi) {  // inclusive range
        return std::uniform_int_distribution<i64>(lo, hi)(gen_);
    }
    std::mt19937_64& raw() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> dist_{0.0, 1.0};
};

}  // namespace rotorlab
