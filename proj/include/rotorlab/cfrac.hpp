#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rotorlab/common.hpp"

namespace rotorlab {

struct Convergent {
    i64 p = 0;
    i64 q = 1;
    bool operator==(const Convergent&) const = default;
};

struct CfExpansion {
    std::vector<i64> a;     // a[0] = integer part, a[i] >= 1 for i >= 1
    bool exact = false;     // true when the expansion terminated with zero remainder
    double residual = 0.0;  // leftover fractional part at the halt (floating input only)
};

// Floating-point expansion by the Gauss map.  Halts once the fractional
// remainder drops below 2^-40; beyond that the quotients are noise.
inline CfExpansion expand(double x, int max_depth = 64) {
    require(std::isfinite(x), "expand: non-finite input");
    require(max_depth >= 1, "expand: depth must be positive");
    CfExpansion out;
    double a0 = std::floor(x);
    out.a.push_back(static_cast<i64>(a0));
    double frac = x - a0;
    for (int i = 1; i < max_depth; ++i) {
        if (frac < defaults::cf_residual) {
            out.exact = (frac == 0.0);
            out.residual = frac;
            return out;
        }
        double inv = 1.0 / frac;
        double ai = std::floor(inv);
        if (ai < 1.0) ai = 1.0;
        out.a.push_back(static_cast<i64>(ai));
        frac = inv - ai;
    }
    out.exact = false;
    out.residual = frac;
    return out;
}

// Exact expansion of p/q by the Euclidean algorithm.  The floor algorithm
// never emits a trailing quotient of 1, so the output is canonical.
inline CfExpansion expand_rational(i64 p, i64 q, int max_depth = 64) {
    require(q > 0, "expand_rational: denominator must be positive");
    require(max_depth >= 1, "expand_rational: depth must be positive");
    CfExpansion out;
    i64 num = p, den = q;
    for (int i = 0; i < max_depth; ++i) {
        i64 a = num >= 0 ? num / den : -((-num + den - 1) / den);  // floor division
        out.a.push_back(a);
        i64 rem = num - a * den;
        if (rem == 0) {
            out.exact = true;
            return out;
        }
        num = den;
        den = rem;
    }
    out.exact = false;
    fail("expand_rational: depth exhausted before termination");
}

// p_n = a_n p_{n-1} + p_{n-2}, q_n likewise, seeded by p_{-1}/q_{-1} = 1/0.
inline std::vector<Convergent> convergents(const std::vector<i64>& a) {
    require(!a.empty(), "convergents: empty quotient list");
    for (std::size_t i = 1; i < a.size(); ++i)
        require(a[i] >= 1, "convergents: partial quotient below 1 at index " + std::to_string(i));
    std::vector<Convergent> out;
    out.reserve(a.size());
    i64 pm1 = 1, qm1 = 0, pm2 = 0, qm2 = 1;
    for (i64 an : a) {
        i64 p = checked_add(checked_mul(an, pm1), pm2);
        i64 q = checked_add(checked_mul(an, qm1), qm2);
        out.push_back({p, q});
        pm2 = pm1;
        qm2 = qm1;
        pm1 = p;
        qm1 = q;
    }
    return out;
}

// p_n q_{n-1} - p_{n-1} q_n; alternates between +1 and -1.
inline i64 convergent_determinant(const Convergent& prev, const Convergent& cur) {
    return checked_add(checked_mul(cur.p, prev.q), -checked_mul(prev.p, cur.q));
}

// |alpha - p_n/q_n| < 1/(q_n q_{n+1})
inline double convergent_error_bound(const Convergent& cur, const Convergent& next) {
    return 1.0 / (static_cast<double>(cur.q) * static_cast<double>(next.q));
}

struct QuotientStats {
    i64 min = 0;
    i64 max = 0;
    i64 liminf_proxy = 0;  // min over the final sliding window
    int window = 0;
};

inline QuotientStats quotient_stats(const std::vector<i64>& a, int window = 8) {
    require(a.size() >= 2, "quotient_stats: need at least one partial quotient past a_0");
    require(window >= 1, "quotient_stats: window must be positive");
    QuotientStats s;
    s.window = window;
    s.min = s.max = a[1];
    for (std::size_t i = 1; i < a.size(); ++i) {
        s.min = std::min(s.min, a[i]);
        s.max = std::max(s.max, a[i]);
    }
    std::size_t tail_begin = a.size() > static_cast<std::size_t>(window) ? a.size() - window : 1;
    tail_begin = std::max<std::size_t>(tail_begin, 1);
    s.liminf_proxy = a[tail_begin];
    for (std::size_t i = tail_begin; i < a.size(); ++i) s.liminf_proxy = std::min(s.liminf_proxy, a[i]);
    return s;
}

}  // namespace rotorlab
