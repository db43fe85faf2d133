#pragma once

#include <map>
#include <vector>

#include "rotorlab/arc.hpp"
#include "rotorlab/handle.hpp"

namespace rotorlab {

// Exact orbit point x + k*alpha mod 1.
inline QField orbit_point(const AlphaHandle& alpha, const QField& x, i64 k) {
    return (x + alpha.value().mul_rational(k, 1)).mod1();
}

// Signed defect eps_n = q_n alpha - p_n; alternates sign and shrinks.
inline QField return_defect(const AlphaHandle& alpha, std::size_t n) {
    Convergent c = alpha.convergent(n);
    return alpha.value().mul_rational(c.q, 1) - QField::integer(c.p);
}

// I_n: the arc between x and R^{q_n}(x) on the side of the defect.
inline ExactArc return_interval(const AlphaHandle& alpha, const QField& x, std::size_t n) {
    QField eps = return_defect(alpha, n);
    require(eps.sign() != 0, "return_interval: defect vanishes (rational handle at full depth)");
    QField lo = x, hi = (x + eps).mod1();
    if (eps.sign() < 0) std::swap(lo, hi);
    return {lo.mod1(), hi};
}

// Denominator sequence q_0..q_n read off the convergents.
inline std::vector<i64> closest_return_times(const AlphaHandle& alpha, std::size_t levels) {
    std::vector<i64> out;
    out.reserve(levels + 1);
    for (std::size_t n = 0; n <= levels; ++n) out.push_back(alpha.convergent(n).q);
    return out;
}

struct ReturnRecord {
    i64 time;
    QField dist;
};

// Oracle: prefix-minimum scan of d(R^k x, x) over 1 <= k <= horizon.  Records
// appear exactly at the closest-return times.
inline std::vector<ReturnRecord> brute_force_closest_returns(const AlphaHandle& alpha, i64 horizon) {
    require(horizon >= 1, "brute_force_closest_returns: empty horizon");
    std::vector<ReturnRecord> out;
    QField step = alpha.value();
    QField pos = QField::integer(0);
    for (i64 k = 1; k <= horizon; ++k) {
        pos = (pos + step).mod1();
        QField d = circle_norm(pos);
        if (d.sign() == 0) break;  // rational handle closed up
        if (out.empty() || d < out.back().dist) out.push_back({k, d});
    }
    return out;
}

struct IntermediateReturns {
    std::vector<i64> times;  // q_n < i < q_{n+2} with R^i(x) in I_n \ I_{n+2}
    i64 count = 0;
    i64 stated_count = 0;     // a_n - 1
    i64 recursion_count = 0;  // a_{n+2} - 1, what the denominator recursion implies
};

// Brute-force enumeration of the visits to I_n \ I_{n+2} strictly between the
// two bounding return times.  Both index conventions for the expected count
// are reported; the enumeration itself is the ground truth.
inline IntermediateReturns intermediate_return_times(const AlphaHandle& alpha, std::size_t n) {
    require(alpha.has_quotient(n + 2), "intermediate_return_times: expansion too short for level n+2");
    IntermediateReturns out;
    out.stated_count = alpha.quotient(n) - 1;
    out.recursion_count = alpha.quotient(n + 2) - 1;

    i64 qn = alpha.convergent(n).q;
    i64 qn2 = alpha.convergent(n + 2).q;
    QField eps_n = return_defect(alpha, n);
    QField eps_n2 = return_defect(alpha, n + 2);
    QField half(1, 2);

    QField step = alpha.value();
    QField pos = orbit_point(alpha, QField::integer(0), qn);
    for (i64 i = qn + 1; i < qn2; ++i) {
        pos = (pos + step).mod1();
        // centered lift in (-1/2, 1/2] keeps both one-sided cases uniform
        QField ct = pos < half ? pos : pos - QField::integer(1);
        bool in_diff;
        if (eps_n.sign() > 0)
            in_diff = ct > eps_n2 && ct <= eps_n;  // (eps_{n+2}, eps_n]
        else
            in_diff = ct >= eps_n && ct < eps_n2;  // [eps_n, eps_{n+2})
        if (in_diff) out.times.push_back(i);
    }
    out.count = static_cast<i64>(out.times.size());
    return out;
}

struct PartitionTile {
    int generation;  // 0: copy of I_{n-1}, 1: copy of I_n
    i64 iterate;
    ExactArc arc;
};

struct DynamicPartition {
    std::vector<PartitionTile> tiles;  // sorted by arc.lo
    bool tiles_exactly = false;        // consecutive arcs share endpoints, full cover
};

// q_n translates of I_{n-1} and q_{n-1} translates of I_n tile the circle with
// pairwise disjoint interiors.  The check is exact: sorted arcs must chain
// endpoint-to-endpoint all the way around.
inline DynamicPartition dynamic_partition(const AlphaHandle& alpha, const QField& x, std::size_t n) {
    require(n >= 1, "dynamic_partition: level must be at least 1");
    if (alpha.is_rational())
        require(alpha.has_quotient(n),
                "dynamic_partition: rational handle of depth " + std::to_string(alpha.rational_depth()) +
                    " has no level-" + std::to_string(n) + " return");
    DynamicPartition out;
    ExactArc base_prev = return_interval(alpha, x, n - 1);
    ExactArc base_cur = return_interval(alpha, x, n);
    i64 qn = alpha.convergent(n).q;
    i64 qprev = alpha.convergent(n - 1).q;
    QField step = alpha.value();

    auto push_orbit = [&](const ExactArc& base, i64 count, int generation) {
        QField lo = base.lo, hi = base.hi;
        for (i64 i = 0; i < count; ++i) {
            out.tiles.push_back({generation, i, {lo, hi}});
            lo = (lo + step).mod1();
            hi = (hi + step).mod1();
        }
    };
    push_orbit(base_prev, qn, 0);
    push_orbit(base_cur, qprev, 1);

    std::sort(out.tiles.begin(), out.tiles.end(),
              [](const PartitionTile& a, const PartitionTile& b) { return a.arc.lo < b.arc.lo; });
    out.tiles_exactly = true;
    for (std::size_t i = 0; i < out.tiles.size(); ++i) {
        const ExactArc& cur = out.tiles[i].arc;
        const ExactArc& next = out.tiles[(i + 1) % out.tiles.size()].arc;
        if (cur.hi != next.lo) {
            out.tiles_exactly = false;
            break;
        }
    }
    return out;
}

struct GapHistogram {
    std::vector<std::pair<QField, i64>> entries;  // (length, count), ascending length
    std::size_t points = 0;
};

// Gap-length histogram of the first q_{n-1} + q_{n-2} orbit points.
inline GapHistogram three_distance_points(const AlphaHandle& alpha, const QField& x, std::size_t n) {
    require(n >= 1, "three_distance_points: level must be at least 1");
    i64 count = alpha.convergent(n - 1).q + (n >= 2 ? alpha.convergent(n - 2).q : 0);
    std::vector<QField> pts;
    pts.reserve(count);
    QField pos = x.mod1();
    QField step = alpha.value();
    for (i64 k = 0; k < count; ++k) {
        pts.push_back(pos);
        pos = (pos + step).mod1();
    }
    std::sort(pts.begin(), pts.end());
    GapHistogram out;
    out.points = pts.size();
    std::vector<QField> gaps;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        QField next = pts[(i + 1) % pts.size()];
        QField g = (next - pts[i]).mod1();
        if (pts.size() == 1) g = QField::integer(1);
        gaps.push_back(g);
    }
    std::sort(gaps.begin(), gaps.end());
    for (const QField& g : gaps) {
        if (!out.entries.empty() && out.entries.back().first == g)
            ++out.entries.back().second;
        else
            out.entries.emplace_back(g, 1);
    }
    return out;
}

// S_n(x) = {x, R x, ..., R^{q_n - 1} x}
inline std::vector<QField> orbit_prefix(const AlphaHandle& alpha, const QField& x, i64 count) {
    std::vector<QField> pts;
    pts.reserve(count);
    QField pos = x.mod1();
    QField step = alpha.value();
    for (i64 k = 0; k < count; ++k) {
        pts.push_back(pos);
        pos = (pos + step).mod1();
    }
    return pts;
}

struct ImBoundReport {
    int im = 0;
    i64 a_n = 0;
    i64 bound = 0;
    bool ok = false;
};

// Multiplicity of {T, R T, ..., R^{q_n - 1} T} against the 2(a_n + 1) bound.
// Requires the interior of T to avoid S_n(x).
inline ImBoundReport im_bound_check(const AlphaHandle& alpha, const QField& x, std::size_t n,
                                    const ExactArc& T) {
    i64 qn = alpha.convergent(n).q;
    for (const QField& p : orbit_prefix(alpha, x, qn))
        require(!arc_contains_interior(T, p),
                "im_bound_check: interior of T meets the return scaffold S_n");
    std::vector<ExactArc> arcs;
    arcs.reserve(qn);
    QField lo = T.lo, hi = T.hi;
    QField step = alpha.value();
    for (i64 i = 0; i < qn; ++i) {
        arcs.push_back({lo, hi});
        lo = (lo + step).mod1();
        hi = (hi + step).mod1();
    }
    ImBoundReport out;
    out.im = intersection_multiplicity(arcs);
    out.a_n = alpha.quotient(n);
    out.bound = 2 * (out.a_n + 1);
    out.ok = out.im <= out.bound;
    return out;
}

}  // namespace rotorlab
