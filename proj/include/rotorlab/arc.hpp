#pragma once

#include <algorithm>
#include <vector>

#include "rotorlab/qfield.hpp"

namespace rotorlab {

// Closed arc on the circle, running from lo counterclockwise to hi; wraps when
// hi < lo.  lo == hi is the degenerate point arc.  Endpoints live in [0, 1).
template <class P>
struct BasicArc {
    P lo;
    P hi;
};

using ExactArc = BasicArc<QField>;
using NumericArc = BasicArc<double>;

inline bool arc_wraps(const ExactArc& a) { return a.hi < a.lo; }
inline bool arc_wraps(const NumericArc& a) { return a.hi < a.lo; }

inline QField arc_length(const ExactArc& a) {
    QField len = a.hi - a.lo;
    return arc_wraps(a) ? len + QField::integer(1) : len;
}
inline double arc_length(const NumericArc& a) {
    double len = a.hi - a.lo;
    return arc_wraps(a) ? len + 1.0 : len;
}

template <class P>
inline bool arc_contains(const BasicArc<P>& a, const P& x) {
    if (arc_wraps(a)) return x >= a.lo || x <= a.hi;
    return x >= a.lo && x <= a.hi;
}

template <class P>
inline bool arc_contains_interior(const BasicArc<P>& a, const P& x) {
    if (arc_wraps(a)) return x > a.lo || x < a.hi;
    return x > a.lo && x < a.hi;
}

namespace detail {

// Circular sweep.  The circle is cut at 0; wrapping arcs re-enter through a
// start event at 0 and their upper half never ends within the sweep.  At a
// shared position all starts are applied before any end, which makes closed
// arcs that merely touch count as overlapping.
template <class P, class Less, class Eq>
int sweep_multiplicity(const std::vector<BasicArc<P>>& arcs, const P& zero, Less less, Eq eq) {
    struct Event {
        P pos;
        int delta;  // +1 start, -1 end
    };
    std::vector<Event> ev;
    ev.reserve(arcs.size() * 2);
    for (const auto& a : arcs) {
        if (arc_wraps(a)) {
            // [lo, 1) half never closes before the cut; its end is irrelevant
            ev.push_back({a.lo, +1});
            ev.push_back({zero, +1});
            ev.push_back({a.hi, -1});
        } else {
            ev.push_back({a.lo, +1});
            ev.push_back({a.hi, -1});
        }
    }
    std::sort(ev.begin(), ev.end(), [&](const Event& x, const Event& y) {
        if (less(x.pos, y.pos)) return true;
        if (less(y.pos, x.pos)) return false;
        return x.delta > y.delta;  // starts first
    });
    int count = 0, best = 0;
    std::size_t i = 0;
    while (i < ev.size()) {
        std::size_t j = i;
        while (j < ev.size() && eq(ev[i].pos, ev[j].pos)) ++j;
        for (std::size_t k = i; k < j; ++k)
            if (ev[k].delta > 0) ++count;
        best = std::max(best, count);
        for (std::size_t k = i; k < j; ++k)
            if (ev[k].delta < 0) --count;
        i = j;
    }
    return best;
}

}  // namespace detail

// Maximum number of arcs sharing a single point; endpoints count as shared.
inline int intersection_multiplicity(const std::vector<ExactArc>& arcs) {
    if (arcs.empty()) return 0;
    return detail::sweep_multiplicity(
        arcs, QField::integer(0), [](const QField& x, const QField& y) { return x < y; },
        [](const QField& x, const QField& y) { return x == y; });
}

// Floating variant; positions within tol are treated as one point.
inline int intersection_multiplicity(const std::vector<NumericArc>& arcs, double tol = 1e-12) {
    if (arcs.empty()) return 0;
    return detail::sweep_multiplicity(
        arcs, 0.0, [tol](double x, double y) { return x < y - tol; },
        [tol](double x, double y) { return std::abs(x - y) <= tol; });
}

}  // namespace rotorlab
