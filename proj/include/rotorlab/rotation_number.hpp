#pragma once
// Rotation numbers through non-decreasing degree-one lifts: certified
// finite-orbit estimates (the classical |(F^n(x)-x)/n - rho| <= 1/n bound),
// exact rational detection by solving the lift equation F^q(x) = x + p, the
// locking window of a monotone family around a target rational, and the
// unimodular change of orbit coordinates.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>
#include <vector>

#include "rotorlab/circle_map.hpp"

namespace rotorlab {

struct RationalHit {
    i64 p = 0, q = 1;
    double witness = 0.0;   // circle point solving (or bracketing) F^q(x) = x + p
    double residual = 0.0;  // |F^q(witness) - witness - p|
};

struct RotationEstimate {
    double value = 0.0;
    double radius = 0.0;  // true rotation number lies within [value +- radius]
    std::optional<RationalHit> rational_hit;
};

// (F^n(x0) - x0)/n with certified radius 1/n.  Evaluation is two-sided, so an
// orbit landing exactly on a jump raises the jump error.  A map carrying an
// exact rational angle also gets the periodic-orbit witness at x0.
inline RotationEstimate estimate_rotation(const CircleMap& f, double x0, i64 n) {
    require(n >= 1, "estimate_rotation: need at least one iterate");
    double x = x0;
    for (i64 i = 0; i < n; ++i) x = lift_eval(f, x);
    RotationEstimate est;
    est.value = (x - x0) / static_cast<double>(n);
    est.radius = 1.0 / static_cast<double>(n);
    if (const AlphaHandle* h = f.rotation_handle(); h != nullptr && h->is_rational()) {
        i64 p = h->value().a(), q = h->value().c();
        double y = x0;
        for (i64 i = 0; i < q; ++i) y = lift_eval(f, y);
        double res = std::abs(y - x0 - static_cast<double>(p));
        if (res <= 1e-10) est.rational_hit = RationalHit{p, q, x0, res};
    }
    return est;
}

// Scan denominators upward and report the first q for which the lift equation
// F^q(x) = x + p admits a solution: the grid values of F^q(x) - x change sign
// around p or touch it.  Orbits use the right-limit policy at jumps; grid
// points whose orbit leaves the map's evaluable region are skipped.
inline std::optional<RationalHit> detect_rational(const CircleMap& f, i64 q_max,
                                                  int grid = 128) {
    require(q_max >= 1, "detect_rational: q_max must be at least 1");
    require(grid >= 8, "detect_rational: grid too coarse");
    auto displaced = [&f](double x, i64 q) {
        double y = x;
        for (i64 i = 0; i < q; ++i) y = f.lift(y, Side::right);
        return y - x;
    };
    const double touch_tol = 5e-9;
    for (i64 q = 1; q <= q_max; ++q) {
        std::vector<std::pair<double, double>> g;  // (x, F^q(x) - x)
        g.reserve(static_cast<std::size_t>(grid));
        for (int i = 0; i < grid; ++i) {
            double x = static_cast<double>(i) / grid;
            try {
                g.emplace_back(x, displaced(x, q));
            } catch (const std::exception&) {
                // outside the evaluable window; the remaining samples decide
            }
        }
        if (g.size() < 2) continue;
        double lo = g.front().second, hi = lo;
        for (const auto& [x, v] : g) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        i64 p_lo = static_cast<i64>(std::ceil(lo - touch_tol));
        i64 p_hi = static_cast<i64>(std::floor(hi + touch_tol));
        for (i64 p = p_lo; p <= p_hi; ++p) {
            double pd = static_cast<double>(p);
            // touching witness
            for (const auto& [x, v] : g)
                if (std::abs(v - pd) <= touch_tol)
                    return RationalHit{p, q, x, std::abs(v - pd)};
            // bracketing pair, bisected down to a point witness
            for (std::size_t i = 0; i < g.size(); ++i) {
                auto [xa, va] = g[i];
                auto [xb, vb] = g[(i + 1) % g.size()];
                if (i + 1 == g.size()) xb += 1.0;
                if ((va - pd) * (vb - pd) >= 0.0) continue;
                double a = xa, b = xb, sa = va - pd;
                for (int it = 0; it < 100 && b - a > 1e-14; ++it) {
                    double m = 0.5 * (a + b), vm;
                    try {
                        vm = displaced(m, q) - pd;
                    } catch (const std::exception&) {
                        break;  // keep the bracket midpoint as witness
                    }
                    if (vm == 0.0) {
                        a = b = m;
                        break;
                    }
                    (sa * vm > 0.0 ? a : b) = m;
                }
                double w = frac(0.5 * (a + b));
                double res;
                try {
                    res = std::abs(displaced(w, q) - pd);
                } catch (const std::exception&) {
                    res = std::abs(vb - va);
                }
                return RationalHit{p, q, w, res};
            }
        }
    }
    return std::nullopt;
}

struct ParameterInterval {
    double lo = 0.0, hi = 0.0;
    double width() const { return hi - lo; }
};

// Locking window: the set of parameters where the family's rotation number
// equals p/q is an interval because both extremes of F_eps^q(x) - x - p are
// non-decreasing in eps.  Each window edge is the bisected threshold of one
// extreme, bracketed to `tol`; the window is confirmed by detect_rational at
// its midpoint.  A target outside the family's reach errors with the achieved
// range.
inline ParameterInterval solve_parameter_for_rational(const MonotoneFamily& family,
                                                      i64 p, i64 q, double eps_lo,
                                                      double eps_hi, int grid = 512,
                                                      double tol = 1e-10) {
    require(q >= 1, "solve_parameter_for_rational: q must be at least 1");
    require(eps_lo < eps_hi, "solve_parameter_for_rational: empty parameter window");
    const double pd = static_cast<double>(p);
    auto extremes = [&](double eps) {
        MapPtr m = family.member(eps);
        double lo = 0.0, hi = 0.0;
        for (int i = 0; i <= grid; ++i) {
            double x = static_cast<double>(i) / grid, y = x;
            for (i64 j = 0; j < q; ++j) y = m->lift(y, Side::right);
            double v = y - x - pd;
            if (i == 0) {
                lo = hi = v;
            } else {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        return std::pair<double, double>(lo, hi);
    };
    auto [lo_a, hi_a] = extremes(eps_lo);
    auto [lo_b, hi_b] = extremes(eps_hi);
    if (hi_b < 0.0 || lo_a > 0.0) {
        std::ostringstream os;
        os << "solve_parameter_for_rational: target " << p << "/" << q
           << " outside the achieved rotation range ["
           << (lo_a / static_cast<double>(q) + pd / q) << ", "
           << (hi_b / static_cast<double>(q) + pd / q) << "] over the parameter window";
        throw std::invalid_argument(os.str());
    }

    // smallest eps with max_x >= 0
    double s_lo = eps_lo;
    if (hi_a < 0.0) {
        double a = eps_lo, b = eps_hi;
        while (b - a > tol) {
            double m = 0.5 * (a + b);
            (extremes(m).second >= 0.0 ? b : a) = m;
        }
        s_lo = 0.5 * (a + b);
    }
    // largest eps with min_x <= 0
    double s_hi = eps_hi;
    if (lo_b > 0.0) {
        double a = eps_lo, b = eps_hi;
        while (b - a > tol) {
            double m = 0.5 * (a + b);
            (extremes(m).first <= 0.0 ? a : b) = m;
        }
        s_hi = 0.5 * (a + b);
    }
    require(s_lo <= s_hi + tol,
            "solve_parameter_for_rational: window collapsed below the bracketing "
            "tolerance");
    if (s_hi < s_lo) s_hi = s_lo;

    auto confirm = detect_rational(*family.member(0.5 * (s_lo + s_hi)), q);
    require(confirm.has_value() && confirm->p == p && confirm->q == q &&
                confirm->residual <= 1e-8,
            "solve_parameter_for_rational: window midpoint did not confirm the "
            "target rotation number");
    return {s_lo, s_hi};
}

// Orbit-coordinate change rho -> (a rho + b)/(c rho + d) for an integer matrix
// of determinant +-1; such moves shift the continued-fraction tail without
// changing its eventual statistics.
inline double rotation_orbit_transform(double rho, i64 a, i64 b, i64 c, i64 d) {
    i64 det = checked_add(checked_mul(a, d), -checked_mul(b, c));
    require(det == 1 || det == -1,
            "rotation_orbit_transform: matrix determinant must be +-1");
    double den = static_cast<double>(c) * rho + static_cast<double>(d);
    require(den != 0.0, "rotation_orbit_transform: pole, c*rho + d = 0");
    return (static_cast<double>(a) * rho + static_cast<double>(b)) / den;
}

}  // namespace rotorlab
