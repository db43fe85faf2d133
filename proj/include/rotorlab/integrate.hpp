#pragma once
// Adaptive Dormand-Prince 5(4) integration of torus vector fields, with
// fourth-order dense output, transverse-loop crossing detection refined on
// the dense interpolant, capture detection near attracting singularities, and
// honest truncation when the step size underflows next to an equilibrium.
// Orbits are integrated in the universal cover (lifted coordinates), so
// winding numbers fall out of the endpoint displacement.

#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "rotorlab/common.hpp"
#include "rotorlab/torus_field.hpp"

namespace rotorlab {

struct IntegrateOptions {
    double tol = defaults::integrate_tol;  // local error per unit time
    double h_init = 0.02;
    double h_min = 1e-12;
    double h_max = 0.12;
    double t_budget = 1e4;       // flow-time budget for crossing hunts
    double capture_radius = 0.0; // stop within this distance of an attractor (0: disabled)
    bool record = false;         // keep the orbit polyline
};

struct OrbitSegment {
    std::vector<double> times;
    std::vector<Vec2> points;  // lifted
    Vec2 z_end{};              // lifted
    double t_end = 0.0;
    bool truncated = false;    // step underflow: equilibrium proximity
    bool captured = false;     // entered the capture radius of an attractor
};

struct SectionCrossing {
    double s = 0.0;    // loop parameter of the hit
    double t = 0.0;    // flow time consumed
    Vec2 z{};          // lifted position of the hit
};

namespace integ_detail {

struct DpStep {
    Vec2 y0{}, y1{};
    Vec2 k[7];
    double t0 = 0.0, h = 0.0;
    double err = 0.0;  // scaled error estimate
};

template <class RHS>
void run_stages(const RHS& f, double t, const Vec2& y, double h, DpStep& st) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                            a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    st.t0 = t;
    st.h = h;
    st.y0 = y;
    Vec2* k = st.k;
    // k[0] is expected to hold f(y) already (FSAL); recompute when unset.
    k[1] = f(y + (h * a21) * k[0]);
    k[2] = f(y + h * (a31 * k[0] + a32 * k[1]));
    k[3] = f(y + h * (a41 * k[0] + a42 * k[1] + a43 * k[2]));
    k[4] = f(y + h * (a51 * k[0] + a52 * k[1] + a53 * k[2] + a54 * k[3]));
    k[5] = f(y + h * (a61 * k[0] + a62 * k[1] + a63 * k[2] + a64 * k[3] + a65 * k[4]));
    st.y1 = y + h * (a71 * k[0] + a73 * k[2] + a74 * k[3] + a75 * k[4] + a76 * k[5]);
    k[6] = f(st.y1);
    Vec2 e = h * (e1 * k[0] + e3 * k[2] + e4 * k[3] + e5 * k[4] + e6 * k[5] + e7 * k[6]);
    double sx = 1.0 + std::max(std::fabs(y.x), std::fabs(st.y1.x));
    double sy = 1.0 + std::max(std::fabs(y.y), std::fabs(st.y1.y));
    st.err = std::max(std::fabs(e.x) / sx, std::fabs(e.y) / sy);
}

// Fourth-order dense interpolant (classic dopri5 continuation).
inline Vec2 dense_eval(const DpStep& st, double theta) {
    static constexpr double d1 = -12715105075.0 / 11282082432.0;
    static constexpr double d3 = 87487479700.0 / 32700410799.0;
    static constexpr double d4 = -10690763975.0 / 1880347072.0;
    static constexpr double d5 = 701980252875.0 / 199316789632.0;
    static constexpr double d6 = -1453857185.0 / 822651844.0;
    static constexpr double d7 = 69997945.0 / 29380423.0;
    Vec2 diff = st.y1 - st.y0;
    Vec2 r3 = st.h * st.k[0] - diff;
    Vec2 r4 = diff - st.h * st.k[6] - r3;
    Vec2 r5 = st.h * (d1 * st.k[0] + d3 * st.k[2] + d4 * st.k[3] + d5 * st.k[4] +
                      d6 * st.k[5] + d7 * st.k[6]);
    double om = 1.0 - theta;
    return st.y0 + theta * (diff + om * (r3 + theta * (r4 + om * r5)));
}

}  // namespace integ_detail

// Core driver.  `rhs` maps a lifted point to a velocity (wrapping is the
// caller's concern inside rhs).  `on_step` sees every accepted step and may
// return a theta in (0, 1] to stop inside that step (event located).
template <class RHS, class StepCb>
OrbitSegment integrate_core(const RHS& rhs, Vec2 z0, double duration, const IntegrateOptions& opt,
                            StepCb&& on_step) {
    require(duration > 0.0, "integrate: duration must be positive");
    require(opt.tol > 0.0, "integrate: tolerance must be positive");
    OrbitSegment seg;
    double t = 0.0;
    Vec2 z = z0;
    if (opt.record) {
        seg.times.push_back(0.0);
        seg.points.push_back(z);
    }
    integ_detail::DpStep st;
    st.k[0] = rhs(z);
    double h = std::min(opt.h_init, opt.h_max);
    bool fsal_valid = true;
    while (t < duration) {
        h = std::min(h, duration - t);
        if (!fsal_valid) st.k[0] = rhs(z);
        integ_detail::run_stages(rhs, t, z, h, st);
        fsal_valid = true;
        double tol_h = opt.tol * std::max(h, 1e-8);
        if (st.err > tol_h && h > opt.h_min * 1.01) {
            double fac = std::max(0.2, 0.9 * std::pow(tol_h / (st.err + 1e-300), 0.25));
            h = std::max(opt.h_min, h * fac);
            fsal_valid = true;  // k[0] unchanged: same state
            continue;
        }
        if (st.err > 64.0 * tol_h && h <= opt.h_min * 1.01) {
            seg.truncated = true;  // cannot resolve: equilibrium or blow-up
            break;
        }
        double stop_theta = on_step(st);
        if (stop_theta > 0.0) {
            z = integ_detail::dense_eval(st, stop_theta);
            t += stop_theta * h;
            if (opt.record) {
                seg.times.push_back(t);
                seg.points.push_back(z);
            }
            break;
        }
        z = st.y1;
        t += h;
        st.k[0] = st.k[6];  // FSAL
        if (opt.record) {
            seg.times.push_back(t);
            seg.points.push_back(z);
        }
        double fac = 0.9 * std::pow(tol_h / (st.err + 1e-300), 0.25);
        h = std::min(opt.h_max, h * std::min(5.0, std::max(0.2, fac)));
        if (h < opt.h_min) h = opt.h_min;
    }
    seg.z_end = z;
    seg.t_end = t;
    return seg;
}

// Plain time integration; negative duration integrates the reversed field.
inline OrbitSegment integrate(const TorusVectorField& field, const Vec2& z0, double duration,
                              const IntegrateOptions& opt = {}) {
    bool backward = duration < 0.0;
    auto rhs = [&](const Vec2& z) {
        Vec2 v = field.at(wrap01(z));
        return backward ? Vec2{-v.x, -v.y} : v;
    };
    return integrate_core(rhs, z0, std::fabs(duration), opt, [](const integ_detail::DpStep&) {
        return 0.0;
    });
}

// Next positive-direction crossing of a transverse loop, starting from the
// (lifted) point z0.  Crossings are detected on accepted steps and refined on
// the dense interpolant to ~1e-12 in the signed loop offset.  Returns nullopt
// if the flow-time budget runs out, the orbit truncates, or it is captured.
inline std::optional<SectionCrossing> next_crossing(const TorusVectorField& field,
                                                    const TransverseLoop& loop, const Vec2& z0,
                                                    const IntegrateOptions& opt = {},
                                                    OrbitSegment* orbit_out = nullptr,
                                                    bool backward = false) {
    std::vector<Vec2> attractors;
    if (opt.capture_radius > 0.0)
        for (const auto& s : field.singularities())
            if (backward ? is_repellor(s) : is_attractor(s)) attractors.push_back(s.position);
    auto rhs = [&](const Vec2& z) {
        Vec2 v = field.at(wrap01(z));
        return backward ? Vec2{-v.x, -v.y} : v;
    };
    const double dir = backward ? -1.0 : 1.0;  // crossing side flips with time reversal
    double d_prev = dir * loop.locate(wrap01(z0)).dist;
    bool armed = d_prev < -1e-9;
    bool captured = false;
    std::optional<SectionCrossing> hit;
    auto cb = [&](const integ_detail::DpStep& st) -> double {
        Vec2 z1 = st.y1;
        for (const auto& a : attractors)
            if (torus_dist(wrap01(z1), a) < opt.capture_radius) {
                captured = true;
                return 1.0;
            }
        double d1 = dir * loop.locate(wrap01(z1)).dist;
        double d0 = d_prev;
        d_prev = d1;
        if (!armed) {
            if (d1 < -1e-9) armed = true;
            return 0.0;
        }
        if (!(d0 < 0.0 && d1 >= 0.0)) return 0.0;
        if (d1 - d0 > 0.4) return 0.0;  // wrap branch artefact, not a crossing
        // Bisect theta on the dense interpolant.
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 64; ++i) {
            double mid = 0.5 * (lo + hi);
            double dm = dir * loop.locate(wrap01(integ_detail::dense_eval(st, mid))).dist;
            if (dm < 0.0)
                lo = mid;
            else
                hi = mid;
        }
        double theta = hi;
        Vec2 zc = integ_detail::dense_eval(st, theta);
        auto loc = loop.locate(wrap01(zc));
        // Guard against the antipodal jump of the signed-distance field: a
        // genuine crossing bisects to a point on the loop, a jump does not.
        if (std::fabs(loc.dist) > 1e-6) return 0.0;
        hit = SectionCrossing{loc.s, st.t0 + theta * st.h, zc};
        return theta;
    };
    IntegrateOptions o = opt;
    o.h_max = std::min(o.h_max, 0.12);  // keep chords short enough for detection
    auto seg = integrate_core(rhs, z0, opt.t_budget, o, cb);
    if (orbit_out) *orbit_out = seg;
    if (orbit_out) orbit_out->captured = captured;
    if (captured || seg.truncated) return std::nullopt;
    if (hit) hit->t = seg.t_end;  // driver already folded the dense stop time in
    return hit;
}

// Forward-then-backward integration defect, for integrator verification.
inline double reversibility_defect(const TorusVectorField& field, const Vec2& z0, double duration,
                                   const IntegrateOptions& opt = {}) {
    auto fwd = integrate(field, z0, duration, opt);
    if (fwd.truncated) fail("reversibility_defect: forward orbit truncated");
    auto back = integrate(field, fwd.z_end, -duration, opt);
    if (back.truncated) fail("reversibility_defect: backward orbit truncated");
    return norm(back.z_end - z0);
}

}  // namespace rotorlab
