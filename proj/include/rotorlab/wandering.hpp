#pragma once
// Wandering-interval scans, semiconjugacy onto the underlying rotation, and
// the distortion inequality that powers the dichotomy experiment.
//
// A scan certifies pairwise disjointness of the iterates of a candidate arc up
// to a finite horizon.  When the candidate is a tracked gap of a gap system
// the scan runs symbolically: iterate endpoints are gap atoms in exact
// quadratic arithmetic, so disjointness reduces to exact distinctness of the
// downstairs atoms.  Any other candidate is iterated numerically through the
// lift (backward via bisection of the monotone lift), with interval preimages
// taken as the maximal interval mapping into the target.  A backward scan that
// meets a plateau value reports the collapse index instead of erroring: the
// preimage there is the whole plateau and the orbit of arcs ends.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rotorlab/arc.hpp"
#include "rotorlab/gap_map.hpp"
#include "rotorlab/rotation_number.hpp"
#include "rotorlab/variation.hpp"

namespace rotorlab {

enum class ScanDirection { forward, backward, two_sided };

struct WanderingReport {
    NumericArc interval{0.0, 0.0};
    ScanDirection direction = ScanDirection::forward;
    i64 horizon = 0;
    i64 disjoint_up_to = 0;
    double min_length_seen = 0.0;
    bool limit_periodic = false;
    std::optional<i64> collapse_index;  // backward orbit entered a plateau here
    bool exact = false;                 // endpoints certified in exact arithmetic
};

namespace detail {

// Pairwise-disjointness bookkeeping on the circle: arcs are split at the seam
// into linear segments; a new arc is rejected when its interior meets any
// stored segment.  Touching endpoints do not count as overlap.
class DisjointSegments {
public:
    bool insert(double lo, double len) {
        lo = frac(lo);
        if (len >= 1.0) return false;
        double hi = lo + len;
        if (hi > 1.0) {
            if (!piece_ok(lo, 1.0) || !piece_ok(0.0, hi - 1.0)) return false;
            put(lo, 1.0);
            put(0.0, hi - 1.0);
        } else {
            if (!piece_ok(lo, hi)) return false;
            put(lo, hi);
        }
        return true;
    }

private:
    static constexpr double kTol = 1e-12;

    bool piece_ok(double a, double b) const {
        auto it = std::lower_bound(segs_.begin(), segs_.end(), std::pair(a, a));
        if (it != segs_.end() && it->first < b - kTol) return false;
        if (it != segs_.begin() && std::prev(it)->second > a + kTol) return false;
        return true;
    }
    void put(double a, double b) {
        segs_.insert(std::lower_bound(segs_.begin(), segs_.end(), std::pair(a, b)),
                     {a, b});
    }

    std::vector<std::pair<double, double>> segs_;  // (start, end), start <= end
};

// Gap length at an arbitrary chain index, extending past the tracked window
// with the analytic weight rule; indices on the collapsed side of a chain
// (images of a plateau, preimages of a jump) are points of length zero.
inline double gap_length_extended(const GapMap& m, int f, i64 k) {
    const auto& spec = m.spec();
    if (spec.kind == GapKind::backward_chain && k > 0) return 0.0;
    if (spec.kind == GapKind::forward_chain && k < 0) return 0.0;
    i64 lo = m.k_min(f), hi = m.k_max(f);
    if (k >= lo && k <= hi) return m.gap(f, k).length;
    i64 edge = k > hi ? hi : lo;
    double len = m.gap(f, edge).length;
    auto rule_ratio = [&](i64 j) {  // length(j+1)/length(j), analytic
        switch (spec.rule) {
            case WeightRule::geometric: {
                bool shrink = spec.kind == GapKind::forward_chain ||
                              (spec.kind == GapKind::two_sided && j >= 0);
                return shrink ? spec.lambda : 1.0 / spec.lambda;
            }
            case WeightRule::inverse_quadratic: {
                double jj = static_cast<double>(j);
                return (jj * jj + 4.0) / ((jj + 1.0) * (jj + 1.0) + 4.0);
            }
            case WeightRule::smooth_ratio: {
                double z = m.atom_exact(f, j).to_double();
                double g = smooth_ratio_model(z, spec.delta, spec.beta);
                return spec.kind == GapKind::forward_chain ? 1.0 / g : g;
            }
            default: return 1.0;
        }
    };
    if (k > hi)
        for (i64 j = hi; j < k; ++j) len *= rule_ratio(j);
    else
        for (i64 j = lo; j > k; --j) len /= rule_ratio(j - 1);
    return len;
}

// Identify a candidate arc with a tracked gap of the system.
inline std::optional<std::pair<int, i64>> match_gap(const GapMap& m,
                                                    const NumericArc& arc) {
    double len = arc_length(arc);
    for (const auto& g : m.gaps_sorted()) {
        if (std::abs(g.left - arc.lo) < 1e-9 && std::abs(g.length - len) < 1e-9)
            return std::pair<int, i64>(g.family, g.k);
    }
    return std::nullopt;
}

// Smallest x with F(x) >= y (resp. largest with F(x) <= y) by bisection of the
// monotone lift, right-limit policy.
inline double invert_lift_lo(const CircleMap& f, double y) {
    double a = y - 2.0, b = y + 2.0;
    for (int i = 0; i < 100 && b - a > 1e-15; ++i) {
        double m = 0.5 * (a + b);
        (f.lift(m, Side::right) >= y ? b : a) = m;
    }
    return b;
}
inline double invert_lift_hi(const CircleMap& f, double y) {
    double a = y - 2.0, b = y + 2.0;
    for (int i = 0; i < 100 && b - a > 1e-15; ++i) {
        double m = 0.5 * (a + b);
        (f.lift(m, Side::left) <= y ? a : b) = m;
    }
    return a;
}

}  // namespace detail

inline WanderingReport scan_wandering(const CircleMap& f, const NumericArc& interval,
                                      ScanDirection direction, i64 horizon) {
    require(horizon >= 1, "scan_wandering: horizon must be at least 1");
    require(arc_length(interval) > 0.0, "scan_wandering: candidate interval is degenerate");
    WanderingReport rep;
    rep.interval = interval;
    rep.direction = direction;
    rep.horizon = horizon;
    rep.min_length_seen = arc_length(interval);
    if (const AlphaHandle* h = f.rotation_handle(); h != nullptr && h->is_rational())
        rep.limit_periodic = true;

    // symbolic path: the candidate is a tracked gap, iterates are gaps
    if (const auto* gm = dynamic_cast<const GapMap*>(&f)) {
        if (auto hit = detail::match_gap(*gm, interval)) {
            auto [fam, k0] = *hit;
            i64 klo = direction == ScanDirection::forward ? k0 : k0 - horizon;
            i64 khi = direction == ScanDirection::backward ? k0 : k0 + horizon;
            std::vector<QField> atoms;
            atoms.reserve(static_cast<std::size_t>(khi - klo + 1));
            for (i64 k = klo; k <= khi; ++k) atoms.push_back(gm->atom_exact(fam, k));
            std::sort(atoms.begin(), atoms.end());
            bool distinct = true;
            for (std::size_t i = 1; i < atoms.size(); ++i)
                if (atoms[i - 1] == atoms[i]) distinct = false;
            if (distinct) {
                rep.exact = true;
                rep.disjoint_up_to = horizon;
                for (i64 k = klo; k <= khi; ++k)
                    rep.min_length_seen = std::min(
                        rep.min_length_seen, detail::gap_length_extended(*gm, fam, k));
                return rep;
            }
        }
    }

    // numeric path: iterate endpoints through the lift
    detail::DisjointSegments segs;
    segs.insert(interval.lo, arc_length(interval));
    auto plateau_value_inside = [&f](double a, double len) -> bool {
        for (const auto& p : f.plateaus()) {
            double v = frac(p.value);
            double off = v - frac(a);
            off -= std::floor(off);
            if (off > 1e-12 && off < len - 1e-12) return true;
        }
        return false;
    };

    double flo = frac(interval.lo), flen = arc_length(interval);
    double blo = flo, blen = flen;
    i64 steps = 0;
    for (i64 i = 1; i <= horizon; ++i) {
        if (direction != ScanDirection::backward) {
            double a = f.lift(flo, Side::right);
            double b = f.lift(flo + flen, Side::left);
            flo = frac(a);
            flen = std::max(0.0, std::min(b - a, 1.0));
            if (!segs.insert(flo, flen)) break;
            rep.min_length_seen = std::min(rep.min_length_seen, flen);
        }
        if (direction != ScanDirection::forward) {
            if (plateau_value_inside(blo, blen)) {
                rep.collapse_index = i;
                break;
            }
            double a = detail::invert_lift_lo(f, blo);
            double b = detail::invert_lift_hi(f, blo + blen);
            blo = frac(a);
            blen = std::max(0.0, std::min(b - a, 1.0));
            if (!segs.insert(blo, blen)) break;
            rep.min_length_seen = std::min(rep.min_length_seen, blen);
        }
        steps = i;
    }
    rep.disjoint_up_to = steps;
    return rep;
}

// ---------------------------------------------------------------------------
// Semiconjugacy onto the rigid rotation of the map's exact angle.

struct CollapsedArc {
    NumericArc arc{0.0, 0.0};
    double point = 0.0;  // downstairs image of the collapsed arc
};

struct Semiconjugacy {
    std::function<double(double)> h;  // continuous non-decreasing degree-one map
    std::vector<CollapsedArc> collapsed;
    double alpha = 0.0;
    double residual = 0.0;  // sup |h(f(x)) - h(x) - alpha| observed on the grid
};

inline Semiconjugacy compute_semiconjugacy(const MapPtr& map, double resolution,
                                           int grid = 2000) {
    require(map != nullptr, "compute_semiconjugacy: null map");
    const AlphaHandle* h = map->rotation_handle();
    require(h != nullptr, "compute_semiconjugacy: map carries no exact angle");
    require(!h->is_rational(),
            "compute_semiconjugacy: rotation number is rational; no semiconjugacy "
            "onto an irrational rotation exists");
    Semiconjugacy sc;
    sc.alpha = h->approx();
    if (auto gm = std::dynamic_pointer_cast<const GapMap>(map)) {
        sc.h = [gm](double x) { return gm->collapse(x); };
        for (const auto& g : gm->gaps_sorted())
            sc.collapsed.push_back({{g.left, frac(g.left + g.length)}, frac(g.z)});
    } else if (std::dynamic_pointer_cast<const RigidRotation>(map)) {
        sc.h = [](double x) { return frac(x); };
    } else {
        fail("compute_semiconjugacy: supported for rotations and gap systems");
    }
    double worst = 0.0;
    for (int i = 0; i < grid; ++i) {
        double x = static_cast<double>(i) / grid;
        double y;
        try {
            y = frac(map->lift(x, Side::right));
        } catch (const std::exception&) {
            continue;  // outside the evaluable window
        }
        double r = sc.h(y) - sc.h(x) - sc.alpha;
        r -= std::floor(r);
        worst = std::max(worst, std::min(r, 1.0 - r));
    }
    sc.residual = worst;
    require(sc.residual < resolution,
            "compute_semiconjugacy: residual " + std::to_string(sc.residual) +
                " above the requested resolution; enlarge the window or relax the "
                "resolution");
    return sc;
}

// ---------------------------------------------------------------------------
// Distortion of iterated derivatives over a test arc.

struct DistortionReport {
    i64 K = 1;         // quotient bound of the exact angle
    double V = 0.0;    // variation of log Df over the support
    double beta = 1.0; // e^{2(K+1)V}
    double observed_max_ratio = 1.0;
    i64 k_used = 0;
    double witness_x = 0.0, witness_y = 0.0;  // pair realizing the max ratio
    int excluded_samples = 0;                 // samples lost to plateaus
    bool v_finite = true;
};

inline DistortionReport distortion_check(const CircleMap& f, const NumericArc& T,
                                         i64 k, int samples = 64) {
    require(k >= 1, "distortion_check: need at least one iterate");
    require(samples >= 2, "distortion_check: need at least two samples");
    const AlphaHandle* h = f.rotation_handle();
    require(h != nullptr && !h->is_rational(),
            "distortion_check: needs a map with an exact irrational angle");
    DistortionReport rep;
    rep.K = h->max_quotient();
    auto var = variation_log_derivative(f);
    rep.V = var.V;
    rep.v_finite = var.finite;
    rep.beta = std::exp(2.0 * static_cast<double>(rep.K + 1) * rep.V);
    rep.k_used = k;

    auto in_plateau = [&f](double x) {
        for (const auto& p : f.plateaus()) {
            double off = frac(x) - frac(p.lo);
            off -= std::floor(off);
            if (off > 1e-12 && off < p.length() - 1e-12) return true;
        }
        return false;
    };

    double len = arc_length(T);
    bool have = false;
    double smin = 0.0, smax = 0.0, xmin = 0.0, xmax = 0.0;
    for (int j = 0; j < samples; ++j) {
        double x0 = frac(T.lo + len * j / (samples - 1));
        if (in_plateau(x0)) {
            ++rep.excluded_samples;
            continue;
        }
        double x = x0, acc = 0.0;
        bool ok = true;
        for (i64 i = 0; i < k; ++i) {
            double d = f.derivative(x, Side::right);
            if (!(d > 0.0)) {
                ok = false;  // orbit fell onto a plateau
                break;
            }
            acc += std::log(d);
            x = frac(f.lift(x, Side::right));
        }
        if (!ok) {
            ++rep.excluded_samples;
            continue;
        }
        if (!have || acc < smin) smin = acc, xmin = x0;
        if (!have || acc > smax) smax = acc, xmax = x0;
        have = true;
    }
    if (have) {
        rep.observed_max_ratio = std::exp(smax - smin);
        rep.witness_x = xmax;
        rep.witness_y = xmin;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// The dichotomy experiment: scan a forward and a backward candidate and check
// the proof's key length inequality on whatever survives.

struct TheoremAReport {
    WanderingReport forward;
    WanderingReport backward;
    double V = 0.0;
    i64 K = 1;
    double beta = 1.0;
    double key_lhs = 0.0;  // smallest backward iterate length seen
    double key_rhs = 0.0;  // forward candidate length / beta
    bool key_inequality_ok = true;
    bool forward_survives = false;
    bool backward_survives = false;
    std::string verdict;
};

inline TheoremAReport theorem_a_experiment(const CircleMap& f,
                                           const NumericArc& candidate_forward,
                                           const NumericArc& candidate_backward,
                                           i64 horizon) {
    auto var = variation_log_derivative(f);
    require(var.finite,
            "theorem_a_experiment: variation of log Df did not certify as finite; "
            "experiment refused");
    const AlphaHandle* h = f.rotation_handle();
    require(h != nullptr && !h->is_rational(),
            "theorem_a_experiment: needs a map with an exact irrational angle");

    TheoremAReport rep;
    rep.V = var.V;
    rep.K = h->max_quotient();
    rep.beta = std::exp(2.0 * static_cast<double>(rep.K + 1) * rep.V);
    rep.forward = scan_wandering(f, candidate_forward, ScanDirection::forward, horizon);
    rep.backward =
        scan_wandering(f, candidate_backward, ScanDirection::backward, horizon);
    rep.forward_survives =
        rep.forward.disjoint_up_to >= horizon && !rep.forward.collapse_index;
    rep.backward_survives =
        rep.backward.disjoint_up_to >= horizon && !rep.backward.collapse_index;

    if (rep.backward.disjoint_up_to >= 1 && !rep.backward.collapse_index) {
        rep.key_lhs = rep.backward.min_length_seen;
        rep.key_rhs = arc_length(candidate_forward) / rep.beta;
        rep.key_inequality_ok = rep.key_lhs >= rep.key_rhs - 1e-15;
    }

    if (rep.forward_survives && rep.backward_survives) {
        rep.verdict = "both candidates survive the horizon (homeomorphism regime)";
    } else if (!rep.forward_survives && !rep.backward_survives) {
        rep.verdict = "both candidates fail";
    } else if (rep.forward_survives) {
        rep.verdict = rep.backward.collapse_index
                          ? "backward candidate collapses at a plateau; no backward "
                            "wandering orbit of arcs"
                          : "backward candidate overlaps; no backward wandering";
    } else {
        rep.verdict = "forward candidate overlaps; no forward wandering";
    }
    return rep;
}

}  // namespace rotorlab
