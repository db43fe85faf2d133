#pragma once
// First-return maps of torus flows on transverse loops, sampled adaptively
// and packaged as order-preserving circle maps.  Heights whose forward orbit
// falls into a trapping basin form capture windows; the return map extends
// continuously across each window as a plateau (both one-sided exit limits
// agree, since near-miss orbits all leave along the same escaping
// separatrix).  Time-reversed cells produce the inverse picture: an emission
// gap in the image, i.e. an upward jump of the lift.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "rotorlab/circle_map.hpp"
#include "rotorlab/integrate.hpp"
#include "rotorlab/torus_field.hpp"

namespace rotorlab {

struct ReturnMapOptions {
    int base_samples = 512;      // uniform pre-sampling of the loop parameter
    double refine_dy = 0.02;     // split segments with larger image increments
    double min_dx = 1e-7;        // refinement floor in the loop parameter
    double edge_resolve = 1e-9;  // bisection width for window edges
    double jump_threshold = 1e-4;  // image gap above this is a discontinuity
    bool locate_jumps = true;    // bisect residual gaps down to min_dx
    int max_samples = 40000;
    IntegrateOptions flow{};     // capture_radius 0 picks a field-derived value
};

struct ReturnMapStats {
    int samples = 0;
    int captured = 0;
    int unresolved = 0;
    int plateau_count = 0;
    int jump_count = 0;
    double closure_defect = 0.0;  // deviation of the total lift winding from 1
};

// Piecewise-linear monotone circle map through refined samples.  Samples hold
// the right-limit lift value; a left limit below it marks an upward jump.
class SampledMonotoneMap final : public CircleMap {
public:
    struct Sample {
        double x = 0.0;       // loop parameter in [x0, x0 + 1)
        double y = 0.0;       // lift value, right limit
        double y_left = 0.0;  // left limit (== y except at jumps)
    };

    SampledMonotoneMap(std::vector<Sample> samples, std::vector<PlateauArc> plateaus,
                       std::vector<JumpPoint> jumps, std::optional<AlphaHandle> handle,
                       ReturnMapStats stats)
        : samples_(std::move(samples)), plateaus_(std::move(plateaus)),
          jumps_(std::move(jumps)), handle_(std::move(handle)), stats_(stats) {
        require(samples_.size() >= 2, "sampled map: needs at least two samples");
        for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
            require(samples_[i + 1].x > samples_[i].x, "sampled map: parameters not sorted");
            require(samples_[i + 1].y_left >= samples_[i].y - 1e-9,
                    "sampled map: lift values decrease");
        }
        require(samples_.back().x - samples_.front().x < 1.0,
                "sampled map: samples span more than one period");
    }

    double lift(double x, Side s) const override {
        double shift = std::floor(x - samples_.front().x);
        double x0 = x - shift;
        // Index of the last sample with sample.x <= x0.
        std::size_t lo = 0, hi = samples_.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (samples_[mid].x <= x0) lo = mid; else hi = mid;
        }
        const Sample& a = samples_[lo];
        if (x0 == a.x && s == Side::left && lo > 0) {
            return a.y_left + shift;
        }
        bool last = lo + 1 == samples_.size();
        double xb = last ? samples_.front().x + 1.0 : samples_[lo + 1].x;
        double yb = last ? samples_.front().y_left + 1.0 : samples_[lo + 1].y_left;
        if (x0 == a.x && s == Side::left && lo == 0) {
            // left limit at the first sample wraps to the last segment
            return a.y_left + shift;
        }
        double t = (x0 - a.x) / (xb - a.x);
        return a.y + t * (yb - a.y) + shift;
    }

    double derivative(double x, Side s) const override {
        double shift = std::floor(x - samples_.front().x);
        double x0 = x - shift;
        std::size_t lo = 0, hi = samples_.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (samples_[mid].x <= x0) lo = mid; else hi = mid;
        }
        if (x0 == samples_[lo].x && s == Side::left)
            lo = lo == 0 ? samples_.size() - 1 : lo - 1;
        const Sample& a = samples_[lo];
        bool last = lo + 1 == samples_.size();
        double xb = last ? samples_.front().x + 1.0 : samples_[lo + 1].x;
        double yb = last ? samples_.front().y_left + 1.0 : samples_[lo + 1].y_left;
        return (yb - a.y) / (xb - a.x);
    }

    std::vector<double> breakpoints() const override {
        std::vector<double> b;
        for (const auto& p : plateaus_) {
            b.push_back(frac(p.lo));
            b.push_back(frac(p.hi));
        }
        for (const auto& j : jumps_) b.push_back(j.at);
        std::sort(b.begin(), b.end());
        return b;
    }
    std::vector<PlateauArc> plateaus() const override { return plateaus_; }
    std::vector<JumpPoint> jumps() const override { return jumps_; }
    const AlphaHandle* rotation_handle() const override {
        return handle_ ? &*handle_ : nullptr;
    }
    std::string kind() const override { return "sampled-return"; }

    const std::vector<Sample>& samples() const { return samples_; }
    const ReturnMapStats& stats() const { return stats_; }
    void attach_handle(AlphaHandle h) { handle_ = std::move(h); }

private:
    std::vector<Sample> samples_;
    std::vector<PlateauArc> plateaus_;
    std::vector<JumpPoint> jumps_;
    std::optional<AlphaHandle> handle_;
    ReturnMapStats stats_;
};

namespace return_detail {

enum class FateKind { returned, captured, unresolved };

struct Fate {
    FateKind kind = FateKind::unresolved;
    double s = 0.0;  // raw return parameter in [0,1) when returned
};

inline double default_capture_radius(const TorusVectorField& field) {
    if (auto* b = dynamic_cast<const BlownUpField*>(&field)) {
        double r = 1e300;
        for (const auto& st : b->strips()) r = std::min(r, 0.1 * st.s2);
        return r < 1e300 ? r : 1e-3;
    }
    return 1e-3;
}

template <class Classify>
double bisect_edge(double resolved, double captured, const Classify& classify, double width) {
    // Shrink [resolved, captured) to `width`, keeping the fate split.
    for (int i = 0; i < 64 && std::fabs(captured - resolved) > width; ++i) {
        double mid = 0.5 * (resolved + captured);
        if (classify(mid).kind == FateKind::returned)
            resolved = mid;
        else
            captured = mid;
    }
    return resolved;
}

}  // namespace return_detail

// Sample the first-return map of `field` on `loop`.  Orbits that enter an
// attractor basin are recorded as capture windows and become plateaus whose
// value is the common one-sided exit limit; image gaps larger than the jump
// threshold become upward jumps of the lift.
inline std::shared_ptr<SampledMonotoneMap> induced_return_map(const TorusVectorField& field,
                                                              const TransverseLoop& loop,
                                                              const ReturnMapOptions& opt = {}) {
    using namespace return_detail;
    require(opt.base_samples >= 16, "return map: too few base samples");
    require(opt.min_dx > 0.0 && opt.min_dx < 1e-3, "return map: bad refinement floor");

    IntegrateOptions flow = opt.flow;
    if (flow.capture_radius == 0.0) flow.capture_radius = default_capture_radius(field);

    int unresolved = 0;
    auto classify = [&](double s) -> Fate {
        Vec2 z = loop.point(wrap01(s));
        OrbitSegment orb;
        auto hit = next_crossing(field, loop, z, flow, &orb);
        if (hit) return {FateKind::returned, hit->s};
        if (orb.captured) return {FateKind::captured, 0.0};
        return {FateKind::unresolved, 0.0};
    };

    std::map<double, Fate> fates;
    for (int i = 0; i < opt.base_samples; ++i) {
        double x = static_cast<double>(i) / opt.base_samples;
        fates[x] = classify(x);
    }

    // Refine steep resolved segments and resolved/captured boundaries.
    bool changed = true;
    while (changed && static_cast<int>(fates.size()) < opt.max_samples) {
        changed = false;
        auto it = fates.begin();
        std::vector<double> inserts;
        for (; it != fates.end(); ++it) {
            auto nx = std::next(it);
            double xa = it->first;
            double xb = nx == fates.end() ? fates.begin()->first + 1.0 : nx->first;
            const Fate& fa = it->second;
            const Fate& fb = nx == fates.end() ? fates.begin()->second : nx->second;
            if (xb - xa <= opt.min_dx) continue;
            bool split = false;
            if (fa.kind == FateKind::returned && fb.kind == FateKind::returned) {
                if (wrap_half(fb.s - fa.s) > opt.refine_dy) split = true;
            } else if (fa.kind != fb.kind) {
                split = (xb - xa) > 4.0 * opt.edge_resolve;
            }
            if (split) inserts.push_back(0.5 * (xa + xb));
        }
        for (double x : inserts) {
            if (static_cast<int>(fates.size()) >= opt.max_samples) break;
            double xw = wrap01(x);
            if (fates.count(xw)) continue;
            fates[xw] = classify(xw);
            changed = true;
        }
    }

    // Localise discontinuities: any returned/returned segment whose image gap
    // exceeds the threshold is bisected towards min_dx.  A steep-but-smooth
    // zone dissolves under this (child gaps fall below the threshold), a
    // genuine jump survives at full height inside a min_dx interval.
    if (opt.locate_jumps) {
        std::function<void(double, Fate, double, Fate, int)> hunt =
            [&](double xa, Fate fa, double xb, Fate fb, int depth) {
                if (depth > 40 || xb - xa <= opt.min_dx) return;
                if (static_cast<int>(fates.size()) >= opt.max_samples) return;
                if (fa.kind != FateKind::returned || fb.kind != FateKind::returned) return;
                if (wrap_half(fb.s - fa.s) <= opt.jump_threshold) return;
                double mid = 0.5 * (xa + xb);
                double xw = wrap01(mid);
                Fate fm = fates.count(xw) ? fates[xw] : (fates[xw] = classify(xw));
                hunt(xa, fa, mid, fm, depth + 1);
                hunt(mid, fm, xb, fb, depth + 1);
            };
        std::vector<std::pair<double, Fate>> snap(fates.begin(), fates.end());
        for (std::size_t k = 0; k < snap.size(); ++k) {
            auto [xa, fa] = snap[k];
            auto [xb, fb] = k + 1 < snap.size() ? snap[k + 1]
                                                : std::pair<double, Fate>{snap[0].first + 1.0,
                                                                          snap[0].second};
            hunt(xa, fa, xb, fb, 0);
        }
    }

    for (const auto& [x, f] : fates)
        if (f.kind == FateKind::unresolved) ++unresolved;
    int total = static_cast<int>(fates.size());
    require(unresolved * 100 < total,
            "return map: more than 1% of the sampled orbits did not resolve");

    // Rotate the sample origin to a resolved sample following a resolved one,
    // so capture windows never straddle the list boundary.
    std::vector<std::pair<double, Fate>> ring(fates.begin(), fates.end());
    int n = static_cast<int>(ring.size());
    int origin = -1;
    for (int i = 0; i < n; ++i) {
        int prev = (i + n - 1) % n;
        if (ring[i].second.kind == FateKind::returned &&
            ring[prev].second.kind == FateKind::returned) {
            origin = i;
            break;
        }
    }
    require(origin >= 0, "return map: no two adjacent returning samples");
    std::rotate(ring.begin(), ring.begin() + origin, ring.end());
    double x_origin = ring.front().first;
    for (auto& [x, f] : ring)
        if (x < x_origin) x += 1.0;

    // Unwind the raw return parameters into a degree-one lift.
    struct Resolved {
        double x, y;
        bool window_edge = false;
    };
    std::vector<SampledMonotoneMap::Sample> samples;
    std::vector<PlateauArc> plateaus;
    std::vector<JumpPoint> jumps;
    double y_prev = ring.front().second.s;
    double raw_prev = y_prev;
    samples.push_back({ring.front().first, y_prev, y_prev});

    int i = 1;
    while (i < n) {
        const auto& [x, f] = ring[i];
        if (f.kind == FateKind::unresolved) {
            ++i;  // hole: interpolate across it
            continue;
        }
        if (f.kind == FateKind::captured) {
            // Collect the full captured run [i, j].
            int j = i;
            while (j + 1 < n && ring[j + 1].second.kind != FateKind::returned) ++j;
            require(j + 1 < n, "return map: capture window reaches the sample origin");
            double lo_out = samples.back().x;   // last recorded before the window
            double hi_out = ring[j + 1].first;  // first resolved after
            double lo = bisect_edge(lo_out, ring[i].first, classify, opt.edge_resolve);
            double hi = -bisect_edge(-hi_out, -ring[j].first,
                                     [&](double s) { return classify(-s); }, opt.edge_resolve);
            // One-sided exit limits, anchored at the nearest resolved samples so
            // no probe can step past a recorded neighbour.
            double spread = wrap_half(ring[j + 1].second.s - raw_prev);
            require(std::fabs(spread) < opt.jump_threshold,
                    "return map: exit limits disagree across a capture window");
            double value = y_prev + std::max(0.0, 0.5 * spread);
            // Degenerate bisections can stall on a recorded sample; keep the
            // sample list strictly sorted.
            if (hi >= hi_out) hi = 0.5 * (ring[j].first + hi_out);
            if (lo > samples.back().x)
                samples.push_back({lo, value, value});
            else
                lo = samples.back().x;
            plateaus.push_back({lo, hi, value});
            samples.push_back({hi, value, value});
            y_prev = value;
            raw_prev = frac(value);
            i = j + 1;
            continue;
        }
        // Returned sample: unwind, then check for a jump against the previous.
        double y = y_prev + wrap_half(f.s - raw_prev);
        double dx = x - samples.back().x;
        double dy = y - samples.back().y;
        if (dy > opt.jump_threshold && dx <= 2.0 * opt.min_dx) {
            // Hunting has squeezed a discontinuity into this interval: record
            // the one-sided limits at its midpoint.
            double at = samples.back().x + 0.5 * dx;
            jumps.push_back({frac(at), samples.back().y, y});
            samples.push_back({at, y, samples.back().y});
        } else {
            samples.push_back({x, y, y});
        }
        y_prev = y;
        raw_prev = f.s;
        ++i;
    }

    // Closure: one full turn of the loop advances the lift by exactly one.
    double y_close = y_prev + wrap_half(ring.front().second.s - raw_prev);
    double defect = std::fabs(y_close - (samples.front().y + 1.0));
    require(defect < 0.25, "return map: sampled lift does not wind once around the circle");

    // Monotone clean-up of rounding-level dips.
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (samples[k].y_left < samples[k - 1].y) {
            require(samples[k - 1].y - samples[k].y_left < 1e-7,
                    "return map: non-monotone samples beyond rounding");
            samples[k].y_left = samples[k - 1].y;
            samples[k].y = std::max(samples[k].y, samples[k].y_left);
        }
    }

    ReturnMapStats stats;
    stats.samples = static_cast<int>(samples.size());
    stats.captured = 0;
    for (const auto& [x, f] : ring)
        if (f.kind == FateKind::captured) ++stats.captured;
    stats.unresolved = unresolved;
    stats.plateau_count = static_cast<int>(plateaus.size());
    stats.jump_count = static_cast<int>(jumps.size());
    stats.closure_defect = defect;

    std::optional<AlphaHandle> handle;
    if (auto* b = dynamic_cast<const BlownUpField*>(&field))
        if (b->handle() && b->strips().empty()) handle = b->handle();
    if (auto* l = dynamic_cast<const LinearFlowField*>(&field))
        if (l->handle()) handle = l->handle();
    return std::make_shared<SampledMonotoneMap>(std::move(samples), std::move(plateaus),
                                                std::move(jumps), std::move(handle), stats);
}

}  // namespace rotorlab
