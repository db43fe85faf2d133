#pragma once
// Order-preserving circle maps: non-decreasing degree-one lifts, possibly with
// plateau arcs (lift locally constant) and upward jump discontinuities.  The
// base interface exposes one-sided lift and derivative evaluation plus a
// structural descriptor (breakpoints, plateaus, jumps, rotation handle when
// the map is built over an exact angle).

#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotorlab/common.hpp"
#include "rotorlab/handle.hpp"
#include "rotorlab/profile.hpp"

namespace rotorlab {

enum class Side { left, right };

inline double frac(double x) { return x - std::floor(x); }

// Arc [lo, hi] of the fundamental domain on which the lift is constant; the
// arc may extend past 1 to describe a plateau wrapping through 0.
struct PlateauArc {
    double lo = 0.0, hi = 0.0;
    double value = 0.0;  // lift value on the arc
    double length() const { return hi - lo; }
};

// Discontinuity of the lift: lower = left limit, upper = right limit.
struct JumpPoint {
    double at = 0.0;
    double lower = 0.0, upper = 0.0;
    double gap() const { return upper - lower; }
};

class CircleMap {
public:
    virtual ~CircleMap() = default;

    // Lift F with F(x + 1) = F(x) + 1, non-decreasing; `s` picks the one-sided
    // limit at discontinuities (elsewhere both sides agree).
    virtual double lift(double x, Side s) const = 0;
    virtual double derivative(double x, Side s) const = 0;

    virtual std::vector<double> breakpoints() const { return {}; }  // in [0,1)
    virtual std::vector<PlateauArc> plateaus() const { return {}; }
    virtual std::vector<JumpPoint> jumps() const { return {}; }
    virtual const AlphaHandle* rotation_handle() const { return nullptr; }
    virtual std::string kind() const = 0;

};

using MapPtr = std::shared_ptr<const CircleMap>;

// Two-sided lift evaluation; refuses to pick a side exactly at a jump and
// reports both one-sided limits in the error.
inline double lift_eval(const CircleMap& f, double x) {
    double l = f.lift(x, Side::left), r = f.lift(x, Side::right);
    if (r - l > 1e-11) {  // below that the sides differ only by rounding
        std::ostringstream os;
        os << f.kind() << ": two-sided lift at a jump x=" << x << " (left=" << l
           << ", right=" << r << "); pass an evaluation side";
        throw std::invalid_argument(os.str());
    }
    return r;
}
inline double lift_eval(const CircleMap& f, double x, Side s) { return f.lift(x, s); }
inline double eval(const CircleMap& f, double x, Side s) { return frac(f.lift(x, s)); }
inline double eval(const CircleMap& f, double x) { return frac(lift_eval(f, x)); }
inline double derivative(const CircleMap& f, double x, Side s = Side::right) {
    return f.derivative(x, s);
}

// Grid check of the lift axioms: degree one and monotonicity.
inline void check_lift_axioms(const CircleMap& f, int grid = 1000, double tol = 1e-10) {
    double prev = f.lift(0.0, Side::right);
    for (int i = 1; i <= grid; ++i) {
        double x = static_cast<double>(i) / grid;
        double v = f.lift(x, Side::left);
        require(v >= prev - tol, f.kind() + ": lift not non-decreasing on the grid");
        prev = f.lift(x, Side::right);
        require(prev >= v - tol, f.kind() + ": downward jump in the lift");
        double shifted = f.lift(x + 1.0, Side::right);
        require(std::abs(shifted - prev - 1.0) <= tol, f.kind() + ": lift is not degree one");
    }
}

// ---------------------------------------------------------------------------
// Rigid rotation, optionally carrying the exact angle handle.

class RigidRotation final : public CircleMap {
public:
    explicit RigidRotation(double alpha) : alpha_(alpha) {}
    explicit RigidRotation(AlphaHandle handle)
        : alpha_(handle.approx()), handle_(std::move(handle)) {}

    double lift(double x, Side) const override { return x + alpha_; }
    double derivative(double, Side) const override { return 1.0; }
    const AlphaHandle* rotation_handle() const override {
        return handle_ ? &*handle_ : nullptr;
    }
    std::string kind() const override { return "rotation"; }
    double angle() const { return alpha_; }

private:
    double alpha_;
    std::optional<AlphaHandle> handle_;
};

inline MapPtr build_rotation(double alpha) { return std::make_shared<RigidRotation>(alpha); }
inline MapPtr build_rotation(const AlphaHandle& h) { return std::make_shared<RigidRotation>(h); }

// ---------------------------------------------------------------------------
// Piecewise-affine order-preserving map.  Nodes carry the lift value on the
// right of each breakpoint; each piece [x_i, x_{i+1}) is affine with slope
// s_i >= 0.  A left limit below the next node value is an upward jump.

class PwaMap final : public CircleMap {
public:
    struct Node {
        double x, y;  // y = lift value at x+ (right limit)
    };

    // Continuous map through the given nodes (slopes from successive nodes).
    static std::shared_ptr<PwaMap> continuous(std::vector<Node> nodes) {
        std::size_t n = nodes.size();
        require(n >= 1, "PwaMap: needs nodes");
        std::vector<double> slopes(n);
        for (std::size_t i = 0; i < n; ++i) {
            double dx = (i + 1 < n ? nodes[i + 1].x : nodes[0].x + 1.0) - nodes[i].x;
            double dy = (i + 1 < n ? nodes[i + 1].y : nodes[0].y + 1.0) - nodes[i].y;
            require(dx > 0, "PwaMap: nodes not strictly sorted");
            slopes[i] = dy / dx;
        }
        return std::make_shared<PwaMap>(std::move(nodes), std::move(slopes));
    }

    static std::shared_ptr<PwaMap> with_slopes(std::vector<Node> nodes,
                                               std::vector<double> slopes) {
        return std::make_shared<PwaMap>(std::move(nodes), std::move(slopes));
    }

    PwaMap(std::vector<Node> nodes, std::vector<double> slopes)
        : nodes_(std::move(nodes)), slopes_(std::move(slopes)) {
        std::size_t n = nodes_.size();
        require(n >= 1 && slopes_.size() == n, "PwaMap: node/slope count mismatch");
        for (std::size_t i = 0; i < n; ++i) {
            require(slopes_[i] >= 0.0, "PwaMap: negative slope breaks order preservation");
            double xr = i + 1 < n ? nodes_[i + 1].x : nodes_[0].x + 1.0;
            double yr = i + 1 < n ? nodes_[i + 1].y : nodes_[0].y + 1.0;
            require(xr > nodes_[i].x, "PwaMap: breakpoints not strictly increasing");
            double left_limit = nodes_[i].y + slopes_[i] * (xr - nodes_[i].x);
            require(left_limit <= yr + 1e-12,
                    "PwaMap: downward jump breaks order preservation");
        }
    }

    double lift(double x, Side s) const override {
        double shift = std::floor(x - nodes_[0].x);
        double x0 = x - shift;  // in [x_0, x_0 + 1)
        std::size_t i = piece_index(x0);
        double xr = i + 1 < nodes_.size() ? nodes_[i + 1].x : nodes_[0].x + 1.0;
        double v;
        if (s == Side::left && x0 == nodes_[i].x) {
            // left limit at a breakpoint comes from the previous piece
            std::size_t j = (i + nodes_.size() - 1) % nodes_.size();
            double xj = nodes_[j].x, yj = nodes_[j].y;
            double len = (i == 0 ? nodes_[0].x + 1.0 : nodes_[i].x) - xj;
            v = yj + slopes_[j] * len - (i == 0 ? 1.0 : 0.0);
        } else if (s == Side::left && x0 == xr) {
            v = nodes_[i].y + slopes_[i] * (xr - nodes_[i].x);
        } else {
            v = nodes_[i].y + slopes_[i] * (x0 - nodes_[i].x);
        }
        return v + shift;
    }

    double derivative(double x, Side s) const override {
        double x0 = x - std::floor(x - nodes_[0].x);
        std::size_t i = piece_index(x0);
        if (s == Side::left && x0 == nodes_[i].x) i = (i + nodes_.size() - 1) % nodes_.size();
        return slopes_[i];
    }

    std::vector<double> breakpoints() const override {
        std::vector<double> b;
        for (const auto& nd : nodes_) b.push_back(frac(nd.x));
        return b;
    }

    std::vector<PlateauArc> plateaus() const override {
        std::vector<PlateauArc> out;
        std::size_t n = nodes_.size();
        for (std::size_t i = 0; i < n; ++i) {
            if (slopes_[i] != 0.0) continue;
            bool run_start = slopes_[(i + n - 1) % n] != 0.0 || has_jump_at(i);
            if (!run_start) continue;  // merged into an earlier arc
            double lo = nodes_[i].x, value = nodes_[i].y, hi = lo, wrap = 0.0;
            std::size_t j = i;
            for (;;) {
                std::size_t jn = (j + 1) % n;
                hi = (jn == 0 ? nodes_[0].x + 1.0 : nodes_[jn].x) + wrap;
                if (jn == i || has_jump_at(jn) || slopes_[jn] != 0.0) break;
                if (jn == 0) wrap += 1.0;
                j = jn;
            }
            out.push_back({lo, hi, value});
        }
        return out;
    }

    std::vector<JumpPoint> jumps() const override {
        std::vector<JumpPoint> out;
        std::size_t n = nodes_.size();
        for (std::size_t i = 0; i < n; ++i) {
            double left = left_limit_at(i);
            if (nodes_[i].y - left > 1e-15)
                out.push_back({frac(nodes_[i].x), left, nodes_[i].y});
        }
        return out;
    }

    std::string kind() const override { return "pwa"; }

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::vector<double>& slopes() const { return slopes_; }

    // Inverse evaluation for strictly increasing continuous instances.
    double inverse(double y) const {
        for (double s : slopes_) require(s > 0.0, "PwaMap: inverse needs strictly increasing map");
        require(jumps().empty(), "PwaMap: inverse needs a continuous map");
        double shift = std::floor(y - nodes_[0].y);
        double y0 = y - shift;
        std::size_t lo = 0, hi = nodes_.size();
        while (lo + 1 < hi) {  // last node with y <= y0
            std::size_t mid = (lo + hi) / 2;
            if (nodes_[mid].y <= y0) lo = mid; else hi = mid;
        }
        return nodes_[lo].x + (y0 - nodes_[lo].y) / slopes_[lo] + shift;
    }

private:
    std::size_t piece_index(double x0) const {
        std::size_t lo = 0, hi = nodes_.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (nodes_[mid].x <= x0) lo = mid; else hi = mid;
        }
        return lo;
    }
    double left_limit_at(std::size_t i) const {
        std::size_t n = nodes_.size();
        std::size_t j = (i + n - 1) % n;
        double len = (i == 0 ? nodes_[0].x + 1.0 : nodes_[i].x) - nodes_[j].x;
        return nodes_[j].y + slopes_[j] * len - (i == 0 ? 1.0 : 0.0);
    }
    bool has_jump_at(std::size_t i) const { return nodes_[i].y - left_limit_at(i) > 1e-15; }

    std::vector<Node> nodes_;
    std::vector<double> slopes_;
};

// phi o R_alpha o phi^{-1} for a continuous strictly increasing piecewise-
// affine circle homeomorphism phi.  The conjugate is itself piecewise affine
// with breakpoints phi(b) and phi(b - alpha) over phi's breakpoints b, and its
// slopes are exact ratios of phi's slopes.
class PwaConjugate final : public CircleMap {
public:
    PwaConjugate(AlphaHandle handle, std::shared_ptr<const PwaMap> phi)
        : handle_(std::move(handle)), alpha_(handle_.approx()), phi_(std::move(phi)) {
        build();
    }

    double lift(double x, Side s) const override { return inner_->lift(x, s); }
    double derivative(double x, Side s) const override { return inner_->derivative(x, s); }
    std::vector<double> breakpoints() const override { return inner_->breakpoints(); }
    const AlphaHandle* rotation_handle() const override { return &handle_; }
    std::string kind() const override { return "pwa-conjugate"; }

    const PwaMap& pwa() const { return *inner_; }
    const PwaMap& phi() const { return *phi_; }

private:
    void build() {
        std::vector<double> bps;
        for (const auto& nd : phi_->nodes()) {
            bps.push_back(frac(phi_->lift(nd.x, Side::right)));
            bps.push_back(frac(phi_->lift(nd.x - alpha_, Side::right)));
        }
        std::sort(bps.begin(), bps.end());
        bps.erase(std::unique(bps.begin(), bps.end(),
                              [](double a, double b) { return std::abs(a - b) < 1e-14; }),
                  bps.end());
        std::vector<PwaMap::Node> nodes;
        std::vector<double> slopes;
        for (std::size_t i = 0; i < bps.size(); ++i) {
            double x = bps[i];
            double xr = i + 1 < bps.size() ? bps[i + 1] : bps[0] + 1.0;
            double mid = 0.5 * (x + xr);
            double u = phi_->inverse(mid);
            double y = phi_->lift(u + alpha_, Side::right);
            double slope = phi_->derivative(u + alpha_, Side::right) /
                           phi_->derivative(u, Side::right);
            nodes.push_back({x, y - slope * (mid - x)});
            slopes.push_back(slope);
        }
        inner_ = PwaMap::with_slopes(std::move(nodes), std::move(slopes));
        check_lift_axioms(*inner_, 512, 1e-9);
    }

    AlphaHandle handle_;
    double alpha_;
    std::shared_ptr<const PwaMap> phi_;
    std::shared_ptr<PwaMap> inner_;
};

// ---------------------------------------------------------------------------
// Monotone one-parameter families f_eps(x) = f(x) + eps * b(x) with the
// profile b read in the source coordinate (b constant 1 gives the rotation
// family f + eps).  This is the shape of the section family induced by a
// vertical twist of a flow: each crossing picks up drift depending on where
// it started.  Validity requires eps_max * max|b'| below the slope of f so
// members stay order-preserving, and b > 0 at the designated point p so the
// image of p moves strictly upward with the parameter.

class PerturbedMap final : public CircleMap {
public:
    PerturbedMap(MapPtr base, double eps, BumpProfile b, bool constant_b)
        : base_(std::move(base)), eps_(eps), b_(std::move(b)), constant_b_(constant_b) {}

    double lift(double x, Side s) const override {
        return base_->lift(x, s) + eps_ * bval(x);
    }
    double derivative(double x, Side s) const override {
        return base_->derivative(x, s) + eps_ * bder(x);
    }
    std::vector<double> breakpoints() const override { return base_->breakpoints(); }
    std::vector<PlateauArc> plateaus() const override {
        // a base plateau stays flat only where the profile is constant
        auto ps = base_->plateaus();
        if (constant_b_) {
            for (auto& p : ps) p.value += eps_;
            return ps;
        }
        if (eps_ == 0.0) return ps;
        std::vector<PlateauArc> kept;
        for (auto& p : ps) {
            double b0 = bval(p.lo), b1 = bval(0.5 * (p.lo + p.hi)), b2 = bval(p.hi);
            if (b0 == b1 && b1 == b2 && bder(0.5 * (p.lo + p.hi)) == 0.0) {
                p.value += eps_ * b1;
                kept.push_back(p);
            }
        }
        return kept;
    }
    std::vector<JumpPoint> jumps() const override {
        auto js = base_->jumps();
        for (auto& j : js) {
            double shift = eps_ * bval(j.at);
            j.lower += shift;
            j.upper += shift;
        }
        return js;
    }
    const AlphaHandle* rotation_handle() const override {
        return eps_ == 0.0 ? base_->rotation_handle() : nullptr;
    }
    std::string kind() const override { return "perturbed"; }
    double parameter() const { return eps_; }
    const CircleMap& base() const { return *base_; }

private:
    double bval(double x) const { return constant_b_ ? 1.0 : b_.eval_periodic(x); }
    double bder(double x) const { return constant_b_ ? 0.0 : b_.eval_periodic(x, 1); }

    MapPtr base_;
    double eps_;
    BumpProfile b_;
    bool constant_b_;
};

class MonotoneFamily {
public:
    // constant-profile family: f_eps = f + eps
    MonotoneFamily(MapPtr base, double eps_max, double p)
        : base_(std::move(base)), eps_max_(eps_max), p_(p), constant_b_(true) {
        require(eps_max > 0, "MonotoneFamily: empty parameter range");
    }

    // bump-profile family: f_eps = f + eps * b
    MonotoneFamily(MapPtr base, double eps_max, double p, BumpProfile b)
        : base_(std::move(base)), eps_max_(eps_max), p_(p), b_(std::move(b)),
          constant_b_(false) {
        require(eps_max > 0, "MonotoneFamily: empty parameter range");
        require(b_.eval_periodic(frac(p_)) > 0.0,
                "MonotoneFamily: profile vanishes at the designated point; the family "
                "is not strictly increasing there");
        for (int i = 0; i < 256; ++i)
            require(b_.eval_periodic(i / 256.0) >= 0.0,
                    "MonotoneFamily: profile must be non-negative");
        require(eps_max_ * b_.max_abs(1) < 1.0,
                "MonotoneFamily: eps_max too large, members need not stay monotone");
        check_lift_axioms(PerturbedMap(base_, eps_max_, b_, false), 600, 1e-9);
        check_lift_axioms(PerturbedMap(base_, -eps_max_, b_, false), 600, 1e-9);
        // the designated point's image must march strictly upward in eps
        double prev = PerturbedMap(base_, -eps_max_, b_, false).lift(frac(p_), Side::right);
        for (int i = -7; i <= 8; ++i) {
            double eps = eps_max_ * i / 8.0;
            double cur = PerturbedMap(base_, eps, b_, false).lift(frac(p_), Side::right);
            require(cur > prev, "MonotoneFamily: image of the designated point is not "
                                "strictly increasing in the parameter");
            prev = cur;
        }
    }

    MapPtr member(double eps) const {
        require(eps >= -eps_max_ && eps <= eps_max_,
                "MonotoneFamily: parameter out of range");
        if (constant_b_) {
            if (auto rot = std::dynamic_pointer_cast<const RigidRotation>(base_))
                return build_rotation(rot->angle() + eps);
            return std::make_shared<PerturbedMap>(base_, eps, BumpProfile(), true);
        }
        return std::make_shared<PerturbedMap>(base_, eps, b_, false);
    }

    double eps_max() const { return eps_max_; }
    double designated_point() const { return p_; }
    const CircleMap& base() const { return *base_; }
    bool rigid() const {
        return constant_b_ && std::dynamic_pointer_cast<const RigidRotation>(base_) != nullptr;
    }

private:
    MapPtr base_;
    double eps_max_;
    double p_;
    BumpProfile b_;
    bool constant_b_;
};

inline MonotoneFamily build_monotone_family(MapPtr base, double eps_max, double p) {
    return MonotoneFamily(std::move(base), eps_max, p);
}
inline MonotoneFamily build_monotone_family(MapPtr base, double eps_max, double p,
                                            BumpProfile b) {
    return MonotoneFamily(std::move(base), eps_max, p, std::move(b));
}

}  // namespace rotorlab
