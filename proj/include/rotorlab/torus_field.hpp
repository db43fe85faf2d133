#pragma once
// Doubly-periodic C^4 vector fields on the torus.  The linear flow (1, beta),
// plus compact strip surgeries that insert a hyperbolic sink + saddle pair
// (or the mirrored source + saddle pair) inside a small flow-aligned patch
// while leaving the field exactly linear everywhere else.  Inside a patch the
// field is  rot(H) + kappa * grad(H)  for a stream function H with exactly two
// critical points; the dissipation factor kappa is supported strictly away
// from the saddle, so the saddle stays Hamiltonian and its divergence is zero
// bitwise, not just to rounding.  All evaluation is templated over plain
// doubles or Jet2 scalars, so jacobians, divergences and C^r jet norms come
// from the same formula that drives integration.

#include <array>
#include <cmath>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rotorlab/common.hpp"
#include "rotorlab/handle.hpp"
#include "rotorlab/jets.hpp"

namespace rotorlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(const Vec2& a, const Vec2& b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(const Vec2& a, const Vec2& b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(const Vec2& a, double s) { return {a.x * s, a.y * s}; }
inline Vec2 operator*(double s, const Vec2& a) { return a * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(a.x * a.x + a.y * a.y); }
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }

inline double wrap01(double t) {
    double r = t - std::floor(t);
    return r >= 1.0 ? r - 1.0 : r;
}
inline Vec2 wrap01(const Vec2& z) { return {wrap01(z.x), wrap01(z.y)}; }
// Signed representative in [-1/2, 1/2].
inline double wrap_half(double t) { return t - std::round(t); }
inline Vec2 torus_delta(const Vec2& a, const Vec2& b) {
    return {wrap_half(a.x - b.x), wrap_half(a.y - b.y)};
}
inline double torus_dist(const Vec2& a, const Vec2& b) { return norm(torus_delta(a, b)); }

enum class SingKind { saddle, node_source, node_sink, focus };
enum class CellDirection { forward, backward };

inline const char* to_string(SingKind k) {
    switch (k) {
        case SingKind::saddle: return "saddle";
        case SingKind::node_source: return "node-source";
        case SingKind::node_sink: return "node-sink";
        default: return "focus";
    }
}

struct Singularity {
    Vec2 position;
    SingKind kind = SingKind::saddle;
    std::array<double, 4> jacobian{};  // row-major d(X1,X2)/d(x,y)
    double divergence = 0.0;           // trace of the jacobian
    bool zero_divergence = false;      // |divergence| < 1e-12
    bool hyperbolic = false;
};

inline bool is_attractor(const Singularity& s) {
    return s.kind == SingKind::node_sink || (s.kind == SingKind::focus && s.divergence < 0.0);
}
inline bool is_repellor(const Singularity& s) {
    return s.kind == SingKind::node_source || (s.kind == SingKind::focus && s.divergence > 0.0);
}

// ---------------------------------------------------------------------------
// Field interface

class TorusVectorField {
public:
    virtual ~TorusVectorField() = default;

    virtual Vec2 at(const Vec2& z) const = 0;
    // Component 4-jets at z; partial(i, j) of each entry is the exact partial
    // derivative of that component.
    virtual std::array<Jet2<4>, 2> jets(const Vec2& z) const = 0;
    virtual std::vector<Singularity> singularities() const = 0;
    virtual std::string describe() const = 0;

    std::array<double, 4> jacobian_at(const Vec2& z) const {
        auto j = jets(z);
        return {j[0].partial(1, 0), j[0].partial(0, 1), j[1].partial(1, 0), j[1].partial(0, 1)};
    }
    virtual double divergence_at(const Vec2& z) const {
        auto j = jets(z);
        return j[0].partial(1, 0) + j[1].partial(0, 1);
    }
};

using FieldPtr = std::shared_ptr<const TorusVectorField>;

// ---------------------------------------------------------------------------
// Linear flow

class LinearFlowField final : public TorusVectorField {
public:
    explicit LinearFlowField(double beta) : beta_(beta) {}
    explicit LinearFlowField(const AlphaHandle& h) : handle_(h), beta_(h.approx()) {}

    Vec2 at(const Vec2&) const override { return {1.0, beta_}; }
    std::array<Jet2<4>, 2> jets(const Vec2&) const override {
        return {Jet2<4>::constant(1.0), Jet2<4>::constant(beta_)};
    }
    std::vector<Singularity> singularities() const override { return {}; }
    double divergence_at(const Vec2&) const override { return 0.0; }
    std::string describe() const override {
        std::ostringstream os;
        os << "linear flow, slope " << beta_;
        return os.str();
    }

    double slope() const { return beta_; }
    const std::optional<AlphaHandle>& handle() const { return handle_; }

private:
    std::optional<AlphaHandle> handle_;
    double beta_;
};

// ---------------------------------------------------------------------------
// Time reversal

// Negates a base field.  Attractors and repellors exchange roles, which makes
// the reversed field the natural carrier for backward-limit computations.
class ReversedField final : public TorusVectorField {
public:
    explicit ReversedField(FieldPtr base) : base_(std::move(base)) {
        require(base_ != nullptr, "reversed field: null base");
    }

    Vec2 at(const Vec2& z) const override {
        Vec2 v = base_->at(z);
        return {-v.x, -v.y};
    }
    std::array<Jet2<4>, 2> jets(const Vec2& z) const override {
        auto j = base_->jets(z);
        return {-j[0], -j[1]};
    }
    std::vector<Singularity> singularities() const override {
        auto list = base_->singularities();
        for (auto& s : list) {
            if (s.kind == SingKind::node_source)
                s.kind = SingKind::node_sink;
            else if (s.kind == SingKind::node_sink)
                s.kind = SingKind::node_source;
            for (auto& e : s.jacobian) e = -e;
            s.divergence = -s.divergence;
        }
        return list;
    }
    std::string describe() const override { return "time-reversed: " + base_->describe(); }

    const FieldPtr& base() const { return base_; }

private:
    FieldPtr base_;
};

// ---------------------------------------------------------------------------
// Blow-up strips

struct BlowupStrip {
    Vec2 seed;                   // patch centre, on the base orbit being blown up
    CellDirection kind = CellDirection::backward;
    double half_width = 0.02;    // cross-flow half-extent h
    double length = 0.22;        // along-flow extent L

    // Model shape knobs.
    double kappa0 = 0.9;         // dissipation strength
    double amp_factor = 3.0;     // obstacle amplitude in units of sqrt(e) * s2
    double disk_factor = 0.8;    // dissipation radius as a fraction of |v1 - v2|

    // Derived model constants (filled by the assembler).
    double s1 = 0.0;             // along-flow Gaussian scale
    double s2 = 0.0;             // cross-flow Gaussian scale
    double amp = 0.0;            // obstacle amplitude A
    double disk_r = 0.0;         // dissipation support radius
    double v_saddle = 0.0;       // patch-chart v of the saddle
    double v_centre = 0.0;       // patch-chart v of the sink/source
};

namespace field_detail {

// Patch-local model, base flow (1, 0).  u along the flow, v across, centred.
// Returns the pair (M1, M2); works on doubles and on jets.  The `strip`
// carries every constant.  For forward-kind strips the caller mirrors u and
// negates M2 (mirror + time reversal), which keeps the base direction and
// turns the sink into a source.
template <class T>
std::array<T, 2> strip_model_core(const BlowupStrip& st, const T& u, const T& v) {
    using S = ScalarOps<T>;
    const double is1 = 1.0 / (st.s1 * st.s1);
    const double is2 = 1.0 / (st.s2 * st.s2);
    T g1 = exp_jet((u * u) * (-0.5 * is1));
    T g1p = g1 * (u * (-is1));
    T g2 = exp_jet((v * v) * (-0.5 * is2));
    T g2p = g2 * (v * (-is2));

    T hu = g1p * g2 * (-st.amp);        // dH/du
    T hv = g1 * g2p * (-st.amp) + 1.0;  // dH/dv
    T m1 = hv;                          // rot(H) = (H_v, -H_u)
    T m2 = -hu;

    // Dissipation disk around the centre point; flat-top support keeps the
    // saddle untouched to every derivative order.
    T dv = v - S::constant(st.v_centre);
    T q = u * u + dv * dv;
    T psi = flat_cutoff(q, 0.25 * st.disk_r * st.disk_r, st.disk_r * st.disk_r);
    m1 += psi * hu * (-st.kappa0);
    m2 += psi * hv * (-st.kappa0);
    return {m1, m2};
}

template <class T>
std::array<T, 2> strip_model(const BlowupStrip& st, const T& u, const T& v) {
    if (st.kind == CellDirection::backward) return strip_model_core(st, u, v);
    auto m = strip_model_core(st, -u, v);
    return {m[0], -m[1]};
}

// Master cutoff: 1 on the core of the patch, 0 near its boundary.  Squared
// arguments keep the formula smooth through u = 0 and v = 0.
template <class T>
T master_cutoff(const BlowupStrip& st, const T& u, const T& v) {
    const double hu = 0.5 * st.length, hv = st.half_width;
    T cu = flat_cutoff(u * u, 0.49 * hu * hu, 0.9025 * hu * hu);
    T cv = flat_cutoff(v * v, 0.5184 * hv * hv, 0.9216 * hv * hv);
    return cu * cv;
}

inline double tau_equation(double tau) { return tau * std::exp(-0.5 * tau * tau); }

// Solve tau * exp(-tau^2/2) = target on the requested side of the maximum at
// tau = 1 (increasing side for the centre, decreasing side for the saddle).
inline double solve_tau(double target, bool outer) {
    double lo = outer ? 1.0 : 1e-14;
    double hi = outer ? 12.0 : 1.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        bool above = tau_equation(mid) > target;
        if (outer ? above : !above)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace field_detail

struct BlowupOptions {
    double strip_length = 0.22;  // along-flow patch extent
    double kappa0 = 0.9;         // dissipation strength
    double amp_factor = 3.0;     // A = amp_factor * sqrt(e) * s2
    double disk_factor = 0.8;    // disk radius as a fraction of |v1 - v2|
};

class BlownUpField final : public TorusVectorField {
public:
    // Assembles the field at a FIXED base slope; rotation-number tuning picks
    // the slope elsewhere and re-assembles.
    BlownUpField(std::optional<AlphaHandle> handle, double beta, std::vector<BlowupStrip> strips)
        : handle_(std::move(handle)), beta_(beta), strips_(std::move(strips)) {
        speed_ = std::sqrt(1.0 + beta_ * beta_);
        e_ = {1.0 / speed_, beta_ / speed_};
        n_ = perp(e_);
        for (auto& st : strips_) derive_constants(st);
        validate();
        collect_singularities();
    }

    Vec2 at(const Vec2& z) const override {
        auto c = components<double>(z.x, z.y);
        return {c[0], c[1]};
    }
    std::array<Jet2<4>, 2> jets(const Vec2& z) const override {
        return components<Jet2<4>>(Jet2<4>::seed_x(z.x), Jet2<4>::seed_y(z.y));
    }
    std::vector<Singularity> singularities() const override { return sings_; }

    // Exact divergence: outside every patch the field is linear (0); inside a
    // patch it is evaluated in the flow-aligned chart, where the Hamiltonian
    // part contributes the same mixed Taylor coefficient with both signs and
    // cancels bitwise.
    double divergence_at(const Vec2& z) const override {
        for (const auto& st : strips_) {
            auto pc = patch_coords(st, z);
            if (!pc) continue;
            auto u = Jet2<2>::seed_x(pc->x);
            auto v = Jet2<2>::seed_y(pc->y);
            auto m = field_detail::strip_model(st, u, v);
            auto om = field_detail::master_cutoff(st, u, v);
            auto f1 = om * (m[0] - 1.0);
            auto f2 = om * m[1];
            return speed_ * (f1.partial(1, 0) + f2.partial(0, 1) + 0.0);
        }
        return 0.0;
    }

    std::string describe() const override {
        std::ostringstream os;
        os << "blow-up field: base slope " << beta_;
        if (handle_) os << " (requested angle " << handle_->approx() << ", tuning residual " << tuning_residual_ << ")";
        os << "; " << strips_.size() << " strip(s):";
        for (const auto& st : strips_) {
            os << " [" << (st.kind == CellDirection::backward ? "backward" : "forward") << " at ("
               << st.seed.x << ", " << st.seed.y << "), width " << st.half_width << "]";
        }
        if (contra_directed()) os << " [contra-directed]";
        return os.str();
    }

    const std::optional<AlphaHandle>& handle() const { return handle_; }
    double base_slope() const { return beta_; }
    double speed() const { return speed_; }
    Vec2 flow_dir() const { return e_; }
    Vec2 normal_dir() const { return n_; }
    const std::vector<BlowupStrip>& strips() const { return strips_; }
    bool contra_directed() const {
        bool fwd = false, bwd = false;
        for (const auto& st : strips_)
            (st.kind == CellDirection::forward ? fwd : bwd) = true;
        return fwd && bwd;
    }
    double tuning_residual() const { return tuning_residual_; }
    void set_tuning_residual(double r) { tuning_residual_ = r; }

    // Patch-chart coordinates of z relative to strip st, or nullopt when z is
    // outside the patch rectangle.
    std::optional<Vec2> patch_coords(const BlowupStrip& st, const Vec2& z) const {
        Vec2 d = torus_delta(z, st.seed);
        double u = dot(d, e_), v = dot(d, n_);
        if (std::fabs(u) >= 0.5 * st.length || std::fabs(v) >= st.half_width) return std::nullopt;
        return Vec2{u, v};
    }
    // True when z lies in some patch rectangle (field differs from linear).
    bool in_patch(const Vec2& z) const {
        for (const auto& st : strips_)
            if (patch_coords(st, z)) return true;
        return false;
    }

private:
    template <class T>
    std::array<T, 2> components(const T& x, const T& y) const {
        using S = ScalarOps<T>;
        T fx = S::constant(1.0);
        T fy = S::constant(beta_);
        double xv = S::value(x), yv = S::value(y);
        for (const auto& st : strips_) {
            double dxv = wrap_half(xv - st.seed.x);
            double dyv = wrap_half(yv - st.seed.y);
            if (std::fabs(dxv) > 0.5 * st.length + st.half_width + 1e-12 ||
                std::fabs(dyv) > 0.5 * st.length + st.half_width + 1e-12)
                continue;
            T dx = x + S::constant(dxv - xv);
            T dy = y + S::constant(dyv - yv);
            T u = dx * e_.x + dy * e_.y;
            T v = dx * n_.x + dy * n_.y;
            double uv = S::value(u), vv = S::value(v);
            if (std::fabs(uv) >= 0.5 * st.length || std::fabs(vv) >= st.half_width) continue;
            auto om = field_detail::master_cutoff(st, u, v);
            if (S::value(om) == 0.0) continue;  // outside the cutoff support: exact zero
            auto m = field_detail::strip_model(st, u, v);
            T a1 = om * (m[0] - 1.0) * speed_;
            T a2 = om * m[1] * speed_;
            fx += a1 * e_.x + a2 * n_.x;
            fy += a1 * e_.y + a2 * n_.y;
        }
        return {fx, fy};
    }

    static void derive_constants(BlowupStrip& st) {
        require(st.half_width > 0.0 && st.half_width <= 0.05,
                "blow-up strip width must lie in (0, 0.05]");
        if (st.length <= 0.0) st.length = 0.22;
        require(st.length >= 6.0 * st.half_width && st.length <= 0.45,
                "blow-up strip length out of range");
        st.s1 = st.length / 10.0;
        st.s2 = st.half_width / 4.0;
        st.amp = st.amp_factor * std::sqrt(std::exp(1.0)) * st.s2;
        double target = st.s2 / st.amp;
        require(target < field_detail::tau_equation(1.0) * 0.95,
                "blow-up obstacle too weak to create a saddle");
        double tau_outer = field_detail::solve_tau(target, true);
        double tau_inner = field_detail::solve_tau(target, false);
        st.v_saddle = -tau_outer * st.s2;
        st.v_centre = -tau_inner * st.s2;
        st.disk_r = st.disk_factor * (tau_outer - tau_inner) * st.s2;
        require(st.kappa0 > 0.0, "dissipation strength must be positive");
        // Geometry sanity: dissipation support inside the master-flat core and
        // clear of the saddle.
        require(std::fabs(st.v_centre) + st.disk_r < 0.72 * st.half_width,
                "dissipation disk leaves the patch core");
        require(st.disk_r < (tau_outer - tau_inner) * st.s2 - 1e-12,
                "dissipation disk touches the saddle");
        require(std::fabs(st.v_saddle) < 0.72 * st.half_width,
                "saddle leaves the patch core");
    }

    void validate() const {
        // Pairwise disjoint patches (rectangles in the flow-aligned frame).
        for (std::size_t i = 0; i < strips_.size(); ++i)
            for (std::size_t j = i + 1; j < strips_.size(); ++j)
                if (!disjoint(strips_[i], strips_[j]))
                    require(false, "blow-up strips overlap");
    }

    bool disjoint(const BlowupStrip& a, const BlowupStrip& b) const {
        auto inside = [&](const BlowupStrip& st, const Vec2& z, double pad) {
            Vec2 d = torus_delta(z, st.seed);
            return std::fabs(dot(d, e_)) < 0.5 * st.length + pad &&
                   std::fabs(dot(d, n_)) < st.half_width + pad;
        };
        const int m = 64;
        for (int k = 0; k < m; ++k) {
            double t = (k + 0.5) / m;
            // Sample the four edges of each rectangle against the other.
            for (int s = 0; s < 4; ++s) {
                double uu = (s == 0) ? (t - 0.5) * a.length : (s == 1 ? (t - 0.5) * a.length : (s == 2 ? -0.5 * a.length : 0.5 * a.length));
                double vv = (s == 0) ? -a.half_width : (s == 1 ? a.half_width : (2.0 * t - 1.0) * a.half_width);
                Vec2 z = wrap01(a.seed + uu * e_ + vv * n_);
                if (inside(b, z, 1e-9)) return false;
                double uu2 = (s == 0) ? (t - 0.5) * b.length : (s == 1 ? (t - 0.5) * b.length : (s == 2 ? -0.5 * b.length : 0.5 * b.length));
                double vv2 = (s == 0) ? -b.half_width : (s == 1 ? b.half_width : (2.0 * t - 1.0) * b.half_width);
                Vec2 z2 = wrap01(b.seed + uu2 * e_ + vv2 * n_);
                if (inside(a, z2, 1e-9)) return false;
            }
        }
        if (inside(b, wrap01(a.seed), 1e-9) || inside(a, wrap01(b.seed), 1e-9)) return false;
        return true;
    }

    void collect_singularities() {
        for (const auto& st : strips_) {
            sings_.push_back(make_singularity(st, st.v_saddle));
            sings_.push_back(make_singularity(st, st.v_centre));
        }
    }

    Singularity make_singularity(const BlowupStrip& st, double v0) const {
        Singularity s;
        s.position = wrap01(st.seed + v0 * n_);
        auto u = Jet2<2>::seed_x(0.0);
        auto v = Jet2<2>::seed_y(v0);
        auto m = field_detail::strip_model(st, u, v);
        // In the patch core the master cutoff is identically 1.
        double j11 = m[0].partial(1, 0), j12 = m[0].partial(0, 1);
        double j21 = m[1].partial(1, 0), j22 = m[1].partial(0, 1);
        // Patch divergence; at the saddle both contributions are literal zeros
        // (adding 0.0 normalises a possible negative zero).
        double div_p = m[0].partial(1, 0) + m[1].partial(0, 1) + 0.0;
        // Transport to torus coordinates:  dz' = (j.. du dv) over the
        // orthonormal frame (e, n); trace is invariant by the frame algebra
        // below (products pair with opposite signs when j11 = j22 = 0).
        // Group column*row first: the frame satisfies e.x*n.x = -(e.y*n.y)
        // bitwise, so the trace of each antidiagonal contribution cancels
        // exactly instead of to rounding.
        auto outer = [&](double c, const Vec2& col, const Vec2& row) {
            return std::array<double, 4>{c * (col.x * row.x), c * (col.x * row.y),
                                         c * (col.y * row.x), c * (col.y * row.y)};
        };
        auto acc = [&](std::array<double, 4>& a, const std::array<double, 4>& b) {
            for (int k = 0; k < 4; ++k) a[k] += b[k];
        };
        std::array<double, 4> J{};
        acc(J, outer(speed_ * j11, e_, e_));
        acc(J, outer(speed_ * j12, e_, n_));
        acc(J, outer(speed_ * j21, n_, e_));
        acc(J, outer(speed_ * j22, n_, n_));
        s.jacobian = J;
        s.divergence = speed_ * div_p;
        s.zero_divergence = std::fabs(s.divergence) < 1e-12;
        double det = J[0] * J[3] - J[1] * J[2];
        double tr = s.divergence;
        if (det < 0.0) {
            s.kind = SingKind::saddle;
            s.hyperbolic = det < -1e-15;
        } else {
            double disc = tr * tr - 4.0 * det;
            if (disc >= 0.0)
                s.kind = tr < 0.0 ? SingKind::node_sink : SingKind::node_source;
            else
                s.kind = SingKind::focus;
            s.hyperbolic = std::fabs(tr) > 1e-15 && det > 1e-15;
        }
        return s;
    }

    std::optional<AlphaHandle> handle_;
    double beta_;
    double speed_;
    Vec2 e_, n_;
    std::vector<BlowupStrip> strips_;
    std::vector<Singularity> sings_;
    double tuning_residual_ = 0.0;
};

// Assemble a blow-up field at an explicit base slope (no rotation tuning).
inline std::shared_ptr<BlownUpField> assemble_blowup(std::optional<AlphaHandle> handle, double beta,
                                                     const std::vector<Vec2>& seeds,
                                                     const std::vector<CellDirection>& kinds,
                                                     const std::vector<double>& widths,
                                                     const BlowupOptions& opt = {}) {
    require(seeds.size() == kinds.size() && seeds.size() == widths.size(),
            "assemble_blowup: seeds, kinds and widths must have equal length");
    // Seeds must sit on distinct orbits of the linear flow of slope beta.
    for (std::size_t i = 0; i < seeds.size(); ++i)
        for (std::size_t j = i + 1; j < seeds.size(); ++j) {
            double off = wrap_half((seeds[j].y - seeds[i].y) - beta * (seeds[j].x - seeds[i].x));
            require(std::fabs(off) > 1e-6, "assemble_blowup: seeds lie on the same base orbit");
        }
    std::vector<BlowupStrip> strips;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        BlowupStrip st;
        st.seed = wrap01(seeds[i]);
        st.kind = kinds[i];
        st.half_width = widths[i];
        st.length = opt.strip_length;
        st.kappa0 = opt.kappa0;
        st.amp_factor = opt.amp_factor;
        st.disk_factor = opt.disk_factor;
        strips.push_back(st);
    }
    auto field = std::make_shared<BlownUpField>(handle, beta, std::move(strips));
    return field;
}

// ---------------------------------------------------------------------------
// Jet norm distance and zero verification

// Max over a grid of all partial-derivative differences of the two fields up
// to total order r (componentwise sup norm of the C^r jet of A - B).
inline double jet_norm_distance(const TorusVectorField& a, const TorusVectorField& b, int r = 4,
                                int grid = 256) {
    require(r >= 0 && r <= 4, "jet_norm_distance: order must lie in [0, 4]");
    require(grid >= 2, "jet_norm_distance: grid too small");
    double worst = 0.0;
    for (int i = 0; i < grid; ++i)
        for (int j = 0; j < grid; ++j) {
            Vec2 z{(i + 0.5) / grid, (j + 0.5) / grid};
            auto ja = a.jets(z);
            auto jb = b.jets(z);
            for (int c = 0; c < 2; ++c)
                for (int di = 0; di + 0 <= r; ++di)
                    for (int dj = 0; di + dj <= r; ++dj) {
                        double d = std::fabs(ja[c].partial(di, dj) - jb[c].partial(di, dj));
                        if (d > worst) worst = d;
                    }
        }
    return worst;
}

// Scan for zeros: the field must vanish only at its listed singularities.
// Returns the minimal |X| observed away from the listed points.
inline double verify_listed_zeros(const TorusVectorField& field, int grid = 512,
                                  double resolution = 1e-6) {
    auto sings = field.singularities();
    for (const auto& s : sings) {
        double m = norm(field.at(s.position));
        require(m < 1e-10, "verify_listed_zeros: listed singularity is not a zero");
    }
    double floor_seen = 1e300;
    auto scan = [&](const Vec2& z) {
        for (const auto& s : sings)
            if (torus_dist(z, s.position) < 2e-3) return;
        double m = norm(field.at(z));
        if (m < floor_seen) floor_seen = m;
    };
    if (auto* bf = dynamic_cast<const BlownUpField*>(&field)) {
        // Outside the patches the field is linear with speed >= 1; only the
        // patch rectangles need scanning.
        for (const auto& st : bf->strips()) {
            int nu = grid, nv = std::max(grid / 3, 64);
            for (int i = 0; i <= nu; ++i)
                for (int j = 0; j <= nv; ++j) {
                    double u = (i / static_cast<double>(nu) - 0.5) * st.length;
                    double v = (2.0 * j / static_cast<double>(nv) - 1.0) * st.half_width;
                    scan(wrap01(st.seed + u * bf->flow_dir() + v * bf->normal_dir()));
                }
        }
    } else {
        for (int i = 0; i < grid; ++i)
            for (int j = 0; j < grid; ++j) scan({i / static_cast<double>(grid), j / static_cast<double>(grid)});
    }
    require(floor_seen > resolution,
            "verify_listed_zeros: field nearly vanishes away from its listed singularities");
    return floor_seen;
}

// ---------------------------------------------------------------------------
// Transverse loops

class TransverseLoop {
public:
    // The vertical circle {x = c}.
    static TransverseLoop vertical(double x_c) {
        TransverseLoop L;
        L.vertical_ = true;
        L.xc_ = wrap01(x_c);
        L.homology_ = {0, 1};
        L.len_ = 1.0;
        return L;
    }

    // Closed polyline from lifted points (consecutive, without repetition of
    // the endpoint); the lift of the final edge returns to points[0] plus the
    // homology vector.
    static TransverseLoop polyline(std::vector<Vec2> lifted, std::pair<int, int> homology) {
        TransverseLoop L;
        require(lifted.size() >= 3, "transverse loop needs at least 3 points");
        L.vertical_ = false;
        L.pts_ = std::move(lifted);
        L.homology_ = homology;
        L.cum_.resize(L.pts_.size() + 1, 0.0);
        for (std::size_t i = 0; i < L.pts_.size(); ++i) {
            Vec2 a = L.pts_[i];
            Vec2 b = (i + 1 < L.pts_.size())
                         ? L.pts_[i + 1]
                         : L.pts_[0] + Vec2{static_cast<double>(homology.first),
                                            static_cast<double>(homology.second)};
            L.cum_[i + 1] = L.cum_[i] + norm(b - a);
        }
        L.len_ = L.cum_.back();
        require(L.len_ > 1e-9, "transverse loop is degenerate");
        return L;
    }

    bool is_vertical() const { return vertical_; }
    double vertical_x() const { return xc_; }
    std::pair<int, int> homology() const { return homology_; }
    double length() const { return len_; }

    Vec2 point(double s) const {
        s = wrap01(s);
        if (vertical_) return {xc_, s};
        auto [i, t] = locate_param(s);
        Vec2 a = pts_[i], b = next_pt(i);
        return wrap01(a + t * (b - a));
    }
    Vec2 tangent(double s) const {
        s = wrap01(s);
        if (vertical_) return {0.0, 1.0};
        auto [i, t] = locate_param(s);
        Vec2 a = pts_[i], b = next_pt(i);
        Vec2 d = b - a;
        double nn = norm(d);
        return nn > 0 ? d * (1.0 / nn) : Vec2{1.0, 0.0};
    }

    // Nearest-point location in a tubular neighbourhood: parameter s of the
    // closest polyline point and the signed normal offset (positive on the
    // side the flow crosses towards, i.e. along tangent rotated by -90 deg).
    struct Location {
        double s = 0.0;
        double dist = 0.0;
    };
    Location locate(const Vec2& z) const {
        if (vertical_) return {wrap01(z.y), wrap_half(z.x - xc_)};
        double best = 1e300;
        Location out;
        for (std::size_t i = 0; i < pts_.size(); ++i) {
            Vec2 a = pts_[i], b = next_pt(i);
            Vec2 d = b - a;
            double L2 = dot(d, d);
            // Min-image relative to the segment midpoint.
            Vec2 mid = (a + b) * 0.5;
            Vec2 rel = torus_delta(z, wrap01(mid));
            Vec2 zz = mid + rel;
            double t = L2 > 0 ? dot(zz - a, d) / L2 : 0.0;
            t = std::min(1.0, std::max(0.0, t));
            Vec2 p = a + t * d;
            double dd = norm(zz - p);
            if (dd < best) {
                best = dd;
                Vec2 tang = d * (1.0 / std::sqrt(L2));
                double side = cross(zz - p, tang);  // positive: crossing side
                out.s = wrap01((cum_[i] + t * (cum_[i + 1] - cum_[i])) / len_);
                out.dist = side;
            }
        }
        return out;
    }

private:
    std::pair<std::size_t, double> locate_param(double s) const {
        double target = s * len_;
        std::size_t lo = 0, hi = pts_.size();
        while (lo + 1 < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (cum_[mid] <= target)
                lo = mid;
            else
                hi = mid;
        }
        double seg = cum_[lo + 1] - cum_[lo];
        double t = seg > 0 ? (target - cum_[lo]) / seg : 0.0;
        return {lo, t};
    }
    Vec2 next_pt(std::size_t i) const {
        if (i + 1 < pts_.size()) return pts_[i + 1];
        return pts_[0] + Vec2{static_cast<double>(homology_.first),
                              static_cast<double>(homology_.second)};
    }

    bool vertical_ = false;
    double xc_ = 0.0;
    std::vector<Vec2> pts_;   // lifted
    std::vector<double> cum_;
    std::pair<int, int> homology_{0, 1};
    double len_ = 0.0;
};

// Certified transversality margin: min over the loop of the cross product of
// the field with the unit tangent.  Fails when the sign is not constant.
inline double transversality_margin(const TorusVectorField& field, const TransverseLoop& loop,
                                    int samples = 2048) {
    require(samples >= 16, "transversality_margin: too few samples");
    double mn = 1e300, mx = -1e300;
    for (int k = 0; k < samples; ++k) {
        double s = (k + 0.5) / samples;
        double c = cross(field.at(loop.point(s)), loop.tangent(s));
        mn = std::min(mn, c);
        mx = std::max(mx, c);
    }
    if (mn <= 0.0 && mx >= 0.0) fail("transversality_margin: field is tangent to the loop");
    return std::min(std::fabs(mn), std::fabs(mx));
}

}  // namespace rotorlab
