#pragma once
// Gap systems: circle maps assembled by opening a countable family of arcs
// ("gaps") along an exact rotation orbit.  A two-sided system produces a
// strictly increasing homeomorphism whose seeded gap is a two-sided wandering
// interval (Denjoy construction); a backward chain produces a continuous map
// with a plateau whose backward iterates are the remaining gaps (Cherry-type
// return map); a forward chain produces the time-reversed object, a strictly
// increasing map with one jump whose image gap seeds a forward-wandering
// family.
//
// Downstairs the gaps sit over atoms z_k = seed + k*alpha (exact quadratic
// arithmetic); upstairs positions come from the cumulative mass function
// Phi(t) = sigma*t + sum of gap lengths at atoms <= t.  Bridges between
// consecutive gaps are affine with the gap-length ratio as derivative, which
// pins the derivative at both gap endpoints to the adjacent-gap length ratio.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rotorlab/circle_map.hpp"

namespace rotorlab {

enum class GapKind { two_sided, backward_chain, forward_chain };
enum class WeightRule { zero, geometric, inverse_quadratic, smooth_ratio };

struct GapFamilySpec {
    QField seed;  // downstairs position of the index-0 gap
    double mass;  // total length of this family's gaps
};

struct GapSystemSpec {
    AlphaHandle handle;
    GapKind kind = GapKind::two_sided;
    WeightRule rule = WeightRule::geometric;
    std::vector<GapFamilySpec> families;
    double lambda = 0.6;             // geometric decay
    double delta = 0.3, beta = 0.1;  // smooth ratio model g(t) = exp(delta + beta cos 2 pi t)
    i64 window = 1200;               // tracked index extent per family
    double chart_offset = 0.0;       // upstairs rotation of the whole presentation
};

inline double smooth_ratio_model(double t, double delta, double beta) {
    return std::exp(delta + beta * std::cos(2.0 * std::numbers::pi * t));
}

class GapMap final : public CircleMap {
public:
    struct GapRef {
        int family;
        i64 k;
        double z;       // downstairs atom
        double left;    // upstairs left endpoint
        double length;  // upstairs gap length
    };

    explicit GapMap(GapSystemSpec spec) : spec_(std::move(spec)) {
        require(!spec_.handle.is_rational(),
                "GapMap: needs an irrational bounded-type handle");
        require(spec_.window >= 8, "GapMap: window too small");
        require(!spec_.families.empty(), "GapMap: no gap families");
        alpha_q_ = spec_.handle.value();
        alpha_ = spec_.handle.approx();
        double total_mass = 0.0;
        for (const auto& fam : spec_.families) {
            require(fam.mass > 0.0, "GapMap: gap mass must be positive");
            total_mass += fam.mass;
        }
        require(total_mass < 1.0, "GapMap: total gap mass must be below 1");
        mass_ = total_mass;
        co_ = frac(spec_.chart_offset);
        build_families();
        build_tables();
    }

    // --- CircleMap interface -------------------------------------------------
    // The public chart is the natural chart rotated upstairs by chart_offset;
    // all exact structure lives downstairs and is chart-independent.

    double lift(double x, Side s) const override {
        double u = x - co_;
        double shift = std::floor(u);
        return shift + lift_fund(u - shift, s) + co_;
    }

    double derivative(double x, Side s) const override {
        double x0 = frac(x - co_);
        i64 row = locate_gap(x0, s);
        if (row < 0) return 1.0;  // rigid stretch between tracked gaps
        const Row& r = rows_[static_cast<std::size_t>(row)];
        return ratio(r.family, r.k);
    }

    std::vector<PlateauArc> plateaus() const override {
        std::vector<PlateauArc> out;
        if (spec_.kind != GapKind::backward_chain) return out;
        for (int f = 0; f < family_count(); ++f) {
            const Row& r = row_at(f, 0);
            double lo = r.left + co_, w = std::floor(r.left + co_);
            out.push_back({lo - w, lo - w + r.length, plateau_value(f) + co_ - w});
        }
        return out;
    }

    std::vector<JumpPoint> jumps() const override {
        std::vector<JumpPoint> out;
        if (spec_.kind != GapKind::forward_chain) return out;
        for (int f = 0; f < family_count(); ++f) {
            const Row& r = row_at(f, 0);
            const JumpInfo& j = jump_info_[static_cast<std::size_t>(f)];
            double lo = r.left + std::floor(j.ts + alpha_);
            double w = std::floor(j.x + co_);
            out.push_back({j.x + co_ - w, lo + co_ - w, lo + co_ - w + r.length});
        }
        return out;
    }

    const AlphaHandle* rotation_handle() const override { return &spec_.handle; }

    std::vector<double> breakpoints() const override {
        std::vector<double> out;
        out.reserve(rows_.size() * 2 + jump_info_.size());
        for (const auto& r : rows_) {
            double l = frac(r.left + co_);
            out.push_back(l);
            out.push_back(frac(l + r.length));
        }
        for (const auto& j : jump_info_) out.push_back(frac(j.x + co_));
        std::sort(out.begin(), out.end());
        return out;
    }

    std::string kind() const override {
        switch (spec_.kind) {
            case GapKind::two_sided: return "denjoy";
            case GapKind::backward_chain: return "cherry-plateau";
            case GapKind::forward_chain: return "cherry-jump";
        }
        return "gap";
    }

    // --- gap system access ---------------------------------------------------

    const GapSystemSpec& spec() const { return spec_; }
    int family_count() const { return static_cast<int>(spec_.families.size()); }
    i64 k_min(int f) const { return kmin_[static_cast<std::size_t>(f)]; }
    i64 k_max(int f) const { return kmax_[static_cast<std::size_t>(f)]; }

    // Gap arc in the public chart; the arc may straddle the seam, in which
    // case left + length exceeds 1.
    GapRef gap(int f, i64 k) const {
        const Row& r = row_at(f, k);
        return {f, k, r.z, frac(r.left + co_), r.length};
    }

    // Exact downstairs atom position seed + k*alpha mod 1.
    QField atom_exact(int f, i64 k) const {
        QField step = alpha_q_.mul_rational(k, 1);
        return (spec_.families[static_cast<std::size_t>(f)].seed + step).mod1();
    }

    // Gap-length ratio carried by the affine bridge on gap (f, k).
    double ratio(int f, i64 k) const {
        if (spec_.kind == GapKind::backward_chain && k == 0) return 0.0;
        i64 kn = k + 1;
        if (kn > k_max(f)) {
            // beyond the tracked window: fall back to the analytic rule
            switch (spec_.rule) {
                case WeightRule::geometric: {
                    bool shrinking = spec_.kind == GapKind::forward_chain ||
                                     (spec_.kind == GapKind::two_sided && k >= 0);
                    return shrinking ? spec_.lambda : 1.0 / spec_.lambda;
                }
                case WeightRule::inverse_quadratic: {
                    double kk = static_cast<double>(k);
                    return (kk * kk + 4.0) / ((kk + 1.0) * (kk + 1.0) + 4.0);
                }
                case WeightRule::smooth_ratio: {
                    double z = frac(row_at(f, k).z);
                    double g = smooth_ratio_model(z, spec_.delta, spec_.beta);
                    return spec_.kind == GapKind::forward_chain ? 1.0 / g : g;
                }
                default: break;
            }
            fail("GapMap: gap index window exhausted; enlarge the window");
        }
        return row_at(f, kn).length / row_at(f, k).length;
    }

    // Semiconjugacy data: collapse to the downstairs circle and the upstairs
    // transport of a downstairs point.  collapse(f(x)) = collapse(x) + alpha
    // mod 1 up to the stated tail error of the truncated mass function.
    double collapse(double x) const { return t_of_x(frac(x - co_)); }
    double transport_point(double t) const { return frac(phi(frac(t)) + co_); }
    double mass_function(double t) const { return transport_point(t); }
    double sigma() const { return sigma_; }
    double tracked_mass() const { return mass_ - tail_mass_; }
    double tail_mass() const { return tail_mass_; }
    double chart_offset() const { return co_; }

    std::vector<GapRef> gaps_sorted() const {
        std::vector<GapRef> out;
        out.reserve(rows_.size());
        for (const auto& r : rows_)
            out.push_back({r.family, r.k, r.z, frac(r.left + co_), r.length});
        return out;
    }

private:
    struct Row {
        double z;       // downstairs atom in [0,1)
        double length;  // gap length
        double prefix;  // total length of gaps at atoms strictly below z
        double left;    // upstairs left endpoint = sigma*z + prefix (+ tail share)
        int family;
        i64 k;
    };

    struct JumpInfo {
        double ts;          // downstairs fiber of the jump point
        double x;           // upstairs jump position in [0,1)
        double rep;         // representative in the base stretch frame
        double gap_length;  // length of the image gap the jump spans
        std::size_t row;    // base gap of the stretch containing the jump
    };

    void build_families() {
        kmin_.resize(spec_.families.size());
        kmax_.resize(spec_.families.size());
        lengths_.resize(spec_.families.size());
        for (std::size_t f = 0; f < spec_.families.size(); ++f) {
            switch (spec_.kind) {
                case GapKind::two_sided:
                    kmin_[f] = -spec_.window;
                    kmax_[f] = spec_.window;
                    break;
                case GapKind::backward_chain:
                    kmin_[f] = -spec_.window;
                    kmax_[f] = 0;
                    break;
                case GapKind::forward_chain:
                    kmin_[f] = 0;
                    kmax_[f] = spec_.window;
                    break;
            }
            lengths_[f] = weight_table(static_cast<int>(f));
        }
    }

    std::vector<double> weight_table(int f) {
        const auto& fam = spec_.families[static_cast<std::size_t>(f)];
        i64 lo = kmin_[static_cast<std::size_t>(f)], hi = kmax_[static_cast<std::size_t>(f)];
        std::vector<double> len(static_cast<std::size_t>(hi - lo + 1));
        auto at = [&](i64 k) -> double& { return len[static_cast<std::size_t>(k - lo)]; };
        switch (spec_.rule) {
            case WeightRule::zero:
                fail("GapMap: zero weights describe a plain rotation; no gap system");
            case WeightRule::geometric: {
                // infinite-sum normalization: two-sided sum = c (1+lambda)/(1-lambda),
                // one-sided chain sum = c / (1-lambda)
                double l = spec_.lambda;
                require(l > 0.0 && l < 1.0, "GapMap: geometric ratio must be in (0,1)");
                double total = spec_.kind == GapKind::two_sided ? (1.0 + l) / (1.0 - l)
                                                                : 1.0 / (1.0 - l);
                double c = fam.mass / total;
                for (i64 k = lo; k <= hi; ++k) at(k) = c * std::pow(l, std::abs(k));
                break;
            }
            case WeightRule::inverse_quadratic: {
                // sum over all integers of 1/(k^2+4) = (pi/2) coth(2 pi)
                double pi = std::numbers::pi;
                double whole = (pi / 2.0) / std::tanh(2.0 * pi);
                double total = spec_.kind == GapKind::two_sided ? whole : (whole + 0.25) / 2.0;
                double c = fam.mass / total;
                for (i64 k = lo; k <= hi; ++k)
                    at(k) = c / (static_cast<double>(k) * static_cast<double>(k) + 4.0);
                break;
            }
            case WeightRule::smooth_ratio: {
                require(spec_.kind != GapKind::two_sided,
                        "GapMap: a positionally smooth ratio rule cannot have summable "
                        "two-sided gap lengths; use a one-sided chain");
                require(spec_.delta > spec_.beta && spec_.beta >= 0.0,
                        "GapMap: smooth ratio model needs delta > beta >= 0");
                // backward chain: l_{k-1} = l_k / g(z_{k-1});
                // forward chain:  l_{k+1} = l_k / g(z_k); both shrink since g > 1.
                std::vector<double> rel(len.size());
                auto rel_at = [&](i64 k) -> double& { return rel[static_cast<std::size_t>(k - lo)]; };
                rel_at(0) = 1.0;
                if (spec_.kind == GapKind::backward_chain) {
                    for (i64 k = -1; k >= lo; --k) {
                        double z = atom_double(f, k);
                        rel_at(k) = rel_at(k + 1) / smooth_ratio_model(z, spec_.delta, spec_.beta);
                    }
                } else {
                    for (i64 k = 1; k <= hi; ++k) {
                        double z = atom_double(f, k - 1);
                        rel_at(k) = rel_at(k - 1) / smooth_ratio_model(z, spec_.delta, spec_.beta);
                    }
                }
                // the truncated relative tail is below e^{-(delta-beta) window}
                double s = 0.0;
                for (double v : rel) s += v;
                double tail_bound = rel[spec_.kind == GapKind::backward_chain
                                            ? 0
                                            : rel.size() - 1] /
                                    (std::exp(spec_.delta - spec_.beta) - 1.0);
                double c = fam.mass / (s + tail_bound);
                for (std::size_t i = 0; i < len.size(); ++i) len[i] = c * rel[i];
                break;
            }
        }
        return len;
    }

    double atom_double(int f, i64 k) const { return atom_exact(f, k).to_double(); }

    void build_tables() {
        rows_.clear();
        double tracked = 0.0;
        for (int f = 0; f < family_count(); ++f) {
            for (i64 k = kmin_[static_cast<std::size_t>(f)]; k <= kmax_[static_cast<std::size_t>(f)];
                 ++k) {
                Row r;
                r.family = f;
                r.k = k;
                r.z = atom_double(f, k);
                r.length = lengths_[static_cast<std::size_t>(f)]
                                   [static_cast<std::size_t>(k - kmin_[static_cast<std::size_t>(f)])];
                rows_.push_back(r);
                tracked += r.length;
            }
        }
        tail_mass_ = mass_ - tracked;
        require(tail_mass_ > -1e-12, "GapMap: tracked mass exceeds the declared total");
        if (tail_mass_ < 0.0) tail_mass_ = 0.0;
        sigma_ = 1.0 - mass_ + tail_mass_;
        require(sigma_ > 0.0, "GapMap: cumulative mass function is degenerate");
        std::sort(rows_.begin(), rows_.end(), [](const Row& a, const Row& b) { return a.z < b.z; });
        double acc = 0.0;
        for (auto& r : rows_) {
            r.prefix = acc;
            r.left = sigma_ * r.z + acc;
            acc += r.length;
        }
        row_index_.assign(spec_.families.size(), {});
        for (std::size_t f = 0; f < spec_.families.size(); ++f)
            row_index_[f].assign(static_cast<std::size_t>(kmax_[f] - kmin_[f] + 1), -1);
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const Row& r = rows_[i];
            row_index_[static_cast<std::size_t>(r.family)]
                      [static_cast<std::size_t>(r.k - kmin_[static_cast<std::size_t>(r.family)])] =
                          static_cast<i64>(i);
        }
        if (spec_.kind == GapKind::forward_chain) {
            for (int f = 0; f < family_count(); ++f) {
                JumpInfo j;
                QField tsq = (atom_exact(f, 0) - alpha_q_).mod1();
                j.ts = tsq.to_double();
                j.x = phi(j.ts);  // ts is not a tracked atom, so phi is continuous here
                j.gap_length = row_at(f, 0).length;
                std::size_t n = upper_bound_z(j.ts);
                if (n == 0) {
                    j.row = rows_.size() - 1;
                    j.rep = j.x + 1.0;
                } else {
                    j.row = n - 1;
                    j.rep = j.x;
                }
                jump_info_.push_back(j);
            }
        }
    }

    const Row& row_at(int f, i64 k) const {
        require(k >= k_min(f) && k <= k_max(f), "GapMap: gap index out of window");
        i64 idx = row_index_[static_cast<std::size_t>(f)]
                            [static_cast<std::size_t>(k - k_min(f))];
        return rows_[static_cast<std::size_t>(idx)];
    }

    // cumulative mass function on [0,1), right-continuous at atoms
    double phi(double t) const {
        std::size_t n = upper_bound_z(t);  // rows with z <= t
        double pre = n == 0 ? 0.0 : rows_[n - 1].prefix + rows_[n - 1].length;
        return sigma_ * t + pre;
    }

    double lift_of_t(double t_real) const {  // Phi extended to the line
        double shift = std::floor(t_real);
        return shift + phi(t_real - shift);
    }

    // index of the first row with z > t
    std::size_t upper_bound_z(double t) const {
        std::size_t lo = 0, hi = rows_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (rows_[mid].z <= t) lo = mid + 1; else hi = mid;
        }
        return lo;
    }

    // row whose upstairs gap contains x (closed), else -1; Side breaks the tie
    // at shared endpoints (left endpoint belongs to the gap on the right side).
    i64 locate_gap(double x, Side s) const {
        std::size_t lo = 0, hi = rows_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (rows_[mid].left <= x) lo = mid + 1; else hi = mid;
        }
        // candidate: previous row (left <= x); check containment with side rule
        if (lo > 0) {
            const Row& r = rows_[lo - 1];
            double right = r.left + r.length;
            if (x < right || (x == right && s == Side::left)) {
                if (x > r.left || (x == r.left && s == Side::right))
                    return static_cast<i64>(lo - 1);
            }
        }
        return -1;
    }

    // downstairs parameter of x in the fundamental domain (gap -> its atom)
    double t_of_x(double x) const {
        i64 g = locate_gap(x, Side::right);
        if (g >= 0) return rows_[static_cast<std::size_t>(g)].z;
        std::size_t lo = 0, hi = rows_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (rows_[mid].left + rows_[mid].length <= x) lo = mid + 1; else hi = mid;
        }
        double base_z = lo == 0 ? 0.0 : rows_[lo - 1].z;
        double base_x = lo == 0 ? 0.0 : rows_[lo - 1].left + rows_[lo - 1].length;
        return base_z + (x - base_x) / sigma_;
    }

    double plateau_value(int f) const {
        const Row& r = row_at(f, 0);
        return lift_of_t(r.z + alpha_);  // z+alpha is not a tracked atom: phi continuous
    }

    // Fundamental-domain lift.  Inside a tracked gap the map is the affine
    // bridge onto the image gap.  Between cyclically consecutive tracked gaps
    // the downstairs stretch is atom-free by construction, so the map is a
    // rigid translation anchored at the image of the base gap; this keeps the
    // evaluation exactly monotone across gap endpoints.
    double lift_fund(double x0, Side s) const {
        i64 g = locate_gap(x0, s);
        if (g >= 0) {
            const Row& r = rows_[static_cast<std::size_t>(g)];
            if (spec_.kind == GapKind::backward_chain && r.k == 0)
                return plateau_value(r.family);
            i64 kn = r.k + 1;
            require(kn <= k_max(r.family),
                    "GapMap: orbit leaves the tracked gap window; enlarge the window");
            const Row& img = row_at(r.family, kn);
            double carry = std::floor(r.z + alpha_);
            double rel = (x0 - r.left) / r.length;
            return carry + img.left + rel * img.length;
        }
        // cyclic base gap: last row with right endpoint <= x0, else wrap
        std::size_t lo = 0, hi = rows_.size();
        while (lo < hi) {
            std::size_t mid = (lo + hi) / 2;
            if (rows_[mid].left + rows_[mid].length <= x0) lo = mid + 1; else hi = mid;
        }
        double wrap = lo == 0 ? -1.0 : 0.0;
        const Row& br = lo == 0 ? rows_.back() : rows_[lo - 1];
        double base_right = br.left + br.length + wrap;
        double y;
        if (spec_.kind == GapKind::backward_chain && br.k == 0) {
            y = plateau_value(br.family) + wrap + (x0 - base_right);
        } else if (br.k + 1 <= k_max(br.family)) {
            const Row& img = row_at(br.family, br.k + 1);
            double carry = std::floor(br.z + alpha_);
            y = img.left + img.length + carry + wrap + (x0 - base_right);
        } else {
            // image gap untracked: fall back to the mass-function transport,
            // continuous on this stretch since all nearby atoms are untracked
            double t = br.z + wrap + (x0 - base_right) / sigma_;
            return lift_of_t(t + alpha_);
        }
        if (spec_.kind == GapKind::forward_chain) {
            std::size_t base_row = lo == 0 ? rows_.size() - 1 : lo - 1;
            double x_rep = x0 + (wrap < 0.0 ? 1.0 : 0.0);
            for (const JumpInfo& j : jump_info_) {
                if (j.row != base_row) continue;
                if (x_rep > j.rep || (x_rep == j.rep && s == Side::right)) y += j.gap_length;
            }
        }
        return y;
    }

    GapSystemSpec spec_;
    QField alpha_q_ = QField::integer(0);
    double alpha_ = 0.0, co_ = 0.0;
    double mass_ = 0.0, tail_mass_ = 0.0, sigma_ = 1.0;
    std::vector<i64> kmin_, kmax_;
    std::vector<std::vector<double>> lengths_;
    std::vector<Row> rows_;
    std::vector<std::vector<i64>> row_index_;
    std::vector<JumpInfo> jump_info_;
};

using GapMapPtr = std::shared_ptr<const GapMap>;

// ---------------------------------------------------------------------------
// Exact disjointness certificate: the tracked gaps are pairwise disjoint arcs
// iff their downstairs atoms are pairwise distinct (the cumulative mass
// function is strictly increasing, so distinct atoms open disjoint gaps).

struct DisjointnessCertificate {
    bool ok = false;
    i64 atoms_checked = 0;
    std::string detail;
};

inline DisjointnessCertificate certify_gap_disjointness(const GapMap& m, i64 k_lo, i64 k_hi) {
    DisjointnessCertificate cert;
    std::vector<QField> atoms;
    for (int f = 0; f < m.family_count(); ++f) {
        i64 lo = std::max(k_lo, m.k_min(f)), hi = std::min(k_hi, m.k_max(f));
        for (i64 k = lo; k <= hi; ++k) atoms.push_back(m.atom_exact(f, k));
    }
    std::sort(atoms.begin(), atoms.end());
    for (std::size_t i = 1; i < atoms.size(); ++i) {
        if (atoms[i - 1] == atoms[i]) {
            cert.detail = "atom collision at " + atoms[i].str();
            return cert;
        }
    }
    cert.ok = true;
    cert.atoms_checked = static_cast<i64>(atoms.size());
    cert.detail = "all downstairs atoms pairwise distinct (exact arithmetic)";
    return cert;
}

// ---------------------------------------------------------------------------
// Constructors in the shape used by the command line and the experiments.

inline MapPtr build_denjoy(const AlphaHandle& handle, WeightRule rule, const QField& seed,
                           double mass = 0.5, i64 window = 1200) {
    if (rule == WeightRule::zero || mass == 0.0) return build_rotation(handle);
    require(mass < 1.0, "build_denjoy: gap mass must be below 1");
    GapSystemSpec spec;
    spec.handle = handle;
    spec.kind = GapKind::two_sided;
    spec.rule = rule;
    spec.families = {{seed, mass}};
    spec.window = window;
    return std::make_shared<GapMap>(std::move(spec));
}

inline GapMapPtr build_cherry_jump(const AlphaHandle& handle, const QField& seed,
                                   double mass = 0.5, i64 window = 1200,
                                   double delta = 0.3, double beta = 0.1) {
    GapSystemSpec spec;
    spec.handle = handle;
    spec.kind = GapKind::forward_chain;
    spec.rule = WeightRule::smooth_ratio;
    spec.families = {{seed, mass}};
    spec.window = window;
    spec.delta = delta;
    spec.beta = beta;
    return std::make_shared<GapMap>(std::move(spec));
}

// Continuous order-preserving map with plateaus placed on the prescribed arcs
// (upstairs), built as a backward gap chain per plateau.  Seeds are solved so
// that each index-0 gap lands on its prescribed arc.
struct PlateauSpecArc {
    double lo, hi;
};

inline MapPtr build_cherry_return(const AlphaHandle& handle,
                                  const std::vector<PlateauSpecArc>& plateau_spec,
                                  i64 window = 1200, double delta = 0.3,
                                  double beta = 0.1) {
    if (plateau_spec.empty()) return build_rotation(handle);
    double total = 0.0;
    std::vector<PlateauSpecArc> sorted = plateau_spec;
    std::sort(sorted.begin(), sorted.end(),
              [](const PlateauSpecArc& a, const PlateauSpecArc& b) { return a.lo < b.lo; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        require(sorted[i].hi > sorted[i].lo && sorted[i].lo >= 0.0 && sorted[i].hi <= 1.0,
                "build_cherry_return: malformed plateau arc");
        total += sorted[i].hi - sorted[i].lo;
        if (i + 1 < sorted.size())
            require(sorted[i].hi <= sorted[i + 1].lo,
                    "build_cherry_return: overlapping plateau arcs");
    }
    require(sorted.back().hi <= sorted.front().lo + 1.0,
            "build_cherry_return: overlapping plateau arcs");
    require(total < 1.0, "build_cherry_return: plateau arcs cover the whole circle");

    // family mass = plateau length times the chain sum of the ratio rule
    auto chain_sum = [&](const QField& seed) {
        GapSystemSpec probe;
        probe.handle = handle;
        probe.kind = GapKind::backward_chain;
        probe.rule = WeightRule::smooth_ratio;
        probe.families = {{seed, 0.5}};
        probe.window = window;
        probe.delta = delta;
        probe.beta = beta;
        GapMap m(probe);
        // mass / l_0 for this seed
        return 0.5 / m.gap(0, 0).length;
    };

    // seeds live on a fixed dyadic grid so exact arithmetic stays in range
    const i64 ticks_den = 1ll << 36;
    std::vector<i64> ticks;
    std::vector<GapFamilySpec> fams;
    for (const auto& arc : sorted) {
        i64 t = static_cast<i64>(std::llround(arc.lo * static_cast<double>(ticks_den)));
        ticks.push_back(t);
        QField seed(t, ticks_den);
        double s = chain_sum(seed);
        double fam_mass = (arc.hi - arc.lo) * s;
        fams.push_back({seed, fam_mass});
    }
    double mass_total = 0.0;
    for (const auto& f : fams) mass_total += f.mass;
    require(mass_total < 0.95,
            "build_cherry_return: plateau arcs too long; the backward chains would "
            "exhaust the circle");

    GapSystemSpec spec;
    spec.handle = handle;
    spec.kind = GapKind::backward_chain;
    spec.rule = WeightRule::smooth_ratio;
    spec.families = fams;
    spec.window = window;
    spec.delta = delta;
    spec.beta = beta;

    // Family 0 is placed exactly by rotating the whole presentation (the
    // chart offset); further families are shot to the prescribed positions
    // relative to family 0, with masses rescaled for the plateau lengths.
    // The relative response is a staircase whose jumps come from a family's
    // own atoms crossing the anchor fiber, so a stuck target is dodged by
    // perturbing the ratio-model parameter and retrying.
    for (int attempt = 0;; ++attempt) {
        for (int round = 0; round < 400; ++round) {
            GapMap m(spec);
            double worst = 0.0;
            double base_shift = sorted[0].lo - m.gap(0, 0).left;
            for (std::size_t f = 0; f < fams.size(); ++f) {
                auto g0 = m.gap(static_cast<int>(f), 0);
                double want_len = sorted[f].hi - sorted[f].lo;
                worst = std::max(worst, std::abs(g0.length - want_len));
                spec.families[f].mass *= want_len / g0.length;
                if (f == 0) continue;
                double err = sorted[f].lo - (g0.left + base_shift);
                err -= std::round(err);  // circular error
                worst = std::max(worst, std::abs(err));
                ticks[f] +=
                    static_cast<i64>(std::llround(err * static_cast<double>(ticks_den)));
                spec.families[f].seed =
                    QField((ticks[f] % ticks_den + ticks_den) % ticks_den, ticks_den);
            }
            if (worst < 1e-10) break;
        }
        {
            GapMap natural(spec);
            spec.chart_offset = frac(sorted[0].lo - natural.gap(0, 0).left);
        }
        auto out = std::make_shared<GapMap>(spec);
        bool placed = true;
        for (std::size_t f = 0; f < fams.size(); ++f) {
            auto g0 = out->gap(static_cast<int>(f), 0);
            double derr = g0.left - sorted[f].lo;
            derr -= std::round(derr);
            if (std::abs(derr) > 1e-6 ||
                std::abs(g0.length - (sorted[f].hi - sorted[f].lo)) > 1e-6)
                placed = false;
        }
        if (placed) {
            check_lift_axioms(*out, 1000, 1e-9);
            return out;
        }
        require(attempt < 8, "build_cherry_return: plateau placement did not converge");
        spec.chart_offset = 0.0;
        spec.delta = delta + 0.011 * (attempt + 1) * (attempt % 2 == 0 ? 1.0 : -1.0);
        require(spec.delta > spec.beta,
                "build_cherry_return: plateau placement did not converge");
    }
}

}  // namespace rotorlab
