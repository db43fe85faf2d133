#pragma once
// Dense-coefficient polynomials and compactly supported bump profiles: the
// smooth ingredients shared by circle-map perturbations and strip-localized
// vector fields.  A BumpProfile vanishes to high order at the ends of its
// support, so piecewise definitions glue with several continuous derivatives.

#include <cmath>
#include <vector>

#include "rotorlab/common.hpp"

namespace rotorlab {

struct Poly {
    std::vector<double> c;  // c[0] + c[1] t + c[2] t^2 + ...

    double operator()(double t) const {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > 0;) acc = acc * t + c[i];
        return acc;
    }
    Poly derivative() const {
        if (c.size() <= 1) return Poly{{0.0}};
        std::vector<double> d(c.size() - 1);
        for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
        return Poly{d};
    }
    double integral01() const {  // integral over [0, 1]
        double acc = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) acc += c[i] / static_cast<double>(i + 1);
        return acc;
    }
    Poly scaled(double s) const {
        Poly out = *this;
        for (auto& v : out.c) v *= s;
        return out;
    }
};

inline Poly operator*(const Poly& a, const Poly& b) {
    std::vector<double> c(a.c.size() + b.c.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i)
        for (std::size_t j = 0; j < b.c.size(); ++j) c[i + j] += a.c[i] * b.c[j];
    return Poly{c};
}

inline Poly operator+(const Poly& a, const Poly& b) {
    std::vector<double> c(std::max(a.c.size(), b.c.size()), 0.0);
    for (std::size_t i = 0; i < a.c.size(); ++i) c[i] += a.c[i];
    for (std::size_t i = 0; i < b.c.size(); ++i) c[i] += b.c[i];
    return Poly{c};
}

inline Poly poly_pow(Poly base, unsigned n) {
    Poly out{{1.0}};
    while (n > 0) {
        if (n & 1u) out = out * base;
        base = base * base;
        n >>= 1u;
    }
    return out;
}

// (4 t (1-t))^order on [0,1]: equals 1 at t = 1/2, vanishes to the given order
// at both ends.
inline Poly bump_poly(unsigned order) { return poly_pow(Poly{{0.0, 4.0, -4.0}}, order); }

// (t - 1/2) (4 t (1-t))^order: odd about the midpoint, vanishes to the given
// order at both ends; unit slope at the midpoint up to the caller's rescaling.
inline Poly tongue_poly(unsigned order) {
    return Poly{{-0.5, 1.0}} * poly_pow(Poly{{0.0, 4.0, -4.0}}, order);
}

// A polynomial profile supported on [lo, hi], identically zero outside.
// Derivatives up to max_deriv are precomputed; the profile and its first
// `order-1` derivatives vanish at the support boundary when the underlying
// polynomial does, so eval(., k) is globally continuous for k < order.
class BumpProfile {
public:
    BumpProfile() = default;
    BumpProfile(double lo, double hi, Poly p, int max_deriv = 6) : lo_(lo), hi_(hi) {
        require(hi > lo, "BumpProfile: empty support");
        derivs_.push_back(std::move(p));
        for (int k = 0; k < max_deriv; ++k) derivs_.push_back(derivs_.back().derivative());
    }

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double width() const { return hi_ - lo_; }

    // d^k/dx^k of the profile at x.
    double eval(double x, int k = 0) const {
        if (x <= lo_ || x >= hi_) return 0.0;
        require(k >= 0 && k < static_cast<int>(derivs_.size()), "BumpProfile: derivative order");
        double w = hi_ - lo_;
        double t = (x - lo_) / w;
        return derivs_[static_cast<std::size_t>(k)](t) / std::pow(w, k);
    }

    // Same, with x taken mod 1 (profile supported inside one period).
    double eval_periodic(double x, int k = 0) const { return eval(x - std::floor(x - lo_), k); }

    double integral() const { return (hi_ - lo_) * derivs_[0].integral01(); }

    double max_abs(int k = 0, int samples = 2048) const {
        double m = 0.0;
        for (int i = 0; i <= samples; ++i)
            m = std::max(m, std::abs(eval(lo_ + (hi_ - lo_) * i / samples, k)));
        return m;
    }

private:
    double lo_ = 0.0, hi_ = 1.0;
    std::vector<Poly> derivs_;
};

// Standard C^(order-1) bump over [lo, hi] with peak value 1 at the midpoint.
inline BumpProfile make_bump(double lo, double hi, unsigned order = 5) {
    return BumpProfile(lo, hi, bump_poly(order));
}

}  // namespace rotorlab
