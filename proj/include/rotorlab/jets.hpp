#pragma once
// Truncated bivariate Taylor arithmetic ("jets").  Evaluating a closed-form
// field expression on Jet2<N> seeds yields every partial derivative up to
// total order N at the base point, exactly as differentiation of the formula
// would (to machine rounding).  Used for jacobians, divergences, and C^r jet
// norms of torus vector fields.

#include <array>
#include <cmath>

#include "rotorlab/common.hpp"

namespace rotorlab {

// Coefficient layout: graded lexicographic.  c[idx(i,j)] is the Taylor
// coefficient of x^i y^j, i.e. partial(i,j) / (i! j!).
template <int Order>
class Jet2 {
    static_assert(Order >= 1 && Order <= 6, "jet order out of range");

public:
    static constexpr int order = Order;
    static constexpr int terms = (Order + 1) * (Order + 2) / 2;

    Jet2() { c_.fill(0.0); }

    static constexpr int idx(int i, int j) { return (i + j) * (i + j + 1) / 2 + j; }

    static Jet2 constant(double v) {
        Jet2 r;
        r.c_[0] = v;
        return r;
    }
    static Jet2 seed_x(double x0) {
        Jet2 r;
        r.c_[0] = x0;
        r.c_[idx(1, 0)] = 1.0;
        return r;
    }
    static Jet2 seed_y(double y0) {
        Jet2 r;
        r.c_[0] = y0;
        r.c_[idx(0, 1)] = 1.0;
        return r;
    }

    double value() const { return c_[0]; }
    double coeff(int i, int j) const { return c_[idx(i, j)]; }
    double& coeff(int i, int j) { return c_[idx(i, j)]; }

    // True partial derivative (coefficients are factorial-normalized).
    double partial(int i, int j) const {
        double f = 1.0;
        for (int k = 2; k <= i; ++k) f *= k;
        for (int k = 2; k <= j; ++k) f *= k;
        return c_[idx(i, j)] * f;
    }

    Jet2 operator-() const {
        Jet2 r;
        for (int k = 0; k < terms; ++k) r.c_[k] = -c_[k];
        return r;
    }
    Jet2& operator+=(const Jet2& o) {
        for (int k = 0; k < terms; ++k) c_[k] += o.c_[k];
        return *this;
    }
    Jet2& operator-=(const Jet2& o) {
        for (int k = 0; k < terms; ++k) c_[k] -= o.c_[k];
        return *this;
    }
    friend Jet2 operator+(Jet2 a, const Jet2& b) { return a += b; }
    friend Jet2 operator-(Jet2 a, const Jet2& b) { return a -= b; }
    friend Jet2 operator*(const Jet2& a, double s) {
        Jet2 r;
        for (int k = 0; k < terms; ++k) r.c_[k] = a.c_[k] * s;
        return r;
    }
    friend Jet2 operator*(double s, const Jet2& a) { return a * s; }
    friend Jet2 operator+(const Jet2& a, double s) {
        Jet2 r = a;
        r.c_[0] += s;
        return r;
    }
    friend Jet2 operator+(double s, const Jet2& a) { return a + s; }
    friend Jet2 operator-(const Jet2& a, double s) { return a + (-s); }
    friend Jet2 operator-(double s, const Jet2& a) { return (-a) + s; }

    // Truncated product: convolution over total degree.
    friend Jet2 operator*(const Jet2& a, const Jet2& b) {
        Jet2 r;
        for (int da = 0; da <= Order; ++da)
            for (int ia = 0; ia + 0 <= da; ++ia) {
                int ja = da - ia;
                double ca = a.c_[idx(ia, ja)];
                if (ca == 0.0) continue;
                for (int db = 0; da + db <= Order; ++db)
                    for (int ib = 0; ib <= db; ++ib) {
                        int jb = db - ib;
                        double cb = b.c_[idx(ib, jb)];
                        if (cb == 0.0) continue;
                        r.c_[idx(ia + ib, ja + jb)] += ca * cb;
                    }
            }
        return r;
    }

    // Partial-derivative jets, one order lower in content but kept at the same
    // truncation (top coefficients are simply absent, i.e. zero).
    Jet2 dx() const {
        Jet2 r;
        for (int d = 1; d <= Order; ++d)
            for (int j = 0; j <= d; ++j) {
                int i = d - j;
                if (i >= 1) r.c_[idx(i - 1, j)] = c_[idx(i, j)] * static_cast<double>(i);
            }
        return r;
    }
    Jet2 dy() const {
        Jet2 r;
        for (int d = 1; d <= Order; ++d)
            for (int j = 0; j <= d; ++j) {
                int i = d - j;
                if (j >= 1) r.c_[idx(i, j - 1)] = c_[idx(i, j)] * static_cast<double>(j);
            }
        return r;
    }

private:
    std::array<double, terms> c_;
};

namespace jet_detail {

// Composition g(u) for univariate analytic g given the Taylor coefficients
// g_k = g^(k)(u0)/k! at u0 = value(u):  g(u) = sum g_k (u - u0)^k.
template <int Order>
Jet2<Order> compose(const Jet2<Order>& u, const std::array<double, Order + 1>& g) {
    Jet2<Order> w = u;
    w.coeff(0, 0) = 0.0;  // fluctuation part
    Jet2<Order> r = Jet2<Order>::constant(g[0]);
    Jet2<Order> p = Jet2<Order>::constant(1.0);
    for (int k = 1; k <= Order; ++k) {
        p = p * w;
        r += p * g[k];
    }
    return r;
}

}  // namespace jet_detail

template <int Order>
Jet2<Order> exp_jet(const Jet2<Order>& u) {
    std::array<double, Order + 1> g{};
    double e = std::exp(u.value());
    double f = 1.0;
    for (int k = 0; k <= Order; ++k) {
        g[k] = e / f;
        f *= (k + 1);
    }
    return jet_detail::compose(u, g);
}

template <int Order>
Jet2<Order> sqrt_jet(const Jet2<Order>& u) {
    double u0 = u.value();
    require(u0 > 0.0, "sqrt_jet: base value must be positive");
    std::array<double, Order + 1> g{};
    double s = std::sqrt(u0);
    g[0] = s;
    // d^k/du^k sqrt(u) = s * prod_{m<k} (1/2 - m) / u^k ; divide by k!.
    double coef = 1.0;
    for (int k = 1; k <= Order; ++k) {
        coef *= (0.5 - (k - 1)) / k;
        g[k] = s * coef / std::pow(u0, k);
    }
    return jet_detail::compose(u, g);
}

// Plain doubles satisfy the same expression interface; templated field
// formulas run on either scalar.
inline double exp_jet(double u) { return std::exp(u); }
inline double sqrt_jet(double u) { return std::sqrt(u); }

// Uniform access to the numeric value and to constants for either scalar.
template <class T>
struct ScalarOps;
template <>
struct ScalarOps<double> {
    static double constant(double v) { return v; }
    static double value(double x) { return x; }
};
template <int Order>
struct ScalarOps<Jet2<Order>> {
    static Jet2<Order> constant(double v) { return Jet2<Order>::constant(v); }
    static double value(const Jet2<Order>& j) { return j.value(); }
};

// C^4 ramp: 0 at t<=0 rising to 1 at t>=1 with four vanishing derivatives at
// both ends (9th-order smoothstep).  Polynomial, so jets are exact.
template <class T>
T smooth_ramp(const T& t) {
    // 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9
    T t2 = t * t;
    T t4 = t2 * t2;
    T t5 = t4 * t;
    T inner = ((((70.0 * t) + (-315.0)) * t + 540.0) * t + (-420.0)) * t + 126.0;
    return t5 * inner;
}

// Flat-top C^4 cutoff in a scalar "distance" s >= 0: identically 1 for
// s <= inner, identically 0 for s >= outer, a smooth_ramp between.  The
// branch is taken on the value, so jets stay exact: the function is locally
// either constant or polynomial.
template <class T>
T flat_cutoff(const T& s, double inner, double outer) {
    require(0.0 <= inner && inner < outer, "flat_cutoff: need 0 <= inner < outer");
    double v = ScalarOps<T>::value(s);
    if (v <= inner) return ScalarOps<T>::constant(1.0);
    if (v >= outer) return ScalarOps<T>::constant(0.0);
    T t = (ScalarOps<T>::constant(outer) - s) * (1.0 / (outer - inner));
    return smooth_ramp(t);
}

}  // namespace rotorlab
