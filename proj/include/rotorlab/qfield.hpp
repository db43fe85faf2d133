#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "rotorlab/common.hpp"

namespace rotorlab {

// Element (a + b*sqrt(d))/c of the real quadratic field Q(sqrt(d)), c > 0,
// gcd(a, b, c) = 1.  d = 0 encodes plain rationals.  d must not be a perfect
// square when nonzero, so equality and order are decidable exactly.
class QField {
public:
    QField() : a_(0), b_(0), c_(1), d_(0) {}
    QField(i64 num, i64 den) : a_(num), b_(0), c_(den), d_(0) {
        require(den != 0, "QField: zero denominator");
        normalize();
    }
    QField(i64 a, i64 b, i64 c, i64 d) : a_(a), b_(b), c_(c), d_(d) {
        require(c != 0, "QField: zero denominator");
        require(d >= 0, "QField: negative radicand");
        if (d == 0) b_ = 0;
        normalize();
    }

    static QField integer(i64 n) { return QField(n, 1); }

    i64 a() const { return a_; }
    i64 b() const { return b_; }
    i64 c() const { return c_; }
    i64 d() const { return d_; }
    bool is_rational() const { return b_ == 0; }

    double to_double() const {
        return (static_cast<double>(a_) + static_cast<double>(b_) * std::sqrt(static_cast<double>(d_))) /
               static_cast<double>(c_);
    }

    // sign of a + b*sqrt(d), exact.
    static int radical_sign(i64 a, i64 b, i64 d) {
        if (b == 0) return a > 0 ? 1 : (a < 0 ? -1 : 0);
        if (a == 0) return b > 0 ? 1 : -1;
        if (a > 0 && b > 0) return 1;
        if (a < 0 && b < 0) return -1;
        i128 lhs = static_cast<i128>(a) * a;            // |a|^2
        i128 rhs = static_cast<i128>(b) * b * d;        // |b sqrt(d)|^2
        if (lhs == rhs) return 0;                       // only for square d; callers forbid it
        bool radical_wins = rhs > lhs;
        return radical_wins ? (b > 0 ? 1 : -1) : (a > 0 ? 1 : -1);
    }

    int sign() const { return radical_sign(a_, b_, d_); }

    QField operator-() const { return QField(-a_, -b_, c_, d_, raw_tag{}); }

    QField operator+(const QField& o) const {
        i64 d = join_radicand(o);
        i64 g = gcd64(c_, o.c_);  // reduce first so lcm-sized sums stay in range
        i64 cr = o.c_ / g;
        i64 cl = c_ / g;
        i64 na = checked_add(checked_mul(a_, cr), checked_mul(o.a_, cl));
        i64 nb = checked_add(checked_mul(b_, cr), checked_mul(o.b_, cl));
        return QField(na, nb, checked_mul(c_, cr), d);
    }
    QField operator-(const QField& o) const { return *this + (-o); }

    QField operator*(const QField& o) const {
        i64 d = join_radicand(o);
        i64 na = checked_add(checked_mul(a_, o.a_), checked_mul(checked_mul(b_, o.b_), d));
        i64 nb = checked_add(checked_mul(a_, o.b_), checked_mul(b_, o.a_));
        return QField(na, nb, checked_mul(c_, o.c_), d);
    }

    QField mul_rational(i64 p, i64 q) const {
        require(q != 0, "QField: rational factor with zero denominator");
        return QField(checked_mul(a_, p), checked_mul(b_, p), checked_mul(c_, q), d_);
    }

    QField inverse() const {
        require(sign() != 0, "QField: inverse of zero");
        // c/(a + b sqrt d) = c (a - b sqrt d)/(a^2 - b^2 d)
        i64 norm = checked_add(checked_mul(a_, a_), -checked_mul(checked_mul(b_, b_), d_));
        return QField(checked_mul(c_, a_), checked_mul(c_, -b_), norm, d_);
    }

    int compare(const QField& o) const {
        QField diff = *this - o;
        return diff.sign();
    }
    bool operator==(const QField& o) const { return compare(o) == 0; }
    bool operator!=(const QField& o) const { return compare(o) != 0; }
    bool operator<(const QField& o) const { return compare(o) < 0; }
    bool operator<=(const QField& o) const { return compare(o) <= 0; }
    bool operator>(const QField& o) const { return compare(o) > 0; }
    bool operator>=(const QField& o) const { return compare(o) >= 0; }

    i64 floor() const {
        double est = to_double();
        i64 n = static_cast<i64>(std::floor(est)) - 2;
        // exact adjustment around the double estimate
        while ((*this - integer(n + 1)).sign() >= 0) ++n;  // ends with value < n+1
        while ((*this - integer(n)).sign() < 0) --n;       // ends with value >= n
        return n;
    }

    // value - floor(value), in [0, 1)
    QField mod1() const { return *this - integer(floor()); }

    std::string str() const {
        std::string s = "(" + std::to_string(a_);
        if (b_ != 0) s += (b_ > 0 ? "+" : "") + std::to_string(b_) + "*sqrt(" + std::to_string(d_) + ")";
        s += ")/" + std::to_string(c_);
        return s;
    }

    friend std::ostream& operator<<(std::ostream& os, const QField& q) { return os << q.str(); }

private:
    struct raw_tag {};
    QField(i64 a, i64 b, i64 c, i64 d, raw_tag) : a_(a), b_(b), c_(c), d_(d) {}

    i64 join_radicand(const QField& o) const {
        if (d_ == 0) return o.d_;
        if (o.d_ == 0) return d_;
        require(d_ == o.d_, "QField: mixing distinct radicands");
        return d_;
    }

    void normalize() {
        if (c_ < 0) {
            a_ = -a_;
            b_ = -b_;
            c_ = -c_;
        }
        i64 g = gcd64(gcd64(a_, b_), c_);
        if (g > 1) {
            a_ /= g;
            b_ /= g;
            c_ /= g;
        }
        if (b_ == 0) d_ = 0;
    }

    i64 a_, b_, c_, d_;
};

}  // namespace rotorlab
