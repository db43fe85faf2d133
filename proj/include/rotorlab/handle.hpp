#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "rotorlab/cfrac.hpp"
#include "rotorlab/qfield.hpp"

namespace rotorlab {

// Symbolic rotation number: an exact rational or a quadratic irrational given
// by an eventually periodic quotient sequence.  Every quotient, convergent and
// the field value itself are available exactly, so orbit endpoints computed
// from a handle never accumulate rounding error.
class AlphaHandle {
public:
    static AlphaHandle rational(i64 p, i64 q) {
        require(q > 0, "AlphaHandle: denominator must be positive");
        AlphaHandle h;
        h.value_ = QField(p, q);
        h.digits_ = expand_rational(p, q).a;
        return h;
    }

    // digits = [a_0, ..., a_j] then `period` repeated forever.
    static AlphaHandle quadratic(std::vector<i64> preperiod, std::vector<i64> period) {
        require(!preperiod.empty(), "AlphaHandle: preperiod must contain a_0");
        require(!period.empty(), "AlphaHandle: empty period");
        for (std::size_t i = 1; i < preperiod.size(); ++i)
            require(preperiod[i] >= 1, "AlphaHandle: preperiod quotient below 1");
        for (i64 b : period) require(b >= 1, "AlphaHandle: period quotient below 1");

        // Purely periodic tail value t = [b_1; b_2, ...] solves the Moebius
        // fixed-point equation of the period's digit-matrix product.
        i64 m11 = 1, m12 = 0, m21 = 0, m22 = 1;
        for (i64 b : period) {
            i64 n11 = checked_add(checked_mul(m11, b), m12);
            i64 n21 = checked_add(checked_mul(m21, b), m22);
            m12 = m11;
            m22 = m21;
            m11 = n11;
            m21 = n21;
        }
        require(m21 != 0, "AlphaHandle: degenerate period");
        i64 tr = checked_add(m11, -m22);
        i64 disc = checked_add(checked_mul(tr, tr), 4 * checked_mul(m21, m12));
        require(disc > 0, "AlphaHandle: non-positive discriminant");
        i64 r = static_cast<i64>(std::llround(std::sqrt(static_cast<double>(disc))));
        require(r * r != disc, "AlphaHandle: period encodes a rational value");
        QField t(tr, 1, 2 * m21, disc);

        QField value = fold_preperiod(preperiod, t);
        AlphaHandle h;
        h.value_ = value;
        h.digits_ = preperiod;
        h.period_ = period;
        return h;
    }

    static AlphaHandle golden() { return quadratic({0}, {1}); }

    bool is_rational() const { return period_.empty(); }
    const QField& value() const { return value_; }
    double approx() const { return value_.to_double(); }

    // Depth of the finite expansion (rational handles only).
    std::size_t rational_depth() const {
        require(is_rational(), "rational_depth: handle is irrational");
        return digits_.size();
    }

    bool has_quotient(std::size_t n) const { return !is_rational() || n < digits_.size(); }

    i64 quotient(std::size_t n) const {
        if (n < digits_.size()) return digits_[n];
        if (is_rational())
            fail("quotient: index " + std::to_string(n) + " beyond rational expansion of depth " +
                 std::to_string(digits_.size()));
        return period_[(n - digits_.size()) % period_.size()];
    }

    std::vector<i64> quotients(std::size_t count) const {
        std::vector<i64> out;
        out.reserve(count);
        for (std::size_t i = 0; i < count; ++i) out.push_back(quotient(i));
        return out;
    }

    Convergent convergent(std::size_t n) const {
        i64 pm1 = 1, qm1 = 0, pm2 = 0, qm2 = 1;
        Convergent cur{0, 1};
        for (std::size_t i = 0; i <= n; ++i) {
            i64 a = quotient(i);
            cur.p = checked_add(checked_mul(a, pm1), pm2);
            cur.q = checked_add(checked_mul(a, qm1), qm2);
            pm2 = pm1;
            qm2 = qm1;
            pm1 = cur.p;
            qm1 = cur.q;
        }
        return cur;
    }

    std::vector<Convergent> convergents_up_to(std::size_t n) const {
        std::vector<i64> a = quotients(n + 1);
        return convergents(a);
    }

    // Largest quotient the tail ever shows; the distortion bound's K.
    i64 max_quotient() const {
        i64 k = 1;
        for (std::size_t i = 1; i < digits_.size(); ++i) k = std::max(k, digits_[i]);
        for (i64 b : period_) k = std::max(k, b);
        return k;
    }

    const std::vector<i64>& preperiod() const { return digits_; }
    const std::vector<i64>& period() const { return period_; }

    std::string str() const {
        std::string s = "[" + std::to_string(digits_[0]) + ";";
        for (std::size_t i = 1; i < digits_.size(); ++i) s += " " + std::to_string(digits_[i]) + ",";
        if (!period_.empty()) {
            s += " (";
            for (std::size_t i = 0; i < period_.size(); ++i)
                s += std::to_string(period_[i]) + (i + 1 < period_.size() ? " " : "");
            s += ")*";
        } else if (s.back() == ',') {
            s.pop_back();
        }
        s += "]";
        return s;
    }

private:
    static QField fold_preperiod(const std::vector<i64>& pre, const QField& tail) {
        i64 n11 = 1, n12 = 0, n21 = 0, n22 = 1;
        for (i64 a : pre) {
            i64 t11 = checked_add(checked_mul(n11, a), n12);
            i64 t21 = checked_add(checked_mul(n21, a), n22);
            n12 = n11;
            n22 = n21;
            n11 = t11;
            n21 = t21;
        }
        QField num = tail.mul_rational(n11, 1) + QField::integer(n12);
        QField den = tail.mul_rational(n21, 1) + QField::integer(n22);
        return num * den.inverse();
    }

    QField value_;
    std::vector<i64> digits_;  // preperiod for quadratic, full expansion for rational
    std::vector<i64> period_;
};

// Circle point with exact arithmetic inherited from the handle's field.
inline QField circle_add(const QField& x, const QField& y) { return (x + y).mod1(); }
inline QField circle_sub(const QField& x, const QField& y) { return (x - y).mod1(); }

// Distance to 0 on the circle: min(x, 1-x) for x in [0,1).
inline QField circle_norm(const QField& x_mod1) {
    QField one = QField::integer(1);
    QField other = one - x_mod1;
    return x_mod1 <= other ? x_mod1 : other;
}

// d(x, y) on the circle, both in [0,1).
inline QField circle_dist(const QField& x, const QField& y) { return circle_norm((x - y).mod1()); }

}  // namespace rotorlab
