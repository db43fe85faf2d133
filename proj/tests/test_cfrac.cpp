#include <catch2/catch_amalgamated.hpp>

#include "rotorlab/cfrac.hpp"
#include "rotorlab/handle.hpp"
#include "rotorlab/qfield.hpp"

using namespace rotorlab;

TEST_CASE("qfield exact ordering and reduction") {
    QField half(1, 2);
    QField third(1, 3);
    CHECK(third < half);
    CHECK((half - third) == QField(1, 6));
    CHECK(QField(2, 4) == half);
    CHECK(QField(-3, -6) == half);

    QField inv_golden(-1, 1, 2, 5);  // (sqrt5 - 1)/2
    CHECK(inv_golden.sign() == 1);
    CHECK(inv_golden < QField(13, 21));
    CHECK(inv_golden > QField(8, 13));
    CHECK(inv_golden.to_double() == Catch::Approx(0.6180339887498949).epsilon(1e-14));

    // algebraic identity: x^2 + x - 1 = 0 for x = (sqrt5-1)/2
    QField zero = inv_golden * inv_golden + inv_golden - QField::integer(1);
    CHECK(zero.sign() == 0);
}

TEST_CASE("qfield floor and mod1") {
    QField x(-1, 1, 2, 5);
    CHECK(x.floor() == 0);
    CHECK((x.mul_rational(7, 1)).floor() == 4);  // 7*0.618... = 4.326...
    QField y = x.mul_rational(7, 1).mod1();
    CHECK(y.sign() >= 0);
    CHECK((y - QField::integer(1)).sign() < 0);
    CHECK(y.to_double() == Catch::Approx(7 * 0.6180339887498949 - 4).epsilon(1e-12));
    CHECK(QField(-1, 3).mod1() == QField(2, 3));
    CHECK(QField::integer(-2).mod1().sign() == 0);
}

TEST_CASE("rational expansion is exact and canonical") {
    auto e = expand_rational(2, 5);
    CHECK(e.a == std::vector<i64>{0, 2, 2});
    CHECK(e.exact);

    auto f = expand_rational(355, 113);
    CHECK(f.a == std::vector<i64>{3, 7, 16});
    CHECK(f.exact);

    auto g = expand_rational(-7, 3);  // floor-based: -7/3 = [-3; 2, 2]? -3 + 2/3
    auto back = convergents(g.a).back();
    CHECK(back.p * 3 == back.q * -7);
}

TEST_CASE("convergents of [0;2,2,2]") {
    auto c = convergents({0, 2, 2, 2});
    REQUIRE(c.size() == 4);
    CHECK(c[0] == Convergent{0, 1});
    CHECK(c[1] == Convergent{1, 2});
    CHECK(c[2] == Convergent{2, 5});
    CHECK(c[3] == Convergent{5, 12});
    for (std::size_t i = 1; i < c.size(); ++i) {
        i64 det = convergent_determinant(c[i - 1], c[i]);
        CHECK((det == 1 || det == -1));
    }
}

TEST_CASE("floating expansion halts at the residual floor") {
    auto e = expand(0.5);
    CHECK(e.a == std::vector<i64>{0, 2});

    double inv_golden = (std::sqrt(5.0) - 1.0) / 2.0;
    auto g = expand(inv_golden, 12);
    REQUIRE(g.a.size() == 12);
    CHECK(g.a[0] == 0);
    for (std::size_t i = 1; i < 8; ++i) CHECK(g.a[i] == 1);
    CHECK_FALSE(g.exact);
}

TEST_CASE("expansion reconstruction error bound") {
    double alpha = 0.7390851332151607;
    auto e = expand(alpha, 20);
    auto c = convergents(e.a);
    for (std::size_t i = 0; i + 1 < c.size(); ++i) {
        double approx_err = std::abs(alpha - static_cast<double>(c[i].p) / static_cast<double>(c[i].q));
        CHECK(approx_err < convergent_error_bound(c[i], c[i + 1]) + 1e-15);
    }
}

TEST_CASE("quotient statistics") {
    auto s = quotient_stats({0, 1, 2, 1, 1, 4, 1, 1, 1, 1}, 4);
    CHECK(s.min == 1);
    CHECK(s.max == 4);
    CHECK(s.liminf_proxy == 1);

    auto t = quotient_stats({0, 3, 3, 3, 3}, 2);
    CHECK(t.min == 3);
    CHECK(t.liminf_proxy == 3);
}

TEST_CASE("golden handle value and quotients") {
    auto h = AlphaHandle::golden();
    CHECK_FALSE(h.is_rational());
    CHECK(h.approx() == Catch::Approx(0.6180339887498949).epsilon(1e-14));
    CHECK(h.quotient(0) == 0);
    CHECK(h.quotient(1) == 1);
    CHECK(h.quotient(57) == 1);
    CHECK(h.max_quotient() == 1);

    // Fibonacci convergents
    CHECK(h.convergent(1) == Convergent{1, 1});
    CHECK(h.convergent(2) == Convergent{1, 2});
    CHECK(h.convergent(5) == Convergent{5, 8});
    CHECK(h.convergent(7) == Convergent{13, 21});

    // x^2 + x - 1 = 0
    QField v = h.value();
    CHECK((v * v + v - QField::integer(1)).sign() == 0);
}

TEST_CASE("periodic handle [0;(2)] is sqrt2 - 1") {
    auto h = AlphaHandle::quadratic({0}, {2});
    CHECK(h.approx() == Catch::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-14));
    QField v = h.value();
    // (x+1)^2 = 2
    QField lhs = (v + QField::integer(1)) * (v + QField::integer(1));
    CHECK((lhs - QField::integer(2)).sign() == 0);
}

TEST_CASE("handle with preperiod") {
    // [0; 2, (1 2)]: quotients 0,2,1,2,1,2,...
    auto h = AlphaHandle::quadratic({0, 2}, {1, 2});
    CHECK(h.quotient(1) == 2);
    CHECK(h.quotient(2) == 1);
    CHECK(h.quotient(3) == 2);
    CHECK(h.quotient(4) == 1);
    // numeric cross-check against a deep truncation
    auto c = h.convergent(20);
    CHECK(h.approx() == Catch::Approx(static_cast<double>(c.p) / static_cast<double>(c.q)).margin(1e-12));
    CHECK(h.max_quotient() == 2);
}

TEST_CASE("rational handle refuses quotients beyond its depth") {
    auto h = AlphaHandle::rational(2, 5);
    CHECK(h.is_rational());
    CHECK(h.rational_depth() == 3);
    CHECK(h.quotient(2) == 2);
    CHECK_THROWS(h.quotient(3));
}

TEST_CASE("circle helpers") {
    auto g = AlphaHandle::golden();
    QField x = g.value();
    QField two_alpha = circle_add(x, x);
    CHECK(two_alpha.to_double() == Catch::Approx(2 * 0.6180339887498949 - 1).epsilon(1e-12));
    CHECK(circle_dist(x, x).sign() == 0);
    QField d = circle_dist(QField(1, 10), QField(9, 10));
    CHECK(d == QField(1, 5));
}
