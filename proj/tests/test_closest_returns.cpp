#include <catch2/catch_amalgamated.hpp>

#include "rotorlab/closest_returns.hpp"

using namespace rotorlab;

TEST_CASE("closest return times are Fibonacci for the golden handle") {
    auto g = AlphaHandle::golden();
    auto q = closest_return_times(g, 7);
    CHECK(q == std::vector<i64>{1, 1, 2, 3, 5, 8, 13, 21});
}

TEST_CASE("brute-force return records equal the denominator sequence") {
    auto check_oracle = [](const AlphaHandle& h, i64 horizon) {
        auto records = brute_force_closest_returns(h, horizon);
        std::vector<i64> expected;
        for (std::size_t n = 0; n < 20; ++n) {
            i64 q = h.convergent(n).q;
            if (q > horizon) break;
            if (expected.empty() || q != expected.back()) expected.push_back(q);
        }
        std::vector<i64> got;
        for (const auto& r : records) got.push_back(r.time);
        CHECK(got == expected);
        // minimality along the way: distances strictly decrease
        for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].dist < records[i - 1].dist);
    };
    check_oracle(AlphaHandle::golden(), 60);
    check_oracle(AlphaHandle::quadratic({0}, {2}), 80);      // q: 1,2,5,12,29,70
    check_oracle(AlphaHandle::quadratic({0, 3}, {1, 2}), 60);
    check_oracle(AlphaHandle::quadratic({0}, {1, 1, 3}), 60);
}

TEST_CASE("silver handle return times") {
    auto s = AlphaHandle::quadratic({0}, {2});
    auto q = closest_return_times(s, 5);
    CHECK(q == std::vector<i64>{1, 2, 5, 12, 29, 70});
}

TEST_CASE("intermediate returns when all quotients are 2") {
    auto s = AlphaHandle::quadratic({0}, {2});
    auto r = intermediate_return_times(s, 1);
    CHECK(r.count == 1);
    CHECK(r.stated_count == 1);     // a_1 - 1, agrees because the tail is constant
    CHECK(r.recursion_count == 1);  // a_3 - 1
    i64 q1 = s.convergent(1).q, q2 = s.convergent(2).q;
    REQUIRE(r.times.size() == 1);
    CHECK(r.times[0] == q1 + q2);
}

TEST_CASE("intermediate return count follows the quotient two levels up") {
    // a_3 = 4 while a_1 = 1: the enumeration decides between the conventions.
    auto h = AlphaHandle::quadratic({0, 1, 1, 4}, {1});
    auto r = intermediate_return_times(h, 1);
    CHECK(r.recursion_count == 3);
    CHECK(r.stated_count == 0);
    CHECK(r.count == 3);  // matches a_{n+2} - 1
    i64 q1 = h.convergent(1).q, q2 = h.convergent(2).q;
    for (std::size_t j = 0; j < r.times.size(); ++j)
        CHECK(r.times[j] == q1 + static_cast<i64>(j + 1) * q2);
}

TEST_CASE("intermediate return times sit on the q_{n+1} ladder") {
    for (auto h : {AlphaHandle::golden(), AlphaHandle::quadratic({0}, {3}),
                   AlphaHandle::quadratic({0, 2}, {1, 2})}) {
        for (std::size_t n = 1; n <= 3; ++n) {
            auto r = intermediate_return_times(h, n);
            CHECK(r.count == r.recursion_count);
            i64 qn = h.convergent(n).q, qn1 = h.convergent(n + 1).q;
            for (std::size_t j = 0; j < r.times.size(); ++j)
                CHECK(r.times[j] == qn + static_cast<i64>(j + 1) * qn1);
        }
    }
}

TEST_CASE("dynamic partition tiles the circle exactly") {
    auto g = AlphaHandle::golden();
    auto part = dynamic_partition(g, QField::integer(0), 3);
    CHECK(part.tiles_exactly);
    // q_3 = 3 copies of I_2 plus q_2 = 2 copies of I_3
    i64 prev_gen = 0, cur_gen = 0;
    QField total = QField::integer(0);
    for (const auto& t : part.tiles) {
        (t.generation == 0 ? prev_gen : cur_gen) += 1;
        total = total + arc_length(t.arc);
    }
    CHECK(prev_gen == 3);
    CHECK(cur_gen == 2);
    CHECK(total == QField::integer(1));
}

TEST_CASE("dynamic partition across handles and levels") {
    for (auto h : {AlphaHandle::quadratic({0}, {2}), AlphaHandle::quadratic({0, 1, 2}, {2, 1}),
                   AlphaHandle::quadratic({0}, {1, 3})}) {
        for (std::size_t n = 1; n <= 5; ++n) {
            auto part = dynamic_partition(h, QField(1, 7), n);
            CHECK(part.tiles_exactly);
            CHECK(static_cast<i64>(part.tiles.size()) ==
                  h.convergent(n).q + h.convergent(n - 1).q);
        }
    }
}

TEST_CASE("dynamic partition rejects rational handles past their depth") {
    auto r = AlphaHandle::rational(2, 5);  // depth 3
    CHECK_THROWS_AS(dynamic_partition(r, QField::integer(0), 4), std::invalid_argument);
}

TEST_CASE("three-distance histogram has at most two lengths") {
    auto g = AlphaHandle::golden();
    for (std::size_t n = 2; n <= 7; ++n) {
        auto hist = three_distance_points(g, QField::integer(0), n);
        REQUIRE(hist.entries.size() <= 2);
        // counts are q_{n-2} (long gaps |I_{n-1}|) and q_{n-1} (short gaps |I_{n-2}|)
        i64 qm1 = g.convergent(n - 1).q;
        i64 qm2 = n >= 2 ? g.convergent(n - 2).q : 0;
        QField mass = QField::integer(0);
        for (auto& [len, cnt] : hist.entries) mass = mass + len.mul_rational(cnt, 1);
        CHECK(mass == QField::integer(1));
        if (hist.entries.size() == 2) {
            CHECK(((hist.entries[0].second == qm1 && hist.entries[1].second == qm2) ||
                   (hist.entries[0].second == qm2 && hist.entries[1].second == qm1)));
        }
    }
}

TEST_CASE("three-distance level one is a single full gap") {
    auto hist = three_distance_points(AlphaHandle::golden(), QField::integer(0), 1);
    REQUIRE(hist.entries.size() == 1);
    CHECK(hist.entries[0].first == QField::integer(1));
    CHECK(hist.points == 1);
}

TEST_CASE("intersection multiplicity on handcrafted arcs") {
    QField z = QField::integer(0);
    auto q = [](i64 p, i64 d) { return QField(p, d); };
    // touching closed arcs share their endpoint
    CHECK(intersection_multiplicity({ExactArc{q(0, 1), q(1, 2)}, ExactArc{q(1, 2), q(9, 10)}}) == 2);
    // three arcs stabbed by one point
    CHECK(intersection_multiplicity({ExactArc{q(1, 10), q(1, 2)}, ExactArc{q(2, 10), q(6, 10)},
                                     ExactArc{q(3, 10), q(7, 10)}}) == 3);
    // pairwise disjoint
    CHECK(intersection_multiplicity({ExactArc{q(0, 1), q(1, 10)}, ExactArc{q(2, 10), q(3, 10)},
                                     ExactArc{q(4, 10), q(5, 10)}}) == 1);
    // wrapping arc overlaps both sides of the seam
    CHECK(intersection_multiplicity({ExactArc{q(9, 10), q(1, 10)}, ExactArc{q(0, 1), q(1, 20)}}) == 2);
    CHECK(intersection_multiplicity({ExactArc{q(9, 10), q(1, 10)}, ExactArc{q(1, 2), q(6, 10)}}) == 1);
    // degenerate point arc on another arc's endpoint
    CHECK(intersection_multiplicity({ExactArc{q(1, 4), q(1, 4)}, ExactArc{q(1, 4), q(1, 2)}}) == 2);
    (void)z;
}

TEST_CASE("numeric multiplicity merges near-equal endpoints") {
    CHECK(intersection_multiplicity({NumericArc{0.0, 0.5}, NumericArc{0.5 + 1e-14, 0.9}}, 1e-12) == 2);
    CHECK(intersection_multiplicity({NumericArc{0.0, 0.5}, NumericArc{0.5 + 1e-9, 0.9}}, 1e-12) == 1);
}

TEST_CASE("orbit translates of a gap arc satisfy the multiplicity bound") {
    auto g = AlphaHandle::golden();
    QField x = QField::integer(0);
    std::size_t n = 5;
    auto pts = orbit_prefix(g, x, g.convergent(n).q);
    std::sort(pts.begin(), pts.end());
    ExactArc T{pts[2], pts[3]};  // gap arc: interior avoids S_n by construction
    auto rep = im_bound_check(g, x, n, T);
    CHECK(rep.ok);
    CHECK(rep.a_n == 1);
    CHECK(rep.bound == 4);
    CHECK(rep.im >= 1);
    CHECK(rep.im <= 4);
}

TEST_CASE("im bound check rejects arcs that swallow scaffold points") {
    auto g = AlphaHandle::golden();
    QField x = QField::integer(0);
    auto pts = orbit_prefix(g, x, g.convergent(4).q);
    std::sort(pts.begin(), pts.end());
    ExactArc bad{pts[1], pts[3]};  // pts[2] is interior
    CHECK_THROWS_AS(im_bound_check(g, x, 4, bad), std::invalid_argument);
}

TEST_CASE("return interval endpoints and nesting") {
    auto g = AlphaHandle::golden();
    QField x(1, 3);
    for (std::size_t n = 1; n <= 6; ++n) {
        ExactArc in = return_interval(g, x, n);
        ExactArc outer = return_interval(g, x, n - 1);
        CHECK(arc_length(in) < arc_length(outer));
        CHECK(arc_contains(in, x.mod1()));
        // |I_n| = |q_n alpha - p_n|
        Convergent c = g.convergent(n);
        QField expect = g.value().mul_rational(c.q, 1) - QField::integer(c.p);
        if (expect.sign() < 0) expect = -expect;
        CHECK(arc_length(in) == expect);
    }
}
