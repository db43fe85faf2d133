#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numbers>
#include <rotorlab/gap_map.hpp>
#include <rotorlab/variation.hpp>
#include <vector>

#include "test_support.hpp"

using namespace rotorlab;
using rotorlab::testing::OscillatoryMap;

namespace {

AlphaHandle golden() { return AlphaHandle::golden(); }

}  // namespace

TEST_CASE("variation: rigid rotation carries none") {
    RigidRotation r(0.3741);
    auto rep = variation_log_derivative(r);
    CHECK(rep.V == 0.0);
    CHECK(rep.finite);
    CHECK(!rep.partition_witness.empty());
}

TEST_CASE("variation: two-slope map sums the cyclic log-slope swings") {
    // slopes 2 on [0, 1/3) and 1/2 on [1/3, 1): one full up-down cycle
    auto f = PwaMap::continuous({{0.0, 0.05}, {1.0 / 3.0, 0.05 + 2.0 / 3.0}});
    CHECK(derivative(*f, 0.1) == Catch::Approx(2.0));
    CHECK(derivative(*f, 0.7) == Catch::Approx(0.5));
    auto rep = variation_log_derivative(*f);
    CHECK(rep.finite);
    CHECK(rep.V == Catch::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("variation: gap system equals the structural bridge-slope sum") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 64);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    auto rep = variation_log_derivative(*m);
    CHECK(rep.finite);
    // every tracked gap sits between rigid stretches, so it contributes twice
    // the magnitude of its log bridge slope
    double expect = 0.0;
    for (i64 k = m->k_min(0); k <= m->k_max(0); ++k)
        expect += 2.0 * std::abs(std::log(m->ratio(0, k)));
    CHECK(rep.V == Catch::Approx(expect).epsilon(1e-10));
    CHECK(rep.V == Catch::Approx(129.0 * 2.0 * std::log(1.0 / 0.6)).epsilon(1e-10));
}

TEST_CASE("variation: smooth-ratio chain matches the independent atom sum") {
    auto m = build_cherry_jump(golden(), QField(1, 7), 0.4, 96);
    auto rep = variation_log_derivative(*m);
    CHECK(rep.finite);
    double alpha = golden().approx(), delta = m->spec().delta, beta = m->spec().beta;
    double expect = 0.0;
    for (i64 k = 0; k <= 96; ++k) {
        double z = frac(1.0 / 7.0 + k * alpha);
        expect += 2.0 * (delta + beta * std::cos(2.0 * std::numbers::pi * z));
    }
    CHECK(rep.V == Catch::Approx(expect).epsilon(1e-9));
}

TEST_CASE("variation: plateau interiors are outside the support") {
    auto m = build_cherry_return(golden(), {{0.55, 0.60}}, 200);
    auto rep = variation_log_derivative(*m);
    CHECK(rep.finite);
    CHECK(rep.V > 0.0);
    for (double x : rep.partition_witness)
        CHECK_FALSE((x > 0.55 + 1e-9 && x < 0.60 - 1e-9));
}

TEST_CASE("variation: oscillatory derivative is flagged as not settling") {
    OscillatoryMap f;
    CHECK_NOTHROW(check_lift_axioms(f, 500, 1e-6));
    auto rep = variation_log_derivative(f);
    CHECK_FALSE(rep.finite);
    CHECK(rep.V > 100.0);
}

TEST_CASE("variation: invariant under rigid rotation conjugacy") {
    // piecewise-affine map conjugated by R_c: shift every node by c
    double c = 0.2351;
    auto f = PwaMap::continuous({{0.0, 0.05}, {1.0 / 3.0, 0.05 + 2.0 / 3.0}});
    auto g = PwaMap::continuous(
        {{c, 0.05 + c}, {1.0 / 3.0 + c, 0.05 + 2.0 / 3.0 + c}});
    auto rf = variation_log_derivative(*f);
    auto rg = variation_log_derivative(*g);
    CHECK(rf.V == Catch::Approx(rg.V).margin(1e-8));

    // gap system in a rotated chart (same system, conjugated presentation)
    GapSystemSpec s1;
    s1.handle = golden();
    s1.kind = GapKind::two_sided;
    s1.rule = WeightRule::inverse_quadratic;
    s1.families = {{QField(3, 10), 0.5}};
    s1.window = 64;
    GapSystemSpec s2 = s1;
    s2.chart_offset = 0.37;
    GapMap m1(s1), m2(s2);
    auto r1 = variation_log_derivative(m1);
    auto r2 = variation_log_derivative(m2);
    CHECK(r1.finite);
    CHECK(r1.V == Catch::Approx(r2.V).margin(1e-8));
}
