#include <catch2/catch_amalgamated.hpp>

#include "rotorlab/gap_map.hpp"

using namespace rotorlab;

namespace {
AlphaHandle golden() { return AlphaHandle::quadratic({0}, {1}); }

double circ_dist(double a, double b) {
    double d = frac(a - b);
    return std::min(d, 1.0 - d);
}
}  // namespace

TEST_CASE("two-sided gap system: structure and axioms") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 300);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    CHECK(m->kind() == "denjoy");
    REQUIRE(m->rotation_handle() != nullptr);
    CHECK_NOTHROW(check_lift_axioms(*m, 1500, 1e-9));
    CHECK(m->plateaus().empty());
    CHECK(m->jumps().empty());

    // tracked mass accounts for nearly the whole declared mass
    double total = 0.0;
    for (const auto& g : m->gaps_sorted()) total += g.length;
    CHECK(total == Catch::Approx(0.5).margin(1e-12));
    CHECK(m->sigma() == Catch::Approx(0.5).margin(1e-12));
    CHECK(m->tail_mass() < 1e-12);
}

TEST_CASE("two-sided gap system: each gap maps affinely onto its successor") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 300);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    double lambda = m->spec().lambda;
    for (i64 k = -5; k <= 5; ++k) {
        auto g = m->gap(0, k);
        auto gi = m->gap(0, k + 1);
        // left endpoint -> left endpoint, midpoint -> midpoint
        CHECK(circ_dist(eval(*m, g.left, Side::right), gi.left) < 1e-12);
        CHECK(circ_dist(eval(*m, g.left + 0.5 * g.length), gi.left + 0.5 * gi.length) <
              1e-12);
        double want = k >= 0 ? lambda : 1.0 / lambda;
        CHECK(derivative(*m, g.left + 0.5 * g.length) == Catch::Approx(want));
        CHECK(derivative(*m, g.left, Side::right) == Catch::Approx(want));
        CHECK(derivative(*m, g.left, Side::left) == 1.0);  // flanking stretch
    }
}

TEST_CASE("two-sided gap system: exact semiconjugacy onto the rotation") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 300);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    double a = golden().approx();
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        double x = (i + 0.5) / 2000.0;
        double y = frac(lift_eval(*m, x));
        double r = circ_dist(m->collapse(y), m->collapse(x) + a);
        worst = std::max(worst, r);
    }
    CHECK(worst < 1e-6);
    // the collapse inverts the cumulative mass function off the gaps
    CHECK(m->mass_function(m->collapse(0.123)) == Catch::Approx(0.123).margin(1e-9));
}

TEST_CASE("two-sided gap system: exact disjointness certificate over 1000 returns") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 1050);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    auto cert = certify_gap_disjointness(*m, -1000, 1000);
    CHECK(cert.ok);
    CHECK(cert.atoms_checked == 2001);
}

TEST_CASE("gap system constructors reject degenerate input") {
    CHECK_THROWS_AS(build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 1.7),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        build_denjoy(AlphaHandle::rational(2, 5), WeightRule::geometric, QField(1, 7), 0.5),
        std::invalid_argument);
    // zero weights: plain rotation
    auto r = build_denjoy(golden(), WeightRule::zero, QField(3, 10));
    CHECK(r->kind() == "rotation");
    // positionally smooth ratios are incompatible with two-sided summability
    GapSystemSpec bad;
    bad.handle = golden();
    bad.kind = GapKind::two_sided;
    bad.rule = WeightRule::smooth_ratio;
    bad.families = {{QField(3, 10), 0.5}};
    CHECK_THROWS_AS(GapMap(bad), std::invalid_argument);
}

TEST_CASE("two-sided gap system with slowly decaying weights") {
    auto f = build_denjoy(golden(), WeightRule::inverse_quadratic, QField(3, 10), 0.5, 400);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    CHECK_NOTHROW(check_lift_axioms(*m, 1200, 1e-9));
    CHECK(m->tail_mass() > 1e-5);  // genuinely heavy tail at this window
    double a = golden().approx();
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        double x = (i + 0.5) / 500.0;
        double y = frac(lift_eval(*m, x));
        worst = std::max(worst, circ_dist(m->collapse(y), m->collapse(x) + a));
    }
    CHECK(worst < 5e-3);  // reduced accuracy, documented consequence of the tail
}

TEST_CASE("backward chain: continuous map with a flat plateau") {
    GapSystemSpec spec;
    spec.handle = golden();
    spec.kind = GapKind::backward_chain;
    spec.rule = WeightRule::smooth_ratio;
    spec.families = {{QField(3, 10), 0.85}};
    spec.window = 300;
    auto m = std::make_shared<GapMap>(spec);
    CHECK(m->kind() == "cherry-plateau");
    CHECK_NOTHROW(check_lift_axioms(*m, 1500, 1e-9));
    CHECK(m->jumps().empty());

    auto ps = m->plateaus();
    REQUIRE(ps.size() == 1);
    auto g0 = m->gap(0, 0);
    CHECK(ps[0].lo == Catch::Approx(g0.left));
    CHECK(ps[0].length() == Catch::Approx(g0.length));
    // flat on the plateau, and continuous across its endpoints
    double v = lift_eval(*m, ps[0].lo + 0.5 * ps[0].length());
    CHECK(lift_eval(*m, ps[0].lo + 0.1 * ps[0].length()) == Catch::Approx(v));
    CHECK(lift_eval(*m, ps[0].lo + 0.9 * ps[0].length()) == Catch::Approx(v));
    CHECK(derivative(*m, ps[0].lo + 0.3 * ps[0].length()) == 0.0);
    CHECK(lift_eval(*m, ps[0].lo - 1e-9) == Catch::Approx(v).margin(1e-8));
    CHECK(lift_eval(*m, ps[0].hi + 1e-9) == Catch::Approx(v).margin(1e-8));

    // backward gaps march onto their successors with the smooth ratio
    for (i64 k = -4; k < 0; ++k) {
        auto g = m->gap(0, k);
        double z = m->gap(0, k).z;
        double want = smooth_ratio_model(z, spec.delta, spec.beta);
        CHECK(derivative(*m, g.left + 0.5 * g.length) == Catch::Approx(want).margin(1e-12));
        auto gi = m->gap(0, k + 1);
        CHECK(circ_dist(eval(*m, g.left, Side::right), gi.left) < 1e-12);
    }
}

TEST_CASE("forward chain: strictly increasing map with one jump") {
    GapSystemSpec spec;
    spec.handle = golden();
    spec.kind = GapKind::forward_chain;
    spec.rule = WeightRule::smooth_ratio;
    spec.families = {{QField(3, 10), 0.4}};
    spec.window = 300;
    auto m = std::make_shared<GapMap>(spec);
    CHECK(m->kind() == "cherry-jump");
    CHECK_NOTHROW(check_lift_axioms(*m, 1500, 1e-9));
    CHECK(m->plateaus().empty());

    auto js = m->jumps();
    REQUIRE(js.size() == 1);
    auto g0 = m->gap(0, 0);
    CHECK(js[0].gap() == Catch::Approx(g0.length));
    // the jump spans exactly the index-0 gap
    CHECK(circ_dist(frac(js[0].lower), g0.left) < 1e-12);
    CHECK(circ_dist(frac(js[0].upper), g0.left + g0.length) < 1e-12);
    double lo = m->lift(js[0].at, Side::left), hi = m->lift(js[0].at, Side::right);
    CHECK(hi - lo == Catch::Approx(g0.length).margin(1e-12));
    CHECK_THROWS_AS(lift_eval(*m, js[0].at), std::invalid_argument);
    // forward gaps shrink by the smooth ratio
    for (i64 k = 0; k <= 4; ++k) {
        auto g = m->gap(0, k);
        double want = 1.0 / smooth_ratio_model(g.z, spec.delta, spec.beta);
        CHECK(derivative(*m, g.left + 0.5 * g.length) == Catch::Approx(want).margin(1e-12));
        CHECK(want < 1.0);
    }
}

TEST_CASE("evaluation beyond the tracked window is refused, not faked") {
    auto f = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 64);
    auto* m = dynamic_cast<const GapMap*>(f.get());
    REQUIRE(m != nullptr);
    auto ge = m->gap(0, m->k_max(0));
    CHECK_THROWS_AS(m->lift(ge.left, Side::right), std::invalid_argument);
}

TEST_CASE("plateau placement: prescribed arcs are realized") {
    auto m = build_cherry_return(golden(), {{0.55, 0.60}}, 300);
    auto ps = m->plateaus();
    REQUIRE(ps.size() == 1);
    CHECK(ps[0].lo == Catch::Approx(0.55).margin(1e-6));
    CHECK(ps[0].length() == Catch::Approx(0.05).margin(1e-6));

    // plateau over the gap arc of a two-sided construction
    auto d = build_denjoy(golden(), WeightRule::geometric, QField(3, 10), 0.5, 300);
    auto* dm = dynamic_cast<const GapMap*>(d.get());
    auto g0 = dm->gap(0, 0);
    auto c = build_cherry_return(golden(), {{g0.left, g0.left + g0.length}}, 300);
    auto cps = c->plateaus();
    REQUIRE(cps.size() == 1);
    CHECK(cps[0].lo == Catch::Approx(g0.left).margin(1e-6));
    CHECK(cps[0].length() == Catch::Approx(g0.length).margin(1e-6));

    // two plateaus, solved jointly
    auto m2 = build_cherry_return(golden(), {{0.2, 0.22}, {0.55, 0.6}}, 200);
    auto ps2 = m2->plateaus();
    REQUIRE(ps2.size() == 2);
    CHECK(ps2[0].lo == Catch::Approx(0.2).margin(1e-6));
    CHECK(ps2[1].lo == Catch::Approx(0.55).margin(1e-6));
    auto* gm2 = dynamic_cast<const GapMap*>(m2.get());
    REQUIRE(gm2 != nullptr);
    auto cert = certify_gap_disjointness(*gm2, -60, 0);
    CHECK(cert.ok);
    CHECK(cert.atoms_checked == 122);

    // empty prescription degenerates to a strictly increasing homeomorphism
    auto e = build_cherry_return(golden(), {});
    CHECK(e->plateaus().empty());
    CHECK(e->jumps().empty());
    CHECK_NOTHROW(check_lift_axioms(*e, 800, 1e-10));
    CHECK(derivative(*e, 0.37) == Catch::Approx(1.0));
}

TEST_CASE("plateau placement rejects impossible prescriptions") {
    CHECK_THROWS_AS(build_cherry_return(golden(), {{0.1, 0.3}, {0.2, 0.4}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_cherry_return(golden(), {{0.0, 0.6}, {0.6, 1.0}}),
                    std::invalid_argument);
    // arcs short of covering the circle can still exhaust it through their chains
    CHECK_THROWS_AS(build_cherry_return(golden(), {{0.1, 0.35}}), std::invalid_argument);
}
