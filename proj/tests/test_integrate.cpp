#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <rotorlab/integrate.hpp>

using namespace rotorlab;
using Catch::Approx;

namespace {

std::shared_ptr<BlownUpField> golden_strip() {
    AlphaHandle h = AlphaHandle::golden();
    return assemble_blowup(h, h.approx(), {Vec2{0.3, 0.6}}, {CellDirection::backward}, {0.02});
}

}  // namespace

TEST_CASE("linear flow integrates exactly and in both directions") {
    AlphaHandle h = AlphaHandle::golden();
    LinearFlowField lin(h);
    double beta = h.approx();

    auto fwd = integrate(lin, {0.2, 0.7}, 2.0);
    CHECK_FALSE(fwd.truncated);
    CHECK(fwd.z_end.x == Approx(2.2).margin(1e-13));
    CHECK(fwd.z_end.y == Approx(0.7 + 2.0 * beta).margin(1e-13));

    auto back = integrate(lin, {0.2, 0.7}, -1.5);
    CHECK(back.z_end.x == Approx(0.2 - 1.5).margin(1e-13));
    CHECK(back.z_end.y == Approx(0.7 - 1.5 * beta).margin(1e-13));

    CHECK(reversibility_defect(lin, {0.2, 0.7}, 5.0) < 1e-13);
}

TEST_CASE("forward-then-backward defect stays within ten times the tolerance") {
    auto f = golden_strip();
    Vec2 z0 = wrap01(Vec2{0.3, 0.6} + Vec2{-0.3, -f->base_slope() * 0.3});

    IntegrateOptions opt;  // default tol 1e-9
    for (double T : {0.5, 2.0, 5.0}) {
        double d = reversibility_defect(*f, z0, T, opt);
        CHECK(d < 10.0 * opt.tol);
    }

    IntegrateOptions tight;
    tight.tol = 1e-11;
    CHECK(reversibility_defect(*f, z0, 2.0, tight) < 10.0 * tight.tol);
}

TEST_CASE("vertical-section crossings of the linear flow form a rigid rotation") {
    AlphaHandle h = AlphaHandle::golden();
    LinearFlowField lin(h);
    auto L = TransverseLoop::vertical(0.0);

    Vec2 z{0.2, 0.7};
    auto first = next_crossing(lin, L, z);
    REQUIRE(first.has_value());
    CHECK(first->t == Approx(0.8).margin(1e-12));
    CHECK(std::fabs(wrap_half(first->z.x)) < 1e-10);
    CHECK(first->s == Approx(wrap01(0.7 + 0.8 * h.approx())).margin(1e-10));

    // Successive returns: unit return time, rotation by the slope.
    double s_prev = first->s;
    Vec2 zc = first->z;
    for (int i = 0; i < 3; ++i) {
        auto hit = next_crossing(lin, L, zc);
        REQUIRE(hit.has_value());
        CHECK(hit->t == Approx(1.0).margin(1e-12));
        CHECK(wrap01(hit->s - s_prev) == Approx(wrap01(h.approx())).margin(1e-10));
        s_prev = hit->s;
        zc = hit->z;
    }
}

TEST_CASE("orbits entering the trapping band are captured, neighbours pass") {
    auto f = golden_strip();
    Vec2 e = f->flow_dir(), n = f->normal_dir();
    auto L = TransverseLoop::vertical(0.0);
    IntegrateOptions opt;
    opt.capture_radius = 5e-4;
    opt.t_budget = 200.0;

    Vec2 trapped = wrap01(Vec2{0.3, 0.6} + (-0.3) * e + (-0.009) * n);
    OrbitSegment orb;
    auto hit = next_crossing(*f, L, trapped, opt, &orb);
    CHECK_FALSE(hit.has_value());
    CHECK(orb.captured);
    CHECK(orb.t_end < 5.0);

    Vec2 passing = wrap01(Vec2{0.3, 0.6} + (-0.3) * e + (0.012) * n);
    OrbitSegment orb2;
    auto hit2 = next_crossing(*f, L, passing, opt, &orb2);
    CHECK(hit2.has_value());
    CHECK_FALSE(orb2.captured);
}

TEST_CASE("unresolvable steps truncate instead of silently degrading") {
    auto f = golden_strip();
    Vec2 z0 = wrap01(Vec2{0.3, 0.6} + Vec2{-0.3, -f->base_slope() * 0.3});
    IntegrateOptions opt;
    opt.tol = 1e-16;
    opt.h_min = 0.02;
    opt.h_init = 0.02;
    opt.h_max = 0.02;
    auto seg = integrate(*f, z0, 1.0, opt);
    CHECK(seg.truncated);
    CHECK(seg.t_end < 1.0);
}

TEST_CASE("recorded orbits sample the polyline densely") {
    LinearFlowField lin(0.5);
    IntegrateOptions opt;
    opt.record = true;
    auto seg = integrate(lin, {0.0, 0.0}, 1.0, opt);
    REQUIRE(seg.points.size() >= 4);
    REQUIRE(seg.points.size() == seg.times.size());
    for (std::size_t i = 0; i < seg.points.size(); ++i) {
        CHECK(seg.points[i].x == Approx(seg.times[i]).margin(1e-12));
        CHECK(seg.points[i].y == Approx(0.5 * seg.times[i]).margin(1e-12));
    }
    CHECK(seg.times.back() == Approx(1.0));
}
