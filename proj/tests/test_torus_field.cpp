#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <rotorlab/torus_field.hpp>

using namespace rotorlab;
using Catch::Approx;
using Catch::Matchers::ContainsSubstring;

namespace {

std::shared_ptr<BlownUpField> one_strip(CellDirection kind) {
    AlphaHandle h = AlphaHandle::golden();
    return assemble_blowup(h, h.approx(), {Vec2{0.3, 0.6}}, {kind}, {0.02});
}

const Singularity& find_kind(const std::vector<Singularity>& ss, SingKind k) {
    for (const auto& s : ss)
        if (s.kind == k) return s;
    FAIL("no singularity of the requested kind");
    return ss.front();
}

}  // namespace

TEST_CASE("sink-type strip carries exactly a saddle and an attractor") {
    auto f = one_strip(CellDirection::backward);
    auto ss = f->singularities();
    REQUIRE(ss.size() == 2);

    const auto& saddle = find_kind(ss, SingKind::saddle);
    CHECK(saddle.hyperbolic);
    CHECK(saddle.divergence == 0.0);  // conservative core: trace vanishes bitwise
    CHECK_FALSE(std::signbit(saddle.divergence));
    CHECK(saddle.zero_divergence);

    std::size_t n_attract = 0;
    for (const auto& s : ss)
        if (is_attractor(s)) {
            ++n_attract;
            CHECK(s.divergence < -100.0);
            CHECK(s.hyperbolic);
            CHECK_FALSE(s.zero_divergence);
        }
    CHECK(n_attract == 1);

    for (const auto& s : ss) {
        CHECK(norm(f->at(s.position)) < 1e-10);
        CHECK(torus_dist(s.position, Vec2{0.3, 0.6}) < 0.05);
    }
}

TEST_CASE("source-type strip mirrors the attractor into a repellor") {
    auto f = one_strip(CellDirection::forward);
    auto ss = f->singularities();
    REQUIRE(ss.size() == 2);

    const auto& saddle = find_kind(ss, SingKind::saddle);
    CHECK(saddle.divergence == 0.0);
    CHECK(saddle.zero_divergence);

    std::size_t n_repel = 0;
    for (const auto& s : ss)
        if (is_repellor(s)) {
            ++n_repel;
            CHECK(s.divergence > 100.0);
        }
    CHECK(n_repel == 1);
}

TEST_CASE("field is exactly linear away from its strips") {
    auto f = one_strip(CellDirection::backward);
    const double beta = f->base_slope();
    for (Vec2 z : {Vec2{0.05, 0.1}, Vec2{0.8, 0.9}, Vec2{0.6, 0.2}, Vec2{0.05, 0.62}}) {
        REQUIRE(torus_dist(z, Vec2{0.3, 0.6}) > 0.2);
        Vec2 v = f->at(z);
        CHECK(v.x == 1.0);
        CHECK(v.y == beta);
        CHECK(f->divergence_at(z) == 0.0);
        auto J = f->jacobian_at(z);
        for (double e : J) CHECK(e == 0.0);
    }
}

TEST_CASE("jets agree with finite differences inside a strip") {
    auto f = one_strip(CellDirection::backward);
    Vec2 e = f->flow_dir(), n = f->normal_dir();
    const double fd = 1e-5;
    for (double along : {-0.04, 0.0, 0.03}) {
        for (double across : {-0.008, 0.004}) {
            Vec2 z = wrap01(Vec2{0.3, 0.6} + along * e + across * n);
            auto J = f->jacobian_at(z);
            for (int comp = 0; comp < 2; ++comp) {
                auto pick = [&](const Vec2& v) { return comp == 0 ? v.x : v.y; };
                double dx =
                    (pick(f->at(wrap01(z + Vec2{fd, 0}))) - pick(f->at(wrap01(z + Vec2{-fd, 0})))) /
                    (2 * fd);
                double dy =
                    (pick(f->at(wrap01(z + Vec2{0, fd}))) - pick(f->at(wrap01(z + Vec2{0, -fd})))) /
                    (2 * fd);
                CHECK(dx == Approx(J[comp * 2 + 0]).margin(2e-2).epsilon(5e-4));
                CHECK(dy == Approx(J[comp * 2 + 1]).margin(2e-2).epsilon(5e-4));
            }
            CHECK(f->divergence_at(z) == Approx(J[0] + J[3]).margin(1e-9));
        }
    }
}

TEST_CASE("listed singularities are the only zeros on the torus") {
    auto f = one_strip(CellDirection::backward);
    double floor_seen = verify_listed_zeros(*f, 256, 1e-6);
    CHECK(floor_seen > 1e-2);
}

TEST_CASE("ill-posed strip layouts are rejected") {
    AlphaHandle h = AlphaHandle::golden();
    double beta = h.approx();

    SECTION("overlapping strips") {
        CHECK_THROWS_WITH(assemble_blowup(h, beta, {Vec2{0.3, 0.6}, Vec2{0.3, 0.61}},
                                          {CellDirection::backward, CellDirection::backward},
                                          {0.02, 0.02}),
                          ContainsSubstring("overlap"));
    }
    SECTION("seeds on one base orbit") {
        Vec2 a{0.3, 0.6};
        Vec2 b = a + Vec2{0.25, beta * 0.25};
        CHECK_THROWS_WITH(assemble_blowup(h, beta, {a, b},
                                          {CellDirection::backward, CellDirection::backward},
                                          {0.02, 0.02}),
                          ContainsSubstring("same base orbit"));
    }
    SECTION("mismatched argument lengths") {
        CHECK_THROWS_WITH(
            assemble_blowup(h, beta, {Vec2{0.3, 0.6}}, {CellDirection::backward}, {0.02, 0.02}),
            ContainsSubstring("equal length"));
    }
    SECTION("absurd strip width") {
        CHECK_THROWS_AS(
            assemble_blowup(h, beta, {Vec2{0.3, 0.6}}, {CellDirection::backward}, {0.3}),
            std::invalid_argument);
    }
}

TEST_CASE("mixed strip kinds set the contra-directed flag") {
    AlphaHandle h = AlphaHandle::golden();
    double beta = h.approx();
    auto mixed = assemble_blowup(h, beta, {Vec2{0.3, 0.6}, Vec2{0.8, 0.25}},
                                 {CellDirection::backward, CellDirection::forward}, {0.02, 0.02});
    CHECK(mixed->contra_directed());
    CHECK(mixed->singularities().size() == 4);

    auto pure = assemble_blowup(h, beta, {Vec2{0.3, 0.6}, Vec2{0.8, 0.25}},
                                {CellDirection::backward, CellDirection::backward}, {0.02, 0.02});
    CHECK_FALSE(pure->contra_directed());
    CHECK_FALSE(one_strip(CellDirection::backward)->contra_directed());
}

TEST_CASE("empty strip list reduces to the linear flow") {
    AlphaHandle h = AlphaHandle::golden();
    auto f = assemble_blowup(h, h.approx(), {}, {}, {});
    CHECK(f->singularities().empty());
    Vec2 v = f->at({0.123, 0.456});
    CHECK(v.x == 1.0);
    CHECK(v.y == h.approx());
    CHECK(jet_norm_distance(*f, LinearFlowField(h), 4, 16) == 0.0);
}

TEST_CASE("vertical transverse loop geometry") {
    auto L = TransverseLoop::vertical(0.25);
    CHECK(L.is_vertical());
    CHECK(L.homology() == std::pair<int, int>{0, 1});
    CHECK(L.length() == 1.0);
    Vec2 p = L.point(0.3);
    CHECK(p.x == Approx(0.25));
    CHECK(p.y == Approx(0.3));
    CHECK(L.tangent(0.9).x == 0.0);
    CHECK(L.tangent(0.9).y == 1.0);

    auto loc = L.locate({0.3, 0.7});
    CHECK(loc.s == Approx(0.7));
    CHECK(loc.dist == Approx(0.05));
    CHECK(L.locate({0.2, 0.1}).dist == Approx(-0.05));

    LinearFlowField lin(AlphaHandle::golden());
    CHECK(transversality_margin(lin, L) == Approx(1.0));
}

TEST_CASE("polyline loop locate and transversality") {
    // A horizontal (1,0) loop at height 0.37.
    auto L = TransverseLoop::polyline({{0.0, 0.37}, {0.4, 0.37}, {0.8, 0.37}}, {1, 0});
    CHECK(L.length() == Approx(1.0));
    // Above a rightward horizontal curve lies on the negative side.
    CHECK(L.locate({0.2, 0.40}).dist == Approx(-0.03));
    CHECK(L.locate({0.2, 0.34}).dist == Approx(0.03));
    CHECK(L.locate({0.6, 0.37}).s == Approx(0.6));

    LinearFlowField lin(0.25);
    CHECK(transversality_margin(lin, L) == Approx(0.25));

    // A contractible square cannot be transverse to a non-vanishing field.
    auto square = TransverseLoop::polyline(
        {{0.1, 0.1}, {0.2, 0.1}, {0.2, 0.2}, {0.1, 0.2}}, {0, 0});
    CHECK_THROWS_WITH(transversality_margin(lin, square), ContainsSubstring("tangent"));
}

TEST_CASE("jet distance separates fields and vanishes on identity") {
    LinearFlowField a(0.5), b(0.625);
    CHECK(jet_norm_distance(a, a, 4, 8) == 0.0);
    CHECK(jet_norm_distance(a, b, 4, 8) == Approx(0.125));

    auto f = one_strip(CellDirection::backward);
    LinearFlowField base(f->base_slope());
    CHECK(jet_norm_distance(*f, base, 0, 64) > 0.1);   // value-level deviation
    CHECK(jet_norm_distance(*f, base, 4, 64) > 1e4);   // high derivatives dominate
}
