#include <catch_amalgamated.hpp>

#include "orthant/oracle.hpp"
#include "test_helpers.hpp"

using namespace orthant;
using testutil::make_q5;

namespace {

/// The five-orthant chain of the worked support example: axes e0..e6 are
/// 0..6 and f2..f6 are 7..11.  Helly on the interval structure makes the
/// downward closure flag-clean.
OrthantSpace make_chain_space() {
    return OrthantSpace(12, {
                                AxisSet{0, 1, 2, 3, 4, 5, 6},     // O0
                                AxisSet{0, 1, 7, 3, 4, 5, 6},     // O1
                                AxisSet{0, 1, 7, 8, 5, 6},        // O2
                                AxisSet{0, 1, 7, 8, 9, 6},        // O3
                                AxisSet{0, 1, 7, 8, 9, 10, 11},   // O4
                            });
}

}  // namespace

TEST_CASE("k=0 support validates for points in one closed orthant") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 0.5}});
    const Point b(q5, {{1, 2.0}});
    const GeodesicSupport s{{AxisSet{0, 1}}, {AxisSet{0, 1}}};
    CHECK(validate_support(q5, a, b, s));
}

TEST_CASE("validate_support rejects malformed supports") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const Point b(q5, {{2, 1.0}, {3, 1.0}});
    // Wrong A0.
    CHECK_THROWS_AS(
        validate_support(q5, a, b,
                         GeodesicSupport{{AxisSet{0}, AxisSet{1}},
                                         {AxisSet{0}, AxisSet{2, 3}}}),
        MalformedSupport);
    // Empty leg.
    CHECK_THROWS_AS(
        validate_support(q5, a, b,
                         GeodesicSupport{{AxisSet{}, AxisSet{0, 1}, AxisSet{}},
                                         {AxisSet{}, AxisSet{2}, AxisSet{3}}}),
        MalformedSupport);
    // Carrier orthant not a stratum.
    CHECK_THROWS_AS(
        validate_support(q5, a, b,
                         GeodesicSupport{{AxisSet{}, AxisSet{1}, AxisSet{0}},
                                         {AxisSet{}, AxisSet{3}, AxisSet{2}}}),
        MalformedSupport);
}

TEST_CASE("ratio-violating support is invalid") {
    const OrthantSpace q5 = make_q5();
    // Ratios 1/1 then 1/2 decrease, so the two-leg support fails (i).
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const Point b(q5, {{2, 1.0}, {3, 2.0}});
    const GeodesicSupport split{{AxisSet{}, AxisSet{0}, AxisSet{1}},
                                {AxisSet{}, AxisSet{2}, AxisSet{3}}};
    CHECK_FALSE(validate_support(q5, a, b, split));
    const GeodesicSupport merged{{AxisSet{}, AxisSet{0, 1}},
                                 {AxisSet{}, AxisSet{2, 3}}};
    CHECK(validate_support(q5, a, b, merged));
}

TEST_CASE("exactly one candidate support validates") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const Point b(q5, {{2, 2.0}, {3, 1.0}});
    // Enumerate all admissible (A,B) shapes by hand: one or two legs.
    int valid = 0;
    std::vector<GeodesicSupport> candidates;
    candidates.push_back({{AxisSet{}, AxisSet{0, 1}}, {AxisSet{}, AxisSet{2, 3}}});
    for (int a1 : {0, 1})
        for (int b1 : {2, 3})
            candidates.push_back(
                {{AxisSet{}, AxisSet{a1}, AxisSet{1 - a1}},
                 {AxisSet{}, AxisSet{b1}, AxisSet{5 - b1}}});
    for (auto& s : candidates) {
        try {
            if (validate_support(q5, a, b, s)) ++valid;
        } catch (const MalformedSupport&) {
        }
    }
    CHECK(valid == 1);
    CHECK(find_support(q5, a, b) ==
          GeodesicSupport{{AxisSet{}, AxisSet{0}, AxisSet{1}},
                          {AxisSet{}, AxisSet{2}, AxisSet{3}}});
}

TEST_CASE("worked chain example reproduces the published support") {
    const OrthantSpace chain = make_chain_space();
    // Coordinates chosen so the leg ratios increase strictly.
    const Point x1(chain, {{0, 1.0},
                           {1, 1.0},
                           {2, 1.0},
                           {3, 2.0},
                           {4, 2.0},
                           {5, 4.0},
                           {6, 6.0}});
    const Point x2(chain, {{0, 2.0},
                           {1, 0.5},
                           {7, 4.0},
                           {8, 4.0},
                           {9, 4.0},
                           {10, 2.8},
                           {11, 2.8}});
    const GeodesicSupport s = find_support(chain, x1, x2);
    REQUIRE(s.k() == 4);
    CHECK(s.A[0] == AxisSet{0, 1});
    CHECK(s.B[0] == AxisSet{0, 1});
    CHECK(s.A[1] == AxisSet{2});
    CHECK(s.B[1] == AxisSet{7});
    CHECK(s.A[2] == AxisSet{3, 4});
    CHECK(s.B[2] == AxisSet{8});
    CHECK(s.A[3] == AxisSet{5});
    CHECK(s.B[3] == AxisSet{9});
    CHECK(s.A[4] == AxisSet{6});
    CHECK(s.B[4] == AxisSet{10, 11});
    for (int i = 0; i <= 4; ++i) CHECK(chain.is_stratum(s.carrier_orthant(i)));
}

TEST_CASE("support of a point with itself and with the cone point") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const GeodesicSupport self = find_support(q5, a, a);
    CHECK(self.k() == 0);
    CHECK(self.A[0] == AxisSet{0, 1});

    const Point o = Point::cone_point(q5);
    const GeodesicSupport from_o = find_support(q5, o, a);
    CHECK(from_o.k() == 0);
    CHECK(from_o.A[0] == AxisSet{0, 1});
}

TEST_CASE("single-leg support through the light-grey regime") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const Point b(q5, {{2, 1.0}, {3, 2.0}});
    const GeodesicSupport s = find_support(q5, a, b);
    REQUIRE(s.k() == 1);
    CHECK(s.A[1] == AxisSet{0, 1});
    CHECK(s.B[1] == AxisSet{2, 3});
    CHECK(distance(q5, a, b) ==
          Catch::Approx(std::sqrt(2.0) + std::sqrt(5.0)).epsilon(1e-12));
}

TEST_CASE("distance inside one closed orthant is Euclidean") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 0.5}});
    const Point b(q5, {{0, 0.25}, {1, 2.5}});
    CHECK(distance(q5, a, b) ==
          Catch::Approx(std::hypot(0.75, 2.0)).epsilon(1e-14));
}

TEST_CASE("two-atom geometry through the cone point has length 2r") {
    const OrthantSpace q5 = make_q5();
    const double r = 1.0, alpha = 3.14159265358979323846 / 6;
    const Point p1 = testutil::example4_p1(q5, r, alpha);
    const Point p2 = testutil::example4_p2(q5, r, alpha);
    CHECK(distance(q5, p1, p2) == Catch::Approx(2.0 * r).epsilon(1e-12));
    CHECK(brute_force_distance(q5, p1, p2, 3) ==
          Catch::Approx(2.0 * r).epsilon(1e-9));

    const Point mid = eval_geodesic(q5, p1, p2, 0.5);
    CHECK(mid.is_cone_point());
}

TEST_CASE("eval_geodesic endpoints, midpoint, and range check") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 0.5}});
    const Point b(q5, {{0, 0.2}, {1, 1.5}});
    CHECK(eval_geodesic(q5, a, b, 0.0) == a);
    CHECK(eval_geodesic(q5, a, b, 1.0) == b);
    const Point mid = eval_geodesic(q5, a, b, 0.5);
    CHECK(mid.coord(0) == Catch::Approx(0.6));
    CHECK(mid.coord(1) == Catch::Approx(1.0));
    CHECK_THROWS_AS(eval_geodesic(q5, a, b, 1.5), ParameterOutOfRange);
    CHECK_THROWS_AS(eval_geodesic(q5, a, b, -0.1), ParameterOutOfRange);
}

TEST_CASE("geodesic breakpoints lie on the transition faces") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 1.0}});
    const Point b(q5, {{1, 0.4}, {2, 1.3}});
    const Geodesic g = make_geodesic(q5, a, b);
    REQUIRE(g.breakpoints.size() == static_cast<size_t>(g.support.k()));
    double prev = 0;
    for (auto& [t, pt] : g.breakpoints) {
        CHECK(t > prev);
        prev = t;
        CHECK((g.support.carrier_orthant(0) | g.support.carrier_orthant(1))
                  .contains(pt.support()));
    }
    CHECK(g.length == Catch::Approx(distance(q5, a, b)));
}

TEST_CASE("oracle handles basic cases") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 0.5}});
    const Point b(q5, {{0, 0.25}, {1, 2.5}});
    CHECK(brute_force_distance(q5, a, b, 1) ==
          Catch::Approx(std::hypot(0.75, 2.0)).epsilon(1e-12));
    const Point c(q5, {{2, 1.0}, {3, 2.0}});
    const double d1 = brute_force_distance(q5, a, c, 3);
    const double d2 = brute_force_distance(q5, c, a, 3);
    CHECK(d1 == Catch::Approx(d2).margin(1e-9));
    CHECK(d1 == Catch::Approx(distance(q5, a, c)).margin(1e-6));
    // Too short a carrier cap cannot certify anything.
    const Point p1 = testutil::example4_p1(q5, 1.0, 0.5);
    const Point p2 = testutil::example4_p2(q5, 1.0, 0.5);
    CHECK_THROWS_AS(brute_force_distance(q5, p1, p2, 1), BudgetExceeded);
    CHECK_THROWS_AS(brute_force_distance(q5, p1, p2, 3, 5), BudgetExceeded);
}

TEST_CASE("support reversal symmetry and distance symmetry") {
    const OrthantSpace s = testutil::make_random_dim3_space(8, 5);
    CounterRng rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const Point a = testutil::random_point(s, rng);
        const Point b = testutil::random_point(s, rng);
        const GeodesicSupport fwd = find_support(s, a, b);
        const GeodesicSupport bwd = find_support(s, b, a);
        CHECK(fwd.reversed() == bwd);
        CHECK(distance(s, a, b) ==
              Catch::Approx(distance(s, b, a)).margin(1e-12));
    }
}

TEST_CASE("oracle agreement on random pairs") {
    const OrthantSpace q5 = make_q5();
    CounterRng rng(7);
    for (int trial = 0; trial < 60; ++trial) {
        const Point a = testutil::random_point(q5, rng);
        const Point b = testutil::random_point(q5, rng);
        const double d = distance(q5, a, b);
        const double o = brute_force_distance(q5, a, b, 3);
        CHECK(std::abs(d - o) <= 1e-6);
    }
    const OrthantSpace s = testutil::make_random_dim3_space(7, 21);
    for (int trial = 0; trial < 40; ++trial) {
        const Point a = testutil::random_point(s, rng);
        const Point b = testutil::random_point(s, rng);
        const double d = distance(s, a, b);
        const double o = brute_force_distance(s, a, b, 4);
        CHECK(std::abs(d - o) <= 1e-6);
    }
}

TEST_CASE("triangle inequality and CAT(0) midpoint comparison") {
    const OrthantSpace s = testutil::make_random_dim3_space(8, 31);
    CounterRng rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const Point a = testutil::random_point(s, rng);
        const Point b = testutil::random_point(s, rng);
        const Point c = testutil::random_point(s, rng);
        const double ab = distance(s, a, b);
        const double ac = distance(s, a, c);
        const double bc = distance(s, b, c);
        CHECK(ab <= ac + bc + 1e-9);

        const Point m = eval_geodesic(s, a, b, 0.5);
        const double mc = distance(s, m, c);
        CHECK(mc * mc <=
              0.5 * ac * ac + 0.5 * bc * bc - 0.25 * ab * ab + 1e-9);
    }
}

TEST_CASE("segment additivity along the geodesic") {
    const OrthantSpace s = testutil::make_random_dim3_space(8, 77);
    CounterRng rng(3);
    for (int trial = 0; trial < 40; ++trial) {
        const Point a = testutil::random_point(s, rng);
        const Point b = testutil::random_point(s, rng);
        const double d = distance(s, a, b);
        for (double t : {0.125, 0.25, 0.5, 0.75, 0.875}) {
            const Point g = eval_geodesic(s, a, b, t);
            CHECK(distance(s, a, g) + distance(s, g, b) ==
                  Catch::Approx(d).margin(1e-9));
            CHECK(distance(s, a, g) == Catch::Approx(t * d).margin(1e-9));
        }
    }
}

TEST_CASE("distance scales linearly") {
    const OrthantSpace q5 = make_q5();
    CounterRng rng(55);
    for (int trial = 0; trial < 50; ++trial) {
        const Point a = testutil::random_point(q5, rng);
        const Point b = testutil::random_point(q5, rng);
        const double d = distance(q5, a, b);
        for (double lam : {0.35, 2.0, 7.5})
            CHECK(distance(q5, a.scaled(lam), b.scaled(lam)) ==
                  Catch::Approx(lam * d).epsilon(1e-12));
    }
}
