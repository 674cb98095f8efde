#include <catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace orthant;
using testutil::make_q5;

TEST_CASE("build_space closes Q5 downward") {
    const OrthantSpace q5 = make_q5();
    CHECK(q5.ambient_dim() == 5);
    CHECK(q5.max_dim() == 2);
    // 5 two-dim + 5 one-dim + cone point
    CHECK(q5.strata().size() == 11);
    CHECK(q5.is_stratum(AxisSet{}));
    CHECK(q5.is_stratum(AxisSet{0}));
    CHECK(q5.is_stratum(AxisSet{4, 0}));
    CHECK_FALSE(q5.is_stratum(AxisSet{0, 2}));
}

TEST_CASE("build_space on a full simplex") {
    const OrthantSpace s(3, {AxisSet{0, 1, 2}});
    CHECK(s.strata().size() == 8);
    CHECK(s.max_dim() == 3);
}

TEST_CASE("flag violation reports the offending orthant") {
    try {
        OrthantSpace s(3, {AxisSet{0, 1}, AxisSet{1, 2}, AxisSet{0, 2}});
        FAIL("expected FlagViolation");
    } catch (const FlagViolation& e) {
        CHECK(AxisSet(e.offending_mask) == AxisSet{0, 1, 2});
    }
}

TEST_CASE("axis out of range is rejected") {
    CHECK_THROWS_AS(OrthantSpace(3, {AxisSet{0, 5}}), AxisOutOfRange);
}

TEST_CASE("compatibility in Q5") {
    const OrthantSpace q5 = make_q5();
    CHECK(q5.compatible(AxisSet{0}, AxisSet{1}));
    CHECK_FALSE(q5.compatible(AxisSet{0}, AxisSet{2}));
    // E compatible with the empty set iff E is a stratum.
    CHECK(q5.compatible(AxisSet{3, 4}, AxisSet{}));
    CHECK_FALSE(q5.compatible(AxisSet{1, 4}, AxisSet{}));
}

TEST_CASE("common axes of points") {
    const OrthantSpace q5 = make_q5();
    const Point a(q5, {{0, 1.0}, {1, 0.5}});
    const Point b(q5, {{0, 0.2}, {1, 2.0}});
    // Both interior to O(0,1): the common set is the full axis pair.
    CHECK(common_axes(q5, a, b) == AxisSet{0, 1});

    // Disjoint closures: empty.
    const Point c(q5, {{2, 1.0}, {3, 1.0}});
    CHECK(common_axes(q5, a, c) == AxisSet{});

    // O(0,1) vs O(1,2) share axis 1 only (0 and 2 are incompatible).
    const Point d(q5, {{1, 1.0}, {2, 1.0}});
    CHECK(common_axes(q5, a, d) == AxisSet{1});

    // A point on a face picks up compatible axes of the other support.
    const Point e(q5, {{1, 3.0}});
    CHECK(common_axes(q5, a, e) == AxisSet{0, 1});
}

TEST_CASE("incidence queries") {
    const OrthantSpace q5 = make_q5();
    const auto cob = q5.cobounding_strata(AxisSet{1});
    REQUIRE(cob.size() == 2);
    CHECK(cob[0] == AxisSet{0, 1});
    CHECK(cob[1] == AxisSet{1, 2});
    CHECK(q5.local_codimension(AxisSet{1}) == 1);
    CHECK(q5.local_codimension(AxisSet{}) == 2);
    CHECK(q5.cobounding_strata(AxisSet{}).size() == 10);

    const OrthantSpace simplex(3, {AxisSet{0, 1, 2}});
    CHECK(simplex.cobounding_strata(AxisSet{0, 1, 2}).empty());
    CHECK(simplex.local_codimension(AxisSet{0, 1, 2}) == 0);
    const auto bnd = simplex.bounding_strata(AxisSet{0, 1});
    REQUIRE(bnd.size() == 3);
    CHECK(bnd[0] == AxisSet{});
}

TEST_CASE("downward closure and flag condition hold exhaustively") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const OrthantSpace s = testutil::make_random_dim3_space(7, seed);
        for (AxisSet st : s.strata())
            st.for_each_subset(
                [&](AxisSet sub) { REQUIRE(s.is_stratum(sub)); });
        // Exhaustive flag check over all candidate axis sets.
        const int M = s.ambient_dim();
        for (std::uint64_t m = 0; m < (1ull << M); ++m) {
            const AxisSet cand(m);
            if (cand.size() < 3) continue;
            bool all_pairs = true;
            const auto axes = cand.axes();
            for (size_t i = 0; i < axes.size() && all_pairs; ++i) {
                if (!s.is_stratum(AxisSet{axes[i]})) all_pairs = false;
                for (size_t j = i + 1; j < axes.size() && all_pairs; ++j)
                    if (!s.is_stratum(AxisSet{axes[i], axes[j]}))
                        all_pairs = false;
            }
            if (all_pairs) REQUIRE(s.is_stratum(cand));
        }
    }
}

TEST_CASE("common_axes is symmetric, support-only, and a stratum") {
    const OrthantSpace s = testutil::make_random_dim3_space(8, 11);
    CounterRng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const Point a = testutil::random_point(s, rng);
        const Point b = testutil::random_point(s, rng);
        const AxisSet ab = common_axes(s, a, b);
        CHECK(ab == common_axes(s, b, a));
        CHECK(ab == common_axes(s, a.support(), b.support()));
        CHECK(s.is_stratum(ab));
    }
}

TEST_CASE("points validate their support and snap small coordinates") {
    const OrthantSpace q5 = make_q5();
    CHECK_THROWS_AS(Point(q5, {{0, 1.0}, {2, 1.0}}), InvalidPoint);
    CHECK_THROWS_AS(Point(q5, {{0, -1.0}}), InvalidPoint);
    CHECK_THROWS_AS(Point(q5, {{7, 1.0}}), AxisOutOfRange);
    const Point p(q5, {{0, 1.0}, {1, 1e-13}});
    CHECK(p.support() == AxisSet{0});
    CHECK(Point::cone_point(q5).is_cone_point());
}
