#pragma once

#include <map>
#include <vector>

#include "orthant/frechet.hpp"
#include "orthant/rng.hpp"

namespace testutil {

using namespace orthant;

/// The five-orthant plane Q5: maximal orthants form a pentagon cycle on
/// axes 0..4 (paper labels u1..u5 shifted down by one).
inline OrthantSpace make_q5() {
    return OrthantSpace(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}});
}

/// Three half-lines glued at the origin (a 1-dimensional tree).
inline OrthantSpace make_spider3() {
    return OrthantSpace(3, {{0}, {1}, {2}});
}

/// Product of two 3-spiders: axes 0..2 cross 3..5, nine quadrants, no
/// triangles, max dimension 2.
inline OrthantSpace make_spider_product() {
    std::vector<AxisSet> maximal;
    for (int i = 0; i < 3; ++i)
        for (int j = 3; j < 6; ++j) maximal.push_back(AxisSet{i, j});
    return OrthantSpace(6, maximal);
}

/// Tripartite compatibility graph on M axes: no 4-cliques, so every clique
/// is a stratum and the flag condition holds with max dimension 3.
inline OrthantSpace make_random_dim3_space(int M, std::uint64_t seed,
                                           double edge_prob = 0.55) {
    CounterRng rng(seed);
    std::vector<int> part(M);
    for (int i = 0; i < M; ++i) part[i] = i % 3;
    std::vector<std::vector<bool>> adj(M, std::vector<bool>(M, false));
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j)
            if (part[i] != part[j] && rng.next_double() < edge_prob)
                adj[i][j] = adj[j][i] = true;
    std::vector<AxisSet> maximal;
    for (int i = 0; i < M; ++i) maximal.push_back(AxisSet{i});
    for (int i = 0; i < M; ++i)
        for (int j = i + 1; j < M; ++j) {
            if (!adj[i][j]) continue;
            maximal.push_back(AxisSet{i, j});
            for (int k = j + 1; k < M; ++k)
                if (adj[i][k] && adj[j][k]) maximal.push_back(AxisSet{i, j, k});
        }
    return OrthantSpace(M, maximal);
}

inline Point make_point(const OrthantSpace& space,
                        const std::map<int, double>& coords) {
    return Point(space, coords);
}

/// A point sampled uniformly over the strata of maximal dimension reachable
/// from a random stratum, with coordinates in [lo, hi).
inline Point random_point(const OrthantSpace& space, CounterRng& rng,
                          double lo = 0.2, double hi = 2.0) {
    const auto& strata = space.strata();
    AxisSet s;
    do {
        s = strata[rng.uniform_int(static_cast<int>(strata.size()))];
    } while (s.empty() && space.max_dim() > 0 && rng.next_double() < 0.8);
    std::map<int, double> coords;
    s.for_each([&](int a) { coords[a] = rng.uniform(lo, hi); });
    return Point(space, coords);
}

/// Example-4 geometry: two atoms of mass 1/2 at distance r from the cone
/// point along the geodesic through it, at angle alpha from the u1-axis in
/// O(u1,u5) and from the u3-axis in O(u2,u3).  Zero-based axes: p1 in
/// O(0,4), p2 in O(1,2).
inline Point example4_p1(const OrthantSpace& q5, double r, double alpha) {
    return Point(q5, {{0, r * std::cos(alpha)}, {4, r * std::sin(alpha)}});
}
inline Point example4_p2(const OrthantSpace& q5, double r, double alpha) {
    return Point(q5, {{1, r * std::sin(alpha)}, {2, r * std::cos(alpha)}});
}

inline DiscreteMeasure example4_measure(const OrthantSpace& q5, double r,
                                        double alpha) {
    return DiscreteMeasure({{example4_p1(q5, r, alpha), 0.5},
                            {example4_p2(q5, r, alpha), 0.5}});
}

}  // namespace testutil
