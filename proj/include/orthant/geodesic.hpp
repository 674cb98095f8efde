#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "orthant/point.hpp"

namespace orthant {

/// Relative tolerance for the ratio inequalities characterising geodesic
/// supports.  Comparisons within this tolerance are treated as equality, in
/// which case the support with merged legs is the valid one.
inline constexpr double kRatioTol = 1e-10;

namespace detail {

/// a strictly less than b, beyond relative tolerance.  Both operands are
/// nonnegative cross products of projection norms.
inline bool ratio_lt(double a, double b) {
    return a < b && (b - a) > kRatioTol * std::max(a, b);
}

}  // namespace detail

/// The support (A, B) of a geodesic: A[i] collects the axes dying and B[i]
/// the axes born at the i-th carrier transition; A[0] == B[0] is the set of
/// axes common to the whole carrier.
struct GeodesicSupport {
    std::vector<AxisSet> A;
    std::vector<AxisSet> B;

    int k() const { return static_cast<int>(A.size()) - 1; }

    /// Carrier orthant O_i = A0 u B1..Bi u A(i+1)..Ak.
    AxisSet carrier_orthant(int i) const {
        AxisSet o = A[0];
        for (int j = 1; j <= i; ++j) o = o | B[j];
        for (int j = i + 1; j <= k(); ++j) o = o | A[j];
        return o;
    }

    /// The same support read from the opposite endpoint: sequences swapped
    /// and each reversed.
    GeodesicSupport reversed() const {
        GeodesicSupport r;
        r.A.push_back(B[0]);
        r.B.push_back(A[0]);
        for (int i = k(); i >= 1; --i) {
            r.A.push_back(B[i]);
            r.B.push_back(A[i]);
        }
        return r;
    }

    bool operator==(const GeodesicSupport&) const = default;

    std::string to_string() const {
        std::string s = "A=(";
        for (size_t i = 0; i < A.size(); ++i)
            s += (i ? "," : "") + A[i].to_string();
        s += ") B=(";
        for (size_t i = 0; i < B.size(); ++i)
            s += (i ? "," : "") + B[i].to_string();
        return s + ")";
    }
};

namespace detail {

inline void require_well_formed(const OrthantSpace& space, const Point& x1,
                                const Point& x2, const GeodesicSupport& s) {
    if (s.A.empty() || s.A.size() != s.B.size())
        throw MalformedSupport("support sequences empty or of unequal length");
    if (s.A[0] != s.B[0])
        throw MalformedSupport("A0 != B0");
    if (s.A[0] != common_axes(space, x1, x2))
        throw MalformedSupport("A0 is not the common axis set of the endpoints");
    AxisSet seenA = s.A[0], seenB = s.B[0];
    for (int i = 1; i <= s.k(); ++i) {
        if (s.A[i].empty() || s.B[i].empty())
            throw MalformedSupport("empty leg at index " + std::to_string(i));
        if (seenA.intersects(s.A[i]) || seenB.intersects(s.B[i]) ||
            s.A[i].intersects(s.B[0]) || s.B[i].intersects(s.A[0]))
            throw MalformedSupport("support sets are not mutually disjoint");
        seenA = seenA | s.A[i];
        seenB = seenB | s.B[i];
    }
    if (seenA.intersects(seenB - s.B[0]))
        throw MalformedSupport("dying and born axes overlap");
    if (seenA != (x1.support() | s.A[0]))
        throw MalformedSupport("union of A does not cover the start support");
    if (seenB != (x2.support() | s.B[0]))
        throw MalformedSupport("union of B does not cover the end support");
    for (int i = 0; i <= s.k(); ++i)
        if (!space.is_stratum(s.carrier_orthant(i)))
            throw MalformedSupport("carrier orthant " +
                                   s.carrier_orthant(i).to_string() +
                                   " is not a stratum");
}

/// Condition (ii) for a single leg: for every partition A_i = C1 u C2,
/// B_i = D1 u D2 that is non-trivial as a pair (neither (C1,D1) nor (C2,D2)
/// empty on both sides) and whose swapped orthant O' lies in the space, the
/// split must not give a shorter route: c1/d1 >= c2/d2, compared by cross
/// products so that empty parts act as ratios 0 and infinity.  `born` is
/// A0 u B1..B(i-1) and `future` is A(i+1) u .. u Ak.
inline bool leg_partitions_ok(const OrthantSpace& space, const Point& x1,
                              const Point& x2, AxisSet Ai, AxisSet Bi,
                              AxisSet born, AxisSet future) {
    bool ok = true;
    Ai.for_each_subset([&](AxisSet C1) {
        if (!ok) return;
        const AxisSet C2 = Ai - C1;
        const double c1 = x1.proj_norm(C1), c2 = x1.proj_norm(C2);
        Bi.for_each_subset([&](AxisSet D1) {
            if (!ok) return;
            const AxisSet D2 = Bi - D1;
            if ((C1.empty() && D1.empty()) || (C2.empty() && D2.empty()))
                return;
            const double d1 = x2.proj_norm(D1), d2 = x2.proj_norm(D2);
            // Needs c1/d1 >= c2/d2; ties pass (merged support wins).
            if (!ratio_lt(c1 * d2, c2 * d1)) return;
            const AxisSet Oprime = born | D1 | C2 | future;
            if (space.is_stratum(Oprime)) ok = false;
        });
    });
    return ok;
}

}  // namespace detail

/// Checks whether (A, B) is the support of the geodesic from x1 to x2:
/// strictly increasing leg ratios plus the partition inequalities wherever
/// the swapped orthant exists.  Throws MalformedSupport if the pair does not
/// satisfy the structural invariants for these endpoints.
inline bool validate_support(const OrthantSpace& space, const Point& x1,
                             const Point& x2, const GeodesicSupport& s) {
    detail::require_well_formed(space, x1, x2, s);
    const int k = s.k();
    if (k == 0) return true;

    std::vector<double> a(k + 1), b(k + 1);
    for (int i = 1; i <= k; ++i) {
        a[i] = x1.proj_norm(s.A[i]);
        b[i] = x2.proj_norm(s.B[i]);
    }
    for (int i = 1; i < k; ++i)
        if (!detail::ratio_lt(a[i] * b[i + 1], a[i + 1] * b[i])) return false;

    AxisSet born = s.A[0];
    AxisSet future;
    for (int j = 2; j <= k; ++j) future = future | s.A[j];
    for (int i = 1; i <= k; ++i) {
        if (!detail::leg_partitions_ok(space, x1, x2, s.A[i], s.B[i], born, future))
            return false;
        born = born | s.B[i];
        if (i + 1 <= k) future = future - s.A[i + 1];
    }
    return true;
}

namespace detail {

struct SupportSearch {
    const OrthantSpace& space;
    const Point& x1;
    const Point& x2;
    std::vector<AxisSet> A, B;
    std::vector<GeodesicSupport> found;

    void recurse(AxisSet lrem, AxisSet rrem, AxisSet born, double prev_a,
                 double prev_b) {
        if (lrem.empty()) {
            if (!rrem.empty()) return;
            GeodesicSupport s{A, B};
            found.push_back(std::move(s));
            return;
        }
        if (rrem.empty()) return;
        lrem.for_each_subset([&](AxisSet Ai) {
            if (Ai.empty() || Ai != (Ai & lrem)) return;
            const AxisSet lrest = lrem - Ai;
            const double ai = x1.proj_norm(Ai);
            rrem.for_each_subset([&](AxisSet Bi) {
                if (Bi.empty()) return;
                const AxisSet rrest = rrem - Bi;
                // Next carrier orthant must exist.
                if (!space.is_stratum(born | Bi | lrest)) return;
                const double bi = x2.proj_norm(Bi);
                // Condition (i): ratios strictly increase between legs.
                if (!A.empty() && A.size() > 1 &&
                    !ratio_lt(prev_a * bi, ai * prev_b))
                    return;
                // Condition (ii) for this leg is fully determined here.
                if (!leg_partitions_ok(space, x1, x2, Ai, Bi, born, lrest))
                    return;
                A.push_back(Ai);
                B.push_back(Bi);
                recurse(lrest, rrest, born | Bi, ai, bi);
                A.pop_back();
                B.pop_back();
            });
        });
    }
};

}  // namespace detail

/// Computes the unique support of the geodesic from x1 to x2 by exhaustive
/// enumeration of ordered partitions with carrier and ratio pruning.  If the
/// endpoints share a closed orthant the result has k = 0 with
/// A0 = B0 = E(x1, x2).
inline GeodesicSupport find_support(const OrthantSpace& space, const Point& x1,
                                    const Point& x2) {
    const AxisSet a0 = common_axes(space, x1, x2);
    const AxisSet lrem = x1.support() - a0;
    const AxisSet rrem = x2.support() - a0;
    if (lrem.empty() && rrem.empty()) return GeodesicSupport{{a0}, {a0}};
    if (lrem.empty() || rrem.empty())
        throw NoSupportFound("inconsistent common-axes decomposition for " +
                             x1.support().to_string() + " -> " +
                             x2.support().to_string());

    detail::SupportSearch search{space, x1, x2};
    search.A.push_back(a0);
    search.B.push_back(a0);
    search.recurse(lrem, rrem, a0, 0.0, 1.0);
    if (search.found.size() != 1)
        throw NoSupportFound("expected exactly one valid support for " +
                             x1.support().to_string() + " -> " +
                             x2.support().to_string() + ", found " +
                             std::to_string(search.found.size()));
    return search.found.front();
}

/// Geodesic length implied by a support.
inline double support_length(const Point& x1, const Point& x2,
                             const GeodesicSupport& s) {
    double sq = 0;
    s.A[0].for_each([&](int axis) {
        const double d = x2.coord(axis) - x1.coord(axis);
        sq += d * d;
    });
    for (int i = 1; i <= s.k(); ++i) {
        const double leg = x1.proj_norm(s.A[i]) + x2.proj_norm(s.B[i]);
        sq += leg * leg;
    }
    return std::sqrt(sq);
}

/// Intrinsic (CAT(0)) distance.
inline double distance(const OrthantSpace& space, const Point& x1,
                       const Point& x2) {
    return support_length(x1, x2, find_support(space, x1, x2));
}

/// Point at parameter t on the geodesic from x1 to x2.  The common part
/// interpolates linearly; each leg pair unfolds onto a line through the
/// origin of its subspace, so leg i switches sign at t_i = a_i/(a_i+b_i).
inline Point eval_geodesic(const OrthantSpace& space, const Point& x1,
                           const Point& x2, double t) {
    if (!(t >= 0.0 && t <= 1.0))
        throw ParameterOutOfRange("geodesic parameter " + std::to_string(t) +
                                  " outside [0,1]");
    const GeodesicSupport s = find_support(space, x1, x2);
    std::map<int, double> coords;
    s.A[0].for_each([&](int axis) {
        coords[axis] = (1 - t) * x1.coord(axis) + t * x2.coord(axis);
    });
    for (int i = 1; i <= s.k(); ++i) {
        const double ai = x1.proj_norm(s.A[i]);
        const double bi = x2.proj_norm(s.B[i]);
        const double u = -ai * (1 - t) + bi * t;  // unfolded leg coordinate
        if (u < 0) {
            s.A[i].for_each(
                [&](int axis) { coords[axis] = -u * x1.coord(axis) / ai; });
        } else if (u > 0) {
            s.B[i].for_each(
                [&](int axis) { coords[axis] = u * x2.coord(axis) / bi; });
        }
    }
    return Point(space, coords);
}

/// A geodesic with its support, length and stratum-crossing breakpoints.
struct Geodesic {
    Point x1, x2;
    GeodesicSupport support;
    double length = 0;
    std::vector<std::pair<double, Point>> breakpoints;  // (t_i, point) increasing
};

inline Geodesic make_geodesic(const OrthantSpace& space, const Point& x1,
                              const Point& x2) {
    Geodesic g;
    g.x1 = x1;
    g.x2 = x2;
    g.support = find_support(space, x1, x2);
    g.length = support_length(x1, x2, g.support);
    for (int i = 1; i <= g.support.k(); ++i) {
        const double ai = x1.proj_norm(g.support.A[i]);
        const double bi = x2.proj_norm(g.support.B[i]);
        const double ti = ai / (ai + bi);
        g.breakpoints.emplace_back(ti, eval_geodesic(space, x1, x2, ti));
    }
    return g;
}

}  // namespace orthant
