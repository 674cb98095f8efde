#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "orthant/axis_set.hpp"
#include "orthant/errors.hpp"
#include "orthant/space.hpp"

namespace orthant {

/// Coordinates below this absolute threshold are treated as zero on input so
/// that stratum membership stays a discrete, testable property.
inline constexpr double kCoordSnapTol = 1e-12;

/// A point of an orthant space: a sparse vector of strictly positive
/// coordinates whose axis set is a stratum.  The cone point is the point
/// with no coordinates.
class Point {
public:
    Point() = default;

    Point(const OrthantSpace& space, const std::map<int, double>& coords)
        : space_(&space) {
        for (auto [axis, v] : coords) {
            if (axis < 0 || axis >= space.ambient_dim())
                throw AxisOutOfRange("point axis " + std::to_string(axis) +
                                     " outside ambient dimension");
            if (v < 0)
                throw InvalidPoint("negative coordinate on axis " +
                                   std::to_string(axis));
            if (v >= kCoordSnapTol) {
                coords_.emplace_back(axis, v);
                support_.insert(axis);
            }
        }
        if (!space.is_stratum(support_))
            throw InvalidPoint("support " + support_.to_string() +
                               " is not a stratum of the space");
    }

    static Point cone_point(const OrthantSpace& space) { return Point(space, {}); }

    const OrthantSpace* space() const { return space_; }
    AxisSet support() const { return support_; }
    bool is_cone_point() const { return support_.empty(); }

    const std::vector<std::pair<int, double>>& coords() const { return coords_; }

    double coord(int axis) const {
        for (auto& [a, v] : coords_)
            if (a == axis) return v;
        return 0.0;
    }

    double norm_sq() const {
        double s = 0;
        for (auto& [a, v] : coords_) s += v * v;
        return s;
    }
    double norm() const { return std::sqrt(norm_sq()); }

    /// Euclidean norm of the orthogonal projection onto R(axes).
    double proj_norm(AxisSet axes) const {
        double s = 0;
        for (auto& [a, v] : coords_)
            if (axes.contains(a)) s += v * v;
        return std::sqrt(s);
    }

    Point scaled(double lambda) const {
        Point p;
        p.space_ = space_;
        if (lambda <= 0.0) return p;  // collapses to the cone point at 0
        p.support_ = support_;
        p.coords_ = coords_;
        for (auto& [a, v] : p.coords_) v *= lambda;
        return p;
    }

    bool operator==(const Point& o) const {
        return support_ == o.support_ && coords_ == o.coords_;
    }

private:
    const OrthantSpace* space_ = nullptr;
    AxisSet support_;
    std::vector<std::pair<int, double>> coords_;  // sorted by axis
};

/// Axes common to every stratum crossed by the geodesic between x1 and x2:
/// the shared support axes plus each endpoint's axes compatible with the
/// other endpoint's support.  Depends only on the two supports.
inline AxisSet common_axes(const OrthantSpace& space, AxisSet e1, AxisSet e2) {
    AxisSet out = e1 & e2;
    (e1 - e2).for_each([&](int a) {
        if (space.compatible(AxisSet::single(a), e2)) out.insert(a);
    });
    (e2 - e1).for_each([&](int a) {
        if (space.compatible(AxisSet::single(a), e1)) out.insert(a);
    });
    return out;
}

inline AxisSet common_axes(const OrthantSpace& space, const Point& x1,
                           const Point& x2) {
    return common_axes(space, x1.support(), x2.support());
}

}  // namespace orthant
