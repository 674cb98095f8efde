#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "orthant/geodesic.hpp"
#include "orthant/point.hpp"

namespace orthant {

using AmbientVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative tolerance for the equality test in the membership criterion of
/// the set D of support-change singularities.
inline constexpr double kDMembershipTol = 1e-8;

/// The coordinate permutation: scatters values listed against an ordered
/// axis list into an ambient vector.
inline AmbientVector embed(int ambient_dim, const std::vector<int>& axes,
                           const std::vector<double>& values) {
    AmbientVector v = AmbientVector::Zero(ambient_dim);
    for (size_t i = 0; i < axes.size(); ++i) v[axes[i]] = values[i];
    return v;
}

inline AmbientVector embed(const OrthantSpace& space, const Point& p) {
    AmbientVector v = AmbientVector::Zero(space.ambient_dim());
    for (auto& [a, x] : p.coords()) v[a] = x;
    return v;
}

/// Orthogonal projection onto R(axes): keeps the listed coordinates.
inline AmbientVector project_axes(const AmbientVector& v, AxisSet axes) {
    AmbientVector out = AmbientVector::Zero(v.size());
    axes.for_each([&](int a) { out[a] = v[a]; });
    return out;
}

inline AmbientVector project_sigma(const AmbientVector& v, AxisSet e) {
    return project_axes(v, e);
}

inline AmbientVector project_tau_minus_sigma(const AmbientVector& v, AxisSet e,
                                             AxisSet f) {
    return project_axes(v, f - e);
}

/// Translated logarithm map computed from the support of the geodesic from
/// x_star to x: the common axes keep the coordinates of x, each dying leg
/// A_i points backwards along x_star scaled by the born mass of B_i.
inline AmbientVector translated_log(const OrthantSpace& space,
                                    const Point& x_star, const Point& x) {
    const GeodesicSupport s = find_support(space, x_star, x);
    AmbientVector phi = AmbientVector::Zero(space.ambient_dim());
    s.B[0].for_each([&](int a) { phi[a] = x.coord(a); });
    for (int i = 1; i <= s.k(); ++i) {
        const double scale = x.proj_norm(s.B[i]) / x_star.proj_norm(s.A[i]);
        s.A[i].for_each([&](int a) { phi[a] = -scale * x_star.coord(a); });
    }
    return phi;
}

inline AmbientVector log_map(const OrthantSpace& space, const Point& x_star,
                             const Point& x) {
    return translated_log(space, x_star, x) - embed(space, x_star);
}

/// Derivative of y -> y/|y|; the 1x1 case degenerates to zero.
inline Matrix m_dagger(const Eigen::VectorXd& y) {
    const double n = y.norm();
    if (n == 0.0) throw ZeroVector("m_dagger of the zero vector");
    const int l = static_cast<int>(y.size());
    if (l == 1) return Matrix::Zero(1, 1);
    return Matrix::Identity(l, l) / n - (y * y.transpose()) / (n * n * n);
}

/// A tangent vector at a point of the stratum O(E), lying in the closed
/// tangent-cone stratum R(E) x O(F): signed coordinates on E, strictly
/// positive ones on F.
class TangentVector {
public:
    TangentVector() = default;

    TangentVector(const OrthantSpace& space, AxisSet base,
                  const std::map<int, double>& coords)
        : base_(base) {
        for (auto [a, v] : coords) {
            if (a < 0 || a >= space.ambient_dim())
                throw AxisOutOfRange("tangent axis out of range");
            if (v == 0.0) continue;
            if (!base.contains(a)) {
                if (v < 0)
                    throw InvalidPoint(
                        "negative coordinate off the base stratum");
                extra_.insert(a);
            }
            coords_.emplace_back(a, v);
        }
        if (!space.is_stratum(base_ | extra_))
            throw InvalidPoint("tangent target " + (base_ | extra_).to_string() +
                               " is not a stratum");
    }

    AxisSet base() const { return base_; }
    AxisSet extra() const { return extra_; }
    /// The co-bounding stratum the vector is tangent to.
    AxisSet target() const { return base_ | extra_; }

    const std::vector<std::pair<int, double>>& coords() const { return coords_; }

    double coord(int axis) const {
        for (auto& [a, v] : coords_)
            if (a == axis) return v;
        return 0.0;
    }

    double norm() const {
        double s = 0;
        for (auto& [a, v] : coords_) s += v * v;
        return std::sqrt(s);
    }

    double proj_norm(AxisSet axes) const {
        double s = 0;
        for (auto& [a, v] : coords_)
            if (axes.contains(a)) s += v * v;
        return std::sqrt(s);
    }

    TangentVector scaled(double lambda) const {
        TangentVector t = *this;
        for (auto& [a, v] : t.coords_) v *= lambda;
        return t;
    }

    /// Component orthogonal to the base stratum (F coordinates only).
    TangentVector perp() const {
        TangentVector t;
        t.base_ = base_;
        t.extra_ = extra_;
        for (auto& [a, v] : coords_)
            if (extra_.contains(a)) t.coords_.emplace_back(a, v);
        return t;
    }

    AmbientVector to_ambient(int ambient_dim) const {
        AmbientVector v = AmbientVector::Zero(ambient_dim);
        for (auto& [a, x] : coords_) v[a] = x;
        return v;
    }

private:
    AxisSet base_;
    AxisSet extra_;
    std::vector<std::pair<int, double>> coords_;
};

inline TangentVector make_tangent(const OrthantSpace& space,
                                  const Point& x_star,
                                  const std::map<int, double>& coords) {
    return TangentVector(space, x_star.support(), coords);
}

namespace detail {

/// x_star displaced by lambda * w; valid for lambda small enough that the
/// base coordinates stay positive.
inline Point displaced(const OrthantSpace& space, const Point& x_star,
                       const TangentVector& w, double lambda) {
    std::map<int, double> c;
    for (auto& [a, v] : x_star.coords()) c[a] = v;
    for (auto& [a, v] : w.coords()) c[a] += lambda * v;
    for (auto& [a, v] : c)
        if (v < 0)
            throw ParameterOutOfRange(
                "displacement leaves the closed stratum on axis " +
                std::to_string(a));
    return Point(space, c);
}

/// Support of the geodesic from x_star + lambda*w to x, constant for all
/// sufficiently small lambda.  Evaluated on a shrinking ladder; accepted
/// when two consecutive trustworthy rungs agree.  A rung is untrustworthy
/// when lambda times the smallest direction coordinate sinks toward the
/// coordinate snap tolerance.
inline GeodesicSupport stabilized_support(const OrthantSpace& space,
                                          const Point& x_star,
                                          const TangentVector& w,
                                          const Point& x) {
    constexpr std::array<double, 4> ladder = {1e-3, 1e-4, 1e-5, 1e-6};
    double min_coord = 1.0;
    for (auto& [a, v] : w.coords())
        min_coord = std::min(min_coord, std::abs(v));
    for (auto& [a, v] : x_star.coords())
        min_coord = std::min(min_coord, v);

    std::optional<GeodesicSupport> prev;
    bool prev_trusted = false;
    for (double lambda : ladder) {
        const bool trusted = lambda * min_coord >= 1e-11;
        GeodesicSupport cur = find_support(space, displaced(space, x_star, w, lambda), x);
        if (prev && prev_trusted && trusted && cur == *prev) return cur;
        prev = std::move(cur);
        prev_trusted = trusted;
    }
    throw StabilizationFailure(
        "support of the displaced geodesic did not stabilize along the "
        "lambda ladder; the direction may be too close to a support-change "
        "surface or carry coordinates near the snap tolerance");
}

}  // namespace detail

/// Directional limit of the translated log map as the base point approaches
/// x_star from direction w.  For w tangent to the stratum of x_star itself
/// this is just the translated log map.
inline AmbientVector directional_limit(const OrthantSpace& space,
                                       const Point& x_star,
                                       const TangentVector& w, const Point& x) {
    const AxisSet e = x_star.support();
    if (w.extra().empty()) return translated_log(space, x_star, x);
    const GeodesicSupport s = detail::stabilized_support(space, x_star, w, x);
    AmbientVector psi = AmbientVector::Zero(space.ambient_dim());
    s.B[0].for_each([&](int a) { psi[a] = x.coord(a); });
    for (int i = 1; i <= s.k(); ++i) {
        const AxisSet ai_e = s.A[i] & e;
        const double bi = x.proj_norm(s.B[i]);
        if (!ai_e.empty()) {
            const double scale = bi / x_star.proj_norm(ai_e);
            ai_e.for_each([&](int a) { psi[a] = -scale * x_star.coord(a); });
        } else {
            // The whole leg vanishes at x_star; the direction takes over.
            const AxisSet ai_f = s.A[i] & w.extra();
            const double scale = bi / w.proj_norm(ai_f);
            ai_f.for_each([&](int a) { psi[a] = -scale * w.coord(a); });
        }
    }
    return psi;
}

/// Projection of the directional limit onto the co-bounding stratum.
inline AmbientVector psi_tau(const OrthantSpace& space, const Point& x_star,
                             const TangentVector& w, const Point& x) {
    return project_axes(directional_limit(space, x_star, w, x), w.target());
}

/// Membership in D_{x_star}: the support of the geodesic from x_star to x
/// admits a partition of some leg with equal split ratios whose swapped
/// orthant O' exists in the space while the opposite swap O''' does not.
/// Crossing such a point genuinely changes the form of the log map.
inline bool in_D(const OrthantSpace& space, const Point& x_star,
                 const Point& x) {
    const GeodesicSupport s = find_support(space, x_star, x);
    const int k = s.k();
    if (k == 0) return false;
    AxisSet born = s.A[0];
    AxisSet future;
    for (int j = 2; j <= k; ++j) future = future | s.A[j];
    bool result = false;
    for (int i = 1; i <= k && !result; ++i) {
        if (s.A[i].size() >= 2 && s.B[i].size() >= 2) {
            s.A[i].for_each_proper_subset([&](AxisSet C1) {
                if (result) return;
                const AxisSet C2 = s.A[i] - C1;
                const double c1 = x_star.proj_norm(C1);
                const double c2 = x_star.proj_norm(C2);
                s.B[i].for_each_proper_subset([&](AxisSet D1) {
                    if (result) return;
                    const AxisSet D2 = s.B[i] - D1;
                    const double d1 = x.proj_norm(D1), d2 = x.proj_norm(D2);
                    const double lhs = c1 * d2, rhs = c2 * d1;
                    if (std::abs(lhs - rhs) >
                        kDMembershipTol * std::max({lhs, rhs, 1e-300}))
                        return;
                    const AxisSet oprime = born | D1 | C2 | future;
                    const AxisSet otriple = born | D2 | C1 | future;
                    if (space.is_stratum(oprime) && !space.is_stratum(otriple))
                        result = true;
                });
            });
        }
        born = born | s.B[i];
        if (i + 1 <= k) future = future - s.A[i + 1];
    }
    return result;
}

namespace detail {

/// The block-diagonal derivative assembled from a support, without the
/// D-membership guard; on D it is the one-sided derivative of the merged
/// form.
inline Matrix derivative_from_support(const OrthantSpace& space,
                                      const Point& x_star, const Point& x,
                                      const GeodesicSupport& s) {
    const int M = space.ambient_dim();
    Matrix out = Matrix::Zero(M, M);
    for (int i = 1; i <= s.k(); ++i) {
        const std::vector<int> ax = s.A[i].axes();
        Eigen::VectorXd y(ax.size());
        for (size_t j = 0; j < ax.size(); ++j) y[j] = x_star.coord(ax[j]);
        const Matrix block = -x.proj_norm(s.B[i]) * m_dagger(y);
        for (size_t r = 0; r < ax.size(); ++r)
            for (size_t c = 0; c < ax.size(); ++c)
                out(ax[r], ax[c]) = block(r, c);
    }
    return out;
}

}  // namespace detail

/// Derivative of x' -> P_sigma(Phi(x; x')) at x' = x_star, as an ambient
/// matrix acting on perturbations within R(E).  Zero outside the blocks of
/// the dying legs; negative semi-definite.
inline Matrix derivative_matrix(const OrthantSpace& space, const Point& x_star,
                                const Point& x) {
    if (in_D(space, x_star, x))
        throw OnSingularSet("derivative undefined: x lies in D_{x*}");
    return detail::derivative_from_support(space, x_star, x,
                                           find_support(space, x_star, x));
}

/// Directional derivative of w -> Psi_tau(x, w; x_star) on the unit sphere
/// segment of O(F), as an ambient matrix.  Only legs vanishing entirely at
/// x_star with more than one direction axis contribute.
inline Matrix directional_derivative_matrix(const OrthantSpace& space,
                                            const Point& x_star,
                                            const Point& x,
                                            const TangentVector& w) {
    const AxisSet e = x_star.support();
    const GeodesicSupport s = detail::stabilized_support(space, x_star, w, x);
    const int M = space.ambient_dim();
    Matrix out = Matrix::Zero(M, M);
    for (int i = 1; i <= s.k(); ++i) {
        if (!(s.A[i] & e).empty()) continue;
        const AxisSet ai_f = s.A[i] & w.extra();
        if (ai_f.size() <= 1) continue;
        const std::vector<int> ax = ai_f.axes();
        Eigen::VectorXd y(ax.size());
        for (size_t j = 0; j < ax.size(); ++j) y[j] = w.coord(ax[j]);
        const Matrix block = -x.proj_norm(s.B[i]) * m_dagger(y);
        for (size_t r = 0; r < ax.size(); ++r)
            for (size_t c = 0; c < ax.size(); ++c)
                out(ax[r], ax[c]) = block(r, c);
    }
    return out;
}

/// Singular points with respect to (x_star, w): some leg of the stabilized
/// support vanishes entirely at x_star and spreads over more than one
/// direction axis, so Psi depends nonlinearly on w there.
inline bool is_singular(const OrthantSpace& space, const Point& x_star,
                        const TangentVector& w, const Point& x) {
    const AxisSet e = x_star.support();
    const GeodesicSupport s = detail::stabilized_support(space, x_star, w, x);
    for (int i = 1; i <= s.k(); ++i)
        if ((s.A[i] & e).empty() && (s.A[i] & w.extra()).size() > 1)
            return true;
    return false;
}

}  // namespace orthant
