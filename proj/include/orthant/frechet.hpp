#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "orthant/geodesic.hpp"
#include "orthant/logmap.hpp"
#include "orthant/rng.hpp"

namespace orthant {

/// Finitely supported probability measure on an orthant space.
class DiscreteMeasure {
public:
    DiscreteMeasure() = default;

    DiscreteMeasure(std::vector<std::pair<Point, double>> atoms)
        : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw InvalidPoint("measure needs at least one atom");
        double sum = 0;
        for (auto& [p, w] : atoms_) {
            if (w <= 0) throw InvalidPoint("atom weights must be positive");
            if (p.space() != atoms_.front().first.space())
                throw InvalidPoint("atoms belong to different spaces");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12)
            throw InvalidPoint("atom weights sum to " + std::to_string(sum) +
                               ", expected 1");
    }

    const std::vector<std::pair<Point, double>>& atoms() const { return atoms_; }
    size_t size() const { return atoms_.size(); }

private:
    std::vector<std::pair<Point, double>> atoms_;
};

inline double frechet_value(const OrthantSpace& space,
                            const DiscreteMeasure& mu, const Point& x) {
    double v = 0;
    for (auto& [p, w] : mu.atoms()) {
        const double d = distance(space, x, p);
        v += 0.5 * w * d * d;
    }
    return v;
}

/// Mean of the translated log map projected onto R(E).
inline AmbientVector mean_phi_sigma(const OrthantSpace& space,
                                    const DiscreteMeasure& mu, const Point& x,
                                    AxisSet e) {
    AmbientVector acc = AmbientVector::Zero(space.ambient_dim());
    for (auto& [p, w] : mu.atoms())
        acc += w * project_axes(translated_log(space, x, p), e);
    return acc;
}

namespace detail {

/// Directions on the open positive part of the unit sphere of R(F), as
/// coordinate vectors against the sorted axes of F.  One point when |F|=1;
/// otherwise a product grid in spherical angles, capped so higher
/// dimensional segments stay tractable.
inline std::vector<std::vector<double>> positive_sphere_grid(int dim, int n) {
    std::vector<std::vector<double>> out;
    if (dim == 1) {
        out.push_back({1.0});
        return out;
    }
    const int angular = dim - 1;
    int per_dim = n;
    while (angular > 1 && std::pow(per_dim, angular) > 40000.0) per_dim /= 2;
    per_dim = std::max(per_dim, 4);
    std::vector<int> idx(angular, 0);
    const double half_pi = 1.5707963267948966;
    while (true) {
        std::vector<double> w(dim);
        double sinprod = 1.0;
        for (int i = 0; i < angular; ++i) {
            const double theta = half_pi * (idx[i] + 0.5) / per_dim;
            w[i] = sinprod * std::cos(theta);
            sinprod *= std::sin(theta);
        }
        w[dim - 1] = sinprod;
        out.push_back(std::move(w));
        int c = angular - 1;
        while (c >= 0 && ++idx[c] == per_dim) idx[c--] = 0;
        if (c < 0) break;
    }
    return out;
}

inline TangentVector tangent_from_dir(const OrthantSpace& space,
                                      const Point& x_star,
                                      const std::vector<int>& f_axes,
                                      const std::vector<double>& dir) {
    std::map<int, double> c;
    for (size_t i = 0; i < f_axes.size(); ++i)
        c[f_axes[i]] = std::max(dir[i], 1e-12);
    return make_tangent(space, x_star, c);
}

}  // namespace detail

/// First-order optimality functional for a direction into the co-bounding
/// stratum tau: <w, mean of Psi_tau(., w; x_star)>.  Nonpositive for every
/// direction iff x_star passes condition (i).
inline double direction_functional(const OrthantSpace& space,
                                   const DiscreteMeasure& mu,
                                   const Point& x_star, const TangentVector& w,
                                   AmbientVector* mean_psi_out = nullptr) {
    AmbientVector acc = AmbientVector::Zero(space.ambient_dim());
    for (auto& [p, wt] : mu.atoms())
        acc += wt * psi_tau(space, x_star, w, p);
    if (mean_psi_out) *mean_psi_out = acc;
    double g = 0;
    for (auto& [a, v] : w.coords()) g += v * acc[a];
    return g;
}

struct TauReport {
    AxisSet tau;
    double max_g = 0;
    std::vector<double> argmax_dir;  // against the sorted axes of tau \ E
};

/// Certificate for the optimality conditions at a candidate mean: the
/// fixed-point residual of the tangential condition and, per co-bounding
/// stratum, the largest directional functional found by grid search plus
/// projected ascent.  The directional check is sound up to the sphere
/// resolution, which is recorded.
struct MeanCertificate {
    Point candidate;
    double fixed_point_residual = 0;
    std::vector<TauReport> taus;
    int sphere_samples = 0;
    double tol = 0;
    bool pass = false;
};

inline MeanCertificate verify_mean(const OrthantSpace& space,
                                   const DiscreteMeasure& mu,
                                   const Point& x_star, int sphere_samples = 64,
                                   double tol = 1e-8) {
    MeanCertificate cert;
    cert.candidate = x_star;
    cert.sphere_samples = sphere_samples;
    cert.tol = tol;
    const AxisSet e = x_star.support();

    const AmbientVector mean_phi = mean_phi_sigma(space, mu, x_star, e);
    cert.fixed_point_residual = (embed(space, x_star) - mean_phi).norm();

    for (AxisSet tau : space.cobounding_strata(e)) {
        const AxisSet f = tau - e;
        const std::vector<int> f_axes = f.axes();
        const int d = f.size();
        TauReport rep;
        rep.tau = tau;
        rep.max_g = -std::numeric_limits<double>::infinity();
        for (auto& dir : detail::positive_sphere_grid(d, sphere_samples)) {
            TangentVector w = detail::tangent_from_dir(space, x_star, f_axes, dir);
            AmbientVector mean_psi;
            double g = direction_functional(space, mu, x_star, w, &mean_psi);
            std::vector<double> cur = dir;
            // Projected ascent; the gradient of g on the sphere is the
            // tangential part of the mean of Psi_tau.
            double step = 0.5;
            for (int it = 0; it < 20 && d > 1; ++it) {
                double dot = 0;
                for (int i = 0; i < d; ++i) dot += cur[i] * mean_psi[f_axes[i]];
                std::vector<double> next(d);
                double norm = 0;
                for (int i = 0; i < d; ++i) {
                    next[i] = std::max(
                        1e-12, cur[i] + step * (mean_psi[f_axes[i]] - dot * cur[i]));
                    norm += next[i] * next[i];
                }
                norm = std::sqrt(norm);
                for (auto& v : next) v /= norm;
                TangentVector wn =
                    detail::tangent_from_dir(space, x_star, f_axes, next);
                AmbientVector mp;
                const double gn = direction_functional(space, mu, x_star, wn, &mp);
                if (gn > g) {
                    g = gn;
                    cur = next;
                    mean_psi = mp;
                } else {
                    step *= 0.5;
                }
            }
            if (g > rep.max_g) {
                rep.max_g = g;
                rep.argmax_dir = cur;
            }
        }
        cert.taus.push_back(std::move(rep));
    }

    cert.pass = cert.fixed_point_residual <= tol;
    for (auto& rep : cert.taus)
        if (rep.max_g > tol) cert.pass = false;
    return cert;
}

/// Grid estimate of the equality set Theta_{tau,sigma}: directions whose
/// functional vanishes within tolerance, with a coarse convexity summary.
struct ThetaEstimate {
    AxisSet tau;
    std::vector<std::vector<double>> dirs;  // against sorted axes of tau \ E
    std::vector<double> values;
    std::vector<bool> flags;
    double tol = 0;
    int flagged = 0;
    bool convex_at_resolution = true;
    // For 2-dimensional F: flagged angular range measured from the first axis.
    double theta_min = 0, theta_max = 0;
};

inline ThetaEstimate theta_set(const OrthantSpace& space,
                               const DiscreteMeasure& mu, const Point& x_star,
                               AxisSet tau, int grid_resolution = 256) {
    const AxisSet e = x_star.support();
    if (!tau.contains(e) || tau == e || !space.is_stratum(tau))
        throw PreconditionFailed("tau must strictly co-bound the stratum of x*");
    const AxisSet f = tau - e;
    const std::vector<int> f_axes = f.axes();

    ThetaEstimate est;
    est.tau = tau;
    const double scale = mean_phi_sigma(space, mu, x_star, e).norm();
    est.tol = 1e-7 * (1.0 + scale);

    est.dirs = detail::positive_sphere_grid(f.size(), grid_resolution);
    for (auto& dir : est.dirs) {
        TangentVector w = detail::tangent_from_dir(space, x_star, f_axes, dir);
        const double g = direction_functional(space, mu, x_star, w);
        est.values.push_back(g);
        const bool flag = std::abs(g) <= est.tol;
        est.flags.push_back(flag);
        if (flag) ++est.flagged;
    }

    if (f.size() == 2) {
        est.theta_min = 10;
        est.theta_max = -10;
        bool in_run = false;
        int runs = 0;
        for (size_t i = 0; i < est.dirs.size(); ++i) {
            if (est.flags[i]) {
                const double theta = std::atan2(est.dirs[i][1], est.dirs[i][0]);
                est.theta_min = std::min(est.theta_min, theta);
                est.theta_max = std::max(est.theta_max, theta);
                if (!in_run) ++runs;
                in_run = true;
            } else {
                in_run = false;
            }
        }
        est.convex_at_resolution = runs <= 1;
    } else if (f.size() > 2 && est.flagged > 0) {
        // Spherical midpoints of flagged pairs must land on (or next to)
        // flagged grid points.
        const auto nearest = [&](const std::vector<double>& w) {
            size_t best = 0;
            double bd = 1e300;
            for (size_t i = 0; i < est.dirs.size(); ++i) {
                double d = 0;
                for (size_t c = 0; c < w.size(); ++c) {
                    const double dd = est.dirs[i][c] - w[c];
                    d += dd * dd;
                }
                if (d < bd) {
                    bd = d;
                    best = i;
                }
            }
            return best;
        };
        std::vector<size_t> on;
        for (size_t i = 0; i < est.flags.size(); ++i)
            if (est.flags[i]) on.push_back(i);
        CounterRng rng(12345);
        for (int t = 0; t < 64 && on.size() >= 2; ++t) {
            const size_t i = on[rng.uniform_int(static_cast<int>(on.size()))];
            const size_t j = on[rng.uniform_int(static_cast<int>(on.size()))];
            std::vector<double> mid(f_axes.size());
            double n = 0;
            for (size_t c = 0; c < mid.size(); ++c) {
                mid[c] = est.dirs[i][c] + est.dirs[j][c];
                n += mid[c] * mid[c];
            }
            n = std::sqrt(n);
            for (auto& v : mid) v /= n;
            if (!est.flags[nearest(mid)]) est.convex_at_resolution = false;
        }
    }
    return est;
}

/// Residuals of the interior-direction identities: the mean of
/// Psi_tau - Phi_sigma vanishes, the mean of Psi_tau recovers x_star, and
/// Psi_tau of non-singular atoms does not depend on the interior direction.
struct ConsistencyReport {
    double resid_mean_shift = 0;    // eq: mean(Psi_tau - Phi_sigma) = 0
    double resid_mean_recover = 0;  // eq: mean(Psi_tau) = x_star
    double max_pairwise_diff = 0;
    int excluded_atoms = 0;
};

inline ConsistencyReport check_consistency_identities(
    const OrthantSpace& space, const DiscreteMeasure& mu, const Point& x_star,
    AxisSet tau, const TangentVector& w, int direction_samples = 4,
    double perturbation = 0.02) {
    const AxisSet e = x_star.support();
    const AxisSet f = tau - e;
    const std::vector<int> f_axes = f.axes();

    ConsistencyReport rep;
    AmbientVector acc_shift = AmbientVector::Zero(space.ambient_dim());
    AmbientVector acc_psi = AmbientVector::Zero(space.ambient_dim());
    for (auto& [p, wt] : mu.atoms()) {
        const AmbientVector psi = psi_tau(space, x_star, w, p);
        acc_psi += wt * psi;
        acc_shift += wt * (psi - project_axes(translated_log(space, x_star, p), e));
    }
    rep.resid_mean_shift = acc_shift.norm();
    rep.resid_mean_recover = (acc_psi - embed(space, x_star)).norm();

    // Interior directions near w.
    std::vector<TangentVector> ws{w};
    CounterRng rng(777);
    const double wn = w.norm();
    for (int s = 0; s < direction_samples; ++s) {
        std::map<int, double> c;
        double norm = 0;
        for (int a : f_axes) {
            const double v = std::max(
                1e-12,
                w.coord(a) / wn + perturbation * (2 * rng.next_double() - 1));
            c[a] = v;
            norm += v * v;
        }
        norm = std::sqrt(norm);
        for (auto& [a, v] : c) v /= norm;
        ws.emplace_back(make_tangent(space, x_star, c));
    }

    for (auto& [p, wt] : mu.atoms()) {
        bool excluded = in_D(space, x_star, p);
        for (auto& wv : ws)
            if (!excluded && is_singular(space, x_star, wv, p)) excluded = true;
        if (excluded) {
            ++rep.excluded_atoms;
            continue;
        }
        for (size_t i = 0; i < ws.size(); ++i)
            for (size_t j = i + 1; j < ws.size(); ++j) {
                const AmbientVector d = psi_tau(space, x_star, ws[i], p) -
                                        psi_tau(space, x_star, ws[j], p);
                rep.max_pairwise_diff =
                    std::max(rep.max_pairwise_diff, d.lpNorm<Eigen::Infinity>());
            }
    }
    return rep;
}

struct FrechetMeanOptions {
    int max_iter = 200;
    double tol = 1e-8;
    std::uint64_t seed = 0;
    int sphere_samples = 64;
};

struct FrechetMeanResult {
    Point mean;
    MeanCertificate certificate;
    int outer_iterations = 0;
};

struct NonConvergence : Error {
    Point best;
    NonConvergence(const std::string& msg, Point b)
        : Error(msg), best(std::move(b)) {}
};

namespace detail {

/// Minimises the Frechet function over the closed cone of E; axes driven to
/// zero are dropped.  Within R(E) the gradient is x minus the mean of the
/// projected translated log map and the Hessian is I minus the mean of the
/// log-map derivative blocks, so a damped projected Newton step converges
/// even when the minimiser sits close to a bounding face.
inline Point flat_minimize(const OrthantSpace& space, const DiscreteMeasure& mu,
                           AxisSet e, std::map<int, double> coords) {
    auto make = [&](const std::map<int, double>& c) {
        std::map<int, double> kept;
        for (auto& [a, v] : c)
            if (v > 0) kept[a] = v;
        return Point(space, kept);
    };

    for (auto it = coords.begin(); it != coords.end();) {
        if (e.contains(it->first))
            ++it;
        else
            it = coords.erase(it);
    }
    e.for_each([&](int a) {
        if (!coords.count(a)) coords[a] = 0.0;
        coords[a] = std::max(coords[a], 1e-9);
    });

    const std::vector<int> axes = e.axes();
    const int p = static_cast<int>(axes.size());
    Point x = make(coords);
    double fx = frechet_value(space, mu, x);
    for (int iter = 0; iter < 200 && p > 0; ++iter) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
        Matrix hess = Matrix::Identity(p, p);
        {
            AmbientVector acc = AmbientVector::Zero(space.ambient_dim());
            Matrix macc = Matrix::Zero(space.ambient_dim(), space.ambient_dim());
            for (auto& [pt, w] : mu.atoms()) {
                const GeodesicSupport s = find_support(space, x, pt);
                AmbientVector phi = AmbientVector::Zero(space.ambient_dim());
                s.B[0].for_each([&](int a) { phi[a] = pt.coord(a); });
                for (int i = 1; i <= s.k(); ++i) {
                    const double scale =
                        pt.proj_norm(s.B[i]) / x.proj_norm(s.A[i]);
                    s.A[i].for_each(
                        [&](int a) { phi[a] = -scale * x.coord(a); });
                }
                acc += w * project_axes(phi, e);
                macc += w * detail::derivative_from_support(space, x, pt, s);
            }
            for (int r = 0; r < p; ++r) {
                g[r] = coords[axes[r]] - acc[axes[r]];
                for (int c = 0; c < p; ++c) hess(r, c) -= macc(axes[r], axes[c]);
            }
        }
        if (g.norm() <= 1e-13 * (1.0 + x.norm())) break;

        Eigen::VectorXd step = hess.llt().solve(g);
        if (!step.allFinite()) step = g;
        double t = 1.0;
        bool moved = false;
        while (t >= 1e-14) {
            std::map<int, double> trial = coords;
            double sqdiff = 0;
            for (int r = 0; r < p; ++r) {
                const double ya = std::max(0.0, coords[axes[r]] - t * step[r]);
                sqdiff += (ya - coords[axes[r]]) * (ya - coords[axes[r]]);
                trial[axes[r]] = ya;
            }
            if (sqdiff == 0) break;
            Point y = make(trial);
            const double fy = frechet_value(space, mu, y);
            if (fy <= fx - 1e-4 * sqdiff / std::max(t, 1e-12)) {
                coords = trial;
                x = y;
                fx = fy;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
    }

    // Drop collapsed axes; the support stays a stratum by downward closure.
    std::map<int, double> final_coords;
    for (auto& [a, v] : coords)
        if (v > 1e-12 * (1.0 + x.norm())) final_coords[a] = v;
    return make(final_coords);
}

inline Point sturm_phase(const OrthantSpace& space, const DiscreteMeasure& mu,
                         std::uint64_t seed, int iters) {
    // Start from the heaviest atom.
    size_t best = 0;
    for (size_t i = 1; i < mu.size(); ++i)
        if (mu.atoms()[i].second > mu.atoms()[best].second) best = i;
    Point x = mu.atoms()[best].first;

    CounterRng rng(CounterRng::derive_key(seed, 0x5374726Dull));
    for (int k = 0; k < iters; ++k) {
        const double u = rng.next_double();
        double acc = 0;
        const Point* target = &mu.atoms().back().first;
        for (auto& [p, w] : mu.atoms()) {
            acc += w;
            if (u < acc) {
                target = &p;
                break;
            }
        }
        x = eval_geodesic(space, x, *target, 1.0 / (k + 2));
    }
    return x;
}

}  // namespace detail

/// Computes the Frechet mean of a finitely supported measure: a Sturm-type
/// inductive phase to localise the stratum, then alternating flat
/// minimisation within the candidate stratum and certified re-entry into a
/// co-bounding stratum whenever the directional conditions report a
/// violation.  The returned point always carries a passing certificate.
inline FrechetMeanResult frechet_mean(const OrthantSpace& space,
                                      const DiscreteMeasure& mu,
                                      const FrechetMeanOptions& opts = {}) {
    if (mu.size() == 1)
        return {mu.atoms().front().first,
                verify_mean(space, mu, mu.atoms().front().first,
                            opts.sphere_samples, opts.tol),
                0};

    Point x = detail::sturm_phase(space, mu, opts.seed,
                                  std::max<int>(48, 4 * (int)mu.size()));

    // Generous stratum snap; a wrongly dropped axis is recovered by the
    // re-entry step, a wrongly kept one is removed by the flat phase.
    {
        std::map<int, double> c;
        const double thr = 1e-3 * (1.0 + x.norm());
        for (auto& [a, v] : x.coords())
            if (v > thr) c[a] = v;
        x = Point(space, c);
    }

    Point best = x;
    double best_f = frechet_value(space, mu, x);
    for (int outer = 0; outer < opts.max_iter; ++outer) {
        std::map<int, double> coords;
        for (auto& [a, v] : x.coords()) coords[a] = v;
        x = detail::flat_minimize(space, mu, x.support(), coords);

        const double fx = frechet_value(space, mu, x);
        if (fx < best_f) {
            best_f = fx;
            best = x;
        }

        MeanCertificate cert =
            verify_mean(space, mu, x, opts.sphere_samples, opts.tol);
        if (cert.pass) return {x, std::move(cert), outer + 1};

        // Re-enter the worst violated co-bounding stratum along its worst
        // direction; the Frechet function is convex along the ray.
        const TauReport* worst = nullptr;
        for (auto& rep : cert.taus)
            if (rep.max_g > cert.tol && (!worst || rep.max_g > worst->max_g))
                worst = &rep;
        if (!worst)
            throw NonConvergence(
                "fixed-point residual did not meet tolerance and no "
                "directional violation to follow",
                best);

        const std::vector<int> f_axes = (worst->tau - x.support()).axes();
        double atom_scale = x.norm();
        for (auto& [p, w] : mu.atoms()) atom_scale = std::max(atom_scale, p.norm());
        auto point_at = [&](double s) {
            std::map<int, double> c;
            for (auto& [a, v] : x.coords()) c[a] = v;
            for (size_t i = 0; i < f_axes.size(); ++i)
                c[f_axes[i]] += s * worst->argmax_dir[i];
            return Point(space, c);
        };
        double lo = 0, hi = 2.0 * (atom_scale + 1.0);
        const double gr = 0.6180339887498949;
        double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
        double f1 = frechet_value(space, mu, point_at(m1));
        double f2 = frechet_value(space, mu, point_at(m2));
        for (int it = 0; it < 80; ++it) {
            if (f1 <= f2) {
                hi = m2;
                m2 = m1;
                f2 = f1;
                m1 = hi - gr * (hi - lo);
                f1 = frechet_value(space, mu, point_at(m1));
            } else {
                lo = m1;
                m1 = m2;
                f1 = f2;
                m2 = lo + gr * (hi - lo);
                f2 = frechet_value(space, mu, point_at(m2));
            }
        }
        x = point_at(0.5 * (lo + hi));
    }
    throw NonConvergence("frechet_mean: no certified mean within max_iter",
                         best);
}

}  // namespace orthant
