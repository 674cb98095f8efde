#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "orthant/frechet.hpp"
#include "orthant/stats.hpp"

namespace orthant {

/// i.i.d. categorical draws from the atom weights; value i is a pure
/// function of (seed, i).
inline std::vector<Point> sample_measure(const DiscreteMeasure& mu, int n,
                                         std::uint64_t seed) {
    std::vector<Point> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double u =
            static_cast<double>(CounterRng::value(seed, i) >> 11) * 0x1.0p-53;
        double acc = 0;
        const Point* pick = &mu.atoms().back().first;
        for (auto& [p, w] : mu.atoms()) {
            acc += w;
            if (u < acc) {
                pick = &p;
                break;
            }
        }
        out.push_back(*pick);
    }
    return out;
}

/// Correction matrix of the central limit theorem on the axes of tau:
/// the inverse of I - E[M] restricted to those axes, where M is the
/// derivative of the projected translated log map at the mean.
inline Matrix a_matrix(const OrthantSpace& space, const DiscreteMeasure& mu,
                       const Point& x_star, AxisSet tau) {
    const std::vector<int> axes = tau.axes();
    const int p = static_cast<int>(axes.size());
    Matrix mean_m = Matrix::Zero(space.ambient_dim(), space.ambient_dim());
    for (auto& [pt, w] : mu.atoms())
        mean_m += w * derivative_matrix(space, x_star, pt);
    Matrix minv = Matrix::Identity(p, p);
    for (int r = 0; r < p; ++r)
        for (int c = 0; c < p; ++c) minv(r, c) -= mean_m(axes[r], axes[c]);
    Eigen::FullPivLU<Matrix> lu(minv);
    if (!lu.isInvertible())
        throw SingularMatrix("I - E[M] is singular on " + tau.to_string());
    return lu.inverse();
}

/// One Gaussian piece of the limiting-distribution prediction.
struct CltPiece {
    AxisSet tau;                      // E u F
    AxisSet f;                        // the extra axes (empty for tau = sigma)
    std::vector<double> w_dir;        // chosen interior direction, F axes order
    Matrix a;                         // A_{sigma,tau} on the axes of tau
    Matrix v;                         // cov of the selected Euclidean variable
    Matrix covariance;                // A^T V A
    std::vector<std::vector<double>> theta_dirs;  // flagged directions
    bool theta_full = false;
};

struct CltPrediction {
    Point x_star;
    AxisSet sigma;
    std::vector<CltPiece> pieces;  // sigma piece first, then co-bounding taus
    int theta_resolution = 0;
};

/// Builds the Gaussian predictions of the limiting distribution of scaled
/// sample means: verifies the mean, checks the atoms stay off the
/// support-change set, estimates each Theta set, and assembles the
/// covariances A^T V A.  Pieces with empty Theta carry the zero variable and
/// are omitted.
inline CltPrediction predict(const OrthantSpace& space,
                             const DiscreteMeasure& mu, const Point& x_star,
                             int theta_resolution = 128,
                             int sphere_samples = 64, double tol = 1e-8) {
    MeanCertificate cert = verify_mean(space, mu, x_star, sphere_samples, tol);
    if (!cert.pass)
        throw PreconditionFailed(
            "predict: x* fails the Frechet-mean optimality conditions "
            "(residual " +
            std::to_string(cert.fixed_point_residual) + ")");
    int d_hits = 0;
    for (auto& [p, w] : mu.atoms())
        if (in_D(space, x_star, p)) ++d_hits;
    if (d_hits > 0)
        throw PreconditionFailed(
            "predict: " + std::to_string(d_hits) +
            " atom(s) lie in D_{x*}, the support-change set must be null");

    CltPrediction pred;
    pred.x_star = x_star;
    pred.sigma = x_star.support();
    pred.theta_resolution = theta_resolution;
    const AxisSet e = pred.sigma;
    const int l = space.local_codimension(e);

    auto covariance_of = [&](const std::vector<AmbientVector>& vals,
                             const std::vector<int>& axes) {
        const int p = static_cast<int>(axes.size());
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(p);
        size_t i = 0;
        for (auto& [pt, w] : mu.atoms()) {
            for (int c = 0; c < p; ++c) mean[c] += w * vals[i][axes[c]];
            ++i;
        }
        Matrix v = Matrix::Zero(p, p);
        i = 0;
        for (auto& [pt, w] : mu.atoms()) {
            Eigen::VectorXd d(p);
            for (int c = 0; c < p; ++c) d[c] = vals[i][axes[c]] - mean[c];
            v += w * (d * d.transpose());
            ++i;
        }
        return v;
    };

    // The sigma piece: the projected translated log map.
    {
        CltPiece piece;
        piece.tau = e;
        piece.theta_full = true;
        std::vector<AmbientVector> vals;
        for (auto& [p, w] : mu.atoms())
            vals.push_back(project_axes(translated_log(space, x_star, p), e));
        const std::vector<int> axes = e.axes();
        piece.v = covariance_of(vals, axes);
        piece.a = e.empty() ? Matrix::Zero(0, 0)
                            : a_matrix(space, mu, x_star, e);
        piece.covariance = piece.a.transpose() * piece.v * piece.a;
        pred.pieces.push_back(std::move(piece));
    }

    for (AxisSet tau : space.cobounding_strata(e)) {
        const AxisSet f = tau - e;
        const std::vector<int> f_axes = f.axes();
        const ThetaEstimate theta =
            theta_set(space, mu, x_star, tau, theta_resolution);
        if (theta.flagged == 0) continue;  // zero variable, no Gaussian piece

        CltPiece piece;
        piece.tau = tau;
        piece.f = f;
        piece.theta_full =
            theta.flagged == static_cast<int>(theta.dirs.size());
        for (size_t i = 0; i < theta.dirs.size(); ++i)
            if (theta.flags[i]) piece.theta_dirs.push_back(theta.dirs[i]);

        const int seg_dim = f.size();
        if (seg_dim > 1) {
            // Need interior directions (theorem hypothesis (iv)): the
            // angular centroid of a convex flagged set is interior when the
            // set has more than a lone grid point.
            if (theta.flagged == 1 && !piece.theta_full)
                throw PreconditionFailed(
                    "predict: Theta for " + tau.to_string() +
                    " appears to have empty interior at the grid resolution");
        }
        std::vector<double> centroid(f_axes.size(), 0.0);
        for (auto& dir : piece.theta_dirs)
            for (size_t c = 0; c < centroid.size(); ++c) centroid[c] += dir[c];
        double norm = 0;
        for (double v : centroid) norm += v * v;
        norm = std::sqrt(norm);
        for (auto& v : centroid) v /= norm;
        piece.w_dir = centroid;

        const TangentVector w =
            detail::tangent_from_dir(space, x_star, f_axes, centroid);
        std::vector<AmbientVector> vals;
        for (auto& [p, wt] : mu.atoms())
            vals.push_back(psi_tau(space, x_star, w, p));
        const std::vector<int> axes = tau.axes();
        piece.v = covariance_of(vals, axes);
        piece.a = a_matrix(space, mu, x_star, tau);
        piece.covariance = piece.a.transpose() * piece.v * piece.a;
        pred.pieces.push_back(std::move(piece));
    }
    return pred;
}

/// Density (or point mass, when the remaining coordinates are empty) of the
/// folded limiting distribution on the piece R(E) x O(F): the Gaussian of
/// the single full-Theta stratum tau0 integrated over the negative range of
/// the F0 \ F coordinates.  One folded coordinate is handled analytically,
/// higher folds by quasi-Monte-Carlo with a reported error estimate.
struct FoldedDensity {
    double value = 0;
    double qmc_error = 0;
};

inline FoldedDensity folded_density(const OrthantSpace& space,
                                    const CltPrediction& pred, AxisSet f,
                                    const AmbientVector& z) {
    // Hypothesis: a unique co-bounding stratum of minimal local codimension
    // whose Theta is the full segment.
    const CltPiece* tau0 = nullptr;
    int best_codim = std::numeric_limits<int>::max();
    bool unique = true;
    for (auto& piece : pred.pieces) {
        if (piece.tau == pred.sigma) continue;
        const int codim = space.max_dim() - piece.tau.size();
        if (codim < best_codim) {
            best_codim = codim;
            tau0 = &piece;
            unique = true;
        } else if (codim == best_codim) {
            unique = false;
        }
    }
    if (!tau0 || !unique || !tau0->theta_full)
        throw HypothesisNotMet(
            "folded_density requires a unique minimal-codimension stratum "
            "with full Theta");
    const AxisSet f0 = tau0->f;
    if (!f0.contains(f))
        throw HypothesisNotMet("piece axes " + f.to_string() +
                               " not contained in F0 = " + f0.to_string());

    const std::vector<int> tau_axes = tau0->tau.axes();
    const int p = static_cast<int>(tau_axes.size());
    const Matrix& C = tau0->covariance;
    Eigen::SelfAdjointEigenSolver<Matrix> es(C);
    if (es.eigenvalues().minCoeff() <= 1e-12 * (1.0 + es.eigenvalues().maxCoeff()))
        throw HypothesisNotMet(
            "limiting covariance is singular; the folded density is not "
            "absolutely continuous");

    std::vector<int> kept, folded;
    const AxisSet keep_axes = pred.sigma | f;
    for (int i = 0; i < p; ++i)
        (keep_axes.contains(tau_axes[i]) ? kept : folded).push_back(i);
    const int q = static_cast<int>(folded.size());

    Eigen::VectorXd zk(kept.size());
    for (size_t i = 0; i < kept.size(); ++i) zk[i] = z[tau_axes[kept[i]]];

    const double two_pi = 6.283185307179586476925286766559;
    if (kept.empty()) {
        // Pure orthant mass P(Z <= 0 componentwise).
        Matrix cff(q, q);
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c) cff(r, c) = C(folded[r], folded[c]);
        if (q == 1) return {normal_cdf(0.0), 0.0};
        Eigen::LLT<Matrix> llt(cff);
        Matrix lmat = llt.matrixL();
        // QMC over the folded coordinates via sequential conditioning.
        const int n_pts = 8192, batches = 8;
        std::vector<double> batch_sum(batches, 0.0);
        static const int primes[] = {2, 3, 5, 7, 11, 13};
        for (int i = 0; i < n_pts; ++i) {
            Eigen::VectorXd y(q);
            double prob = 1.0;
            for (int d = 0; d < q; ++d) {
                double shift = 0;
                for (int c = 0; c < d; ++c) shift += lmat(d, c) * y[c];
                const double hi = (0.0 - shift) / lmat(d, d);
                const double ph = normal_cdf(hi);
                prob *= ph;
                if (ph <= 0) break;
                const double u = std::clamp(halton(i, primes[d]) * ph,
                                            1e-15, ph * (1 - 1e-12));
                y[d] = normal_quantile(u);
            }
            batch_sum[i % batches] += prob;
        }
        double mean = 0;
        for (double b : batch_sum) mean += b;
        mean /= n_pts;
        double var = 0;
        for (double b : batch_sum) {
            const double d = b / (n_pts / batches) - mean;
            var += d * d;
        }
        return {mean, std::sqrt(var / (batches * (batches - 1)))};
    }

    // Marginal density at kept coordinates.
    Matrix ckk(kept.size(), kept.size());
    for (size_t r = 0; r < kept.size(); ++r)
        for (size_t c = 0; c < kept.size(); ++c)
            ckk(r, c) = C(kept[r], kept[c]);
    Eigen::LLT<Matrix> lkk(ckk);
    const Eigen::VectorXd sol = lkk.solve(zk);
    double det = 1.0;
    for (size_t i = 0; i < kept.size(); ++i) det *= lkk.matrixL()(i, i);
    const double marginal =
        std::exp(-0.5 * zk.dot(sol)) /
        (std::pow(two_pi, kept.size() / 2.0) * det);
    if (q == 0) return {marginal, 0.0};

    // Conditional distribution of the folded block.
    Matrix cfk(q, kept.size()), cff(q, q);
    for (int r = 0; r < q; ++r) {
        for (size_t c = 0; c < kept.size(); ++c)
            cfk(r, c) = C(folded[r], kept[c]);
        for (int c = 0; c < q; ++c) cff(r, c) = C(folded[r], folded[c]);
    }
    const Eigen::VectorXd cond_mean = cfk * lkk.solve(zk);
    const Matrix cond_cov = cff - cfk * lkk.solve(cfk.transpose());

    if (q == 1) {
        const double sd = std::sqrt(cond_cov(0, 0));
        return {marginal * normal_cdf((0.0 - cond_mean[0]) / sd), 0.0};
    }

    Eigen::LLT<Matrix> llt(cond_cov);
    Matrix lmat = llt.matrixL();
    const int n_pts = 8192, batches = 8;
    std::vector<double> batch_sum(batches, 0.0);
    static const int primes[] = {2, 3, 5, 7, 11, 13};
    for (int i = 0; i < n_pts; ++i) {
        Eigen::VectorXd y(q);
        double prob = 1.0;
        for (int d = 0; d < q; ++d) {
            double shift = cond_mean[d];
            for (int c = 0; c < d; ++c) shift += lmat(d, c) * y[c];
            const double hi = (0.0 - shift) / lmat(d, d);
            const double ph = normal_cdf(hi);
            prob *= ph;
            if (ph <= 0) break;
            const double u =
                std::clamp(halton(i, primes[d]) * ph, 1e-15, ph * (1 - 1e-12));
            y[d] = normal_quantile(u);
        }
        batch_sum[i % batches] += prob;
    }
    double mean = 0;
    for (double b : batch_sum) mean += b;
    mean /= n_pts;
    double var = 0;
    for (double b : batch_sum) {
        const double d = b / (n_pts / batches) - mean;
        var += d * d;
    }
    return {marginal * mean,
            marginal * std::sqrt(var / (batches * (batches - 1)))};
}

struct CltDraw {
    AxisSet stratum;       // support of the sample mean
    AmbientVector scaled;  // sqrt(n) * (sample mean - x*)
};

struct EmpiricalCLT {
    int n = 0;
    int reps = 0;
    std::uint64_t seed = 0;
    Point x_star;
    std::vector<CltDraw> draws;
};

/// Samples `reps` independent n-point empirical measures, computes each
/// sample Frechet mean, and records the scaled deviations.  Reps use
/// counter-derived keys, so results do not depend on the thread count.
inline EmpiricalCLT monte_carlo(const OrthantSpace& space,
                                const DiscreteMeasure& mu, int n, int reps,
                                std::uint64_t seed, int threads = 1,
                                const FrechetMeanOptions& mean_opts = {}) {
    EmpiricalCLT emp;
    emp.n = n;
    emp.reps = reps;
    emp.seed = seed;
    emp.x_star = frechet_mean(space, mu, mean_opts).mean;
    emp.draws.resize(reps);
    const AmbientVector center = embed(space, emp.x_star);
    const double scale = std::sqrt(static_cast<double>(n));

    std::string failure;
    auto run_range = [&](int lo, int hi) {
        for (int r = lo; r < hi; ++r) {
            try {
                const std::uint64_t key = CounterRng::derive_key(seed, r);
                const std::vector<Point> sample = sample_measure(mu, n, key);
                // Collapse duplicates into a weighted measure.
                std::vector<std::pair<Point, double>> atoms;
                for (auto& p : sample) {
                    bool found = false;
                    for (auto& [q, w] : atoms)
                        if (q == p) {
                            w += 1.0 / n;
                            found = true;
                            break;
                        }
                    if (!found) atoms.emplace_back(p, 1.0 / n);
                }
                // Renormalise away accumulated rounding.
                double sum = 0;
                for (auto& [q, w] : atoms) sum += w;
                for (auto& [q, w] : atoms) w /= sum;
                FrechetMeanOptions o = mean_opts;
                o.seed = key;
                const Point m =
                    frechet_mean(space, DiscreteMeasure(atoms), o).mean;
                emp.draws[r].stratum = m.support();
                emp.draws[r].scaled = scale * (embed(space, m) - center);
            } catch (const Error& err) {
                if (failure.empty())
                    failure = "rep " + std::to_string(r) + ": " + err.what();
            }
        }
    };

    if (threads <= 1) {
        run_range(0, reps);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (reps + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk, hi = std::min(reps, (t + 1) * chunk);
            if (lo < hi) pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    if (!failure.empty())
        throw NonConvergence("monte_carlo: " + failure, emp.x_star);
    return emp;
}

struct SupportFrequencies {
    std::map<std::uint64_t, int> stratum_counts;  // by stratum mask
    int inside = 0;
    int boundary = 0;             // within the resolution band of dK_mu
    int violations = 0;
    std::vector<int> violating_reps;
    double tolerance = 1e-6;
};

/// Tallies the strata hit by the Monte Carlo draws and flags draws whose
/// direction falls outside the predicted cone K_mu.  Draws within the
/// angular resolution of the Theta grids are binned as boundary cases, never
/// as violations.
inline SupportFrequencies support_frequencies(const OrthantSpace& space,
                                              const EmpiricalCLT& emp,
                                              const CltPrediction& pred) {
    SupportFrequencies out;
    const AxisSet e = pred.sigma;
    const double band =
        2.0 * 1.5707963267948966 / std::max(1, pred.theta_resolution);

    for (int r = 0; r < emp.reps; ++r) {
        const CltDraw& d = emp.draws[r];
        ++out.stratum_counts[d.stratum.mask()];
        const double vnorm = d.scaled.norm();
        if (vnorm <= 1e-12) {
            ++out.inside;
            continue;
        }
        double best = std::numeric_limits<double>::infinity();
        for (auto& piece : pred.pieces) {
            // Distance from the scaled draw to R(E) x C(Theta_tau).
            double off_sq = 0;
            for (int a = 0; a < space.ambient_dim(); ++a)
                if (!piece.tau.contains(a) && !e.contains(a))
                    off_sq += d.scaled[a] * d.scaled[a];
            const std::vector<int> f_axes = piece.f.axes();
            Eigen::VectorXd vf(f_axes.size());
            for (size_t i = 0; i < f_axes.size(); ++i)
                vf[i] = d.scaled[f_axes[i]];
            double cone_sq = vf.squaredNorm();
            if (piece.f.empty()) {
                cone_sq = 0;
            } else {
                for (auto& g : piece.theta_dirs) {
                    double dot = 0;
                    for (size_t i = 0; i < g.size(); ++i) dot += g[i] * vf[i];
                    dot = std::max(dot, 0.0);
                    double dist_sq = 0;
                    for (size_t i = 0; i < g.size(); ++i) {
                        const double diff = vf[i] - dot * g[i];
                        dist_sq += diff * diff;
                    }
                    cone_sq = std::min(cone_sq, dist_sq);
                }
            }
            best = std::min(best, std::sqrt(off_sq + cone_sq));
        }
        if (best <= out.tolerance * vnorm)
            ++out.inside;
        else if (best <= band * vnorm)
            ++out.boundary;
        else {
            ++out.violations;
            out.violating_reps.push_back(r);
        }
    }
    return out;
}

}  // namespace orthant
