#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "orthant/point.hpp"

namespace orthant {

/// Test oracle for the geodesic distance.  Enumerates every sequence of
/// strata consistent with monotone axis birth/death (an axis of x1 dies at
/// most once, an axis of x2 is born at most once, nothing else ever appears)
/// and minimises the length of the piecewise-linear path through each
/// sequence by block coordinate descent over the transition points, each
/// block solved exactly by active-set enumeration.  Entirely independent of
/// the support characterisation used by distance().
class BruteForceDistance {
public:
    BruteForceDistance(const OrthantSpace& space, const Point& x1,
                       const Point& x2, int max_carrier_len,
                       long node_budget = 2'000'000)
        : space_(space), budget_(node_budget) {
        M_ = space.ambient_dim();
        v1_ = dense(x1);
        v2_ = dense(x2);
        e1_ = x1.support();
        e2_ = x2.support();
        max_len_ = max_carrier_len;
    }

    double run() {
        best_ = -1;
        const AxisSet both = e1_ | e2_;
        // First stratum: contains E(x1), may already carry axes of x2 that
        // are born immediately.
        for (AxisSet s0 : space_.strata()) {
            if (!s0.contains(e1_) || !both.contains(s0)) continue;
            seq_ = {s0};
            extend();
        }
        if (best_ < 0)
            throw BudgetExceeded(
                "no admissible stratum sequence within carrier length " +
                std::to_string(max_len_));
        return best_;
    }

private:
    using Vec = std::vector<double>;

    Vec dense(const Point& p) const {
        Vec v(M_, 0.0);
        for (auto& [a, x] : p.coords()) v[a] = x;
        return v;
    }

    static double dist(const Vec& a, const Vec& b) {
        double s = 0;
        for (size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            s += d * d;
        }
        return std::sqrt(s);
    }

    void extend() {
        if (--budget_ < 0) throw BudgetExceeded("oracle node budget exhausted");
        const AxisSet cur = seq_.back();
        if (cur.contains(e2_)) {
            const double len = optimise_sequence();
            if (best_ < 0 || len < best_) best_ = len;
            // Longer sequences through the same prefix can still be shorter
            // in principle, so fall through and keep extending.
        }
        if (static_cast<int>(seq_.size()) >= max_len_) return;
        const AxisSet can_die = cur & (e1_ - e2_);
        const AxisSet can_born = (e2_ - e1_) - cur;
        if (can_die.empty() || can_born.empty()) return;
        can_die.for_each_subset([&](AxisSet die) {
            if (die.empty()) return;
            can_born.for_each_subset([&](AxisSet born) {
                if (born.empty()) return;
                const AxisSet next = (cur - die) | born;
                if (!space_.is_stratum(next)) return;
                seq_.push_back(next);
                extend();
                seq_.pop_back();
            });
        });
    }

    /// Length of the shortest path x1 -> q_1 -> ... -> q_j -> x2 with q_l in
    /// the closed face cone of S_(l-1) n S_l.
    double optimise_sequence() {
        const int j = static_cast<int>(seq_.size()) - 1;
        if (j == 0) return dist(v1_, v2_);
        std::vector<AxisSet> faces(j);
        for (int l = 0; l < j; ++l) faces[l] = seq_[l] & seq_[l + 1];

        double best = -1;
        for (int start = 0; start < 2; ++start) {
            std::vector<Vec> q(j, Vec(M_, 0.0));
            if (start == 0) {
                // Chord initialisation, clamped into the face cones.
                for (int l = 0; l < j; ++l) {
                    const double t = double(l + 1) / double(j + 1);
                    faces[l].for_each([&](int a) {
                        q[l][a] = std::max(0.0, (1 - t) * v1_[a] + t * v2_[a]);
                    });
                }
            }  // start == 1 keeps everything at the cone point
            const double len = descend(q, faces);
            if (best < 0 || len < best) best = len;
        }
        return best;
    }

    double path_length(const std::vector<Vec>& q) const {
        double len = dist(v1_, q.front());
        for (size_t l = 0; l + 1 < q.size(); ++l) len += dist(q[l], q[l + 1]);
        return len + dist(q.back(), v2_);
    }

    double descend(std::vector<Vec>& q, const std::vector<AxisSet>& faces) {
        const int j = static_cast<int>(q.size());
        double len = path_length(q);
        for (int sweep = 0; sweep < 500; ++sweep) {
            for (int l = 0; l < j; ++l) {
                const Vec& prev = (l == 0) ? v1_ : q[l - 1];
                const Vec& next = (l == j - 1) ? v2_ : q[l + 1];
                solve_block(prev, next, faces[l], q[l]);
            }
            const double nlen = path_length(q);
            if (len - nlen < 1e-12 * (1.0 + len)) return nlen;
            len = nlen;
        }
        return len;
    }

    /// Exact minimiser of |prev-q| + |q-next| over {q >= 0 supported on
    /// face}.  For each candidate active set the free part of the optimum
    /// lies on the segment between the free parts of prev and next, split by
    /// the ratio of the residual offsets.
    void solve_block(const Vec& prev, const Vec& next, AxisSet face,
                     Vec& out) const {
        double alpha2 = 0, beta2 = 0;
        for (int a = 0; a < M_; ++a) {
            if (!face.contains(a)) {
                alpha2 += prev[a] * prev[a];
                beta2 += next[a] * next[a];
            }
        }
        double best = -1;
        Vec cand(M_, 0.0), bestq;
        face.for_each_subset([&](AxisSet clamped) {
            double az2 = alpha2, bz2 = beta2;
            clamped.for_each([&](int a) {
                az2 += prev[a] * prev[a];
                bz2 += next[a] * next[a];
            });
            const double az = std::sqrt(az2), bz = std::sqrt(bz2);
            const double s = (az + bz > 0) ? az / (az + bz) : 0.5;
            std::fill(cand.begin(), cand.end(), 0.0);
            (face - clamped).for_each([&](int a) {
                cand[a] = std::max(0.0, (1 - s) * prev[a] + s * next[a]);
            });
            const double val = dist(prev, cand) + dist(cand, next);
            if (best < 0 || val < best) {
                best = val;
                bestq = cand;
            }
        });
        out = bestq;
    }

    const OrthantSpace& space_;
    long budget_;
    int M_ = 0;
    int max_len_ = 0;
    Vec v1_, v2_;
    AxisSet e1_, e2_;
    std::vector<AxisSet> seq_;
    double best_ = -1;
};

inline double brute_force_distance(const OrthantSpace& space, const Point& x1,
                                   const Point& x2, int max_carrier_len,
                                   long node_budget = 2'000'000) {
    return BruteForceDistance(space, x1, x2, max_carrier_len, node_budget).run();
}

}  // namespace orthant
