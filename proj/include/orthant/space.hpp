#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_set>
#include <vector>

#include "orthant/axis_set.hpp"
#include "orthant/errors.hpp"

namespace orthant {

/// An orthant space: a finite union of open positive orthants of R^M that is
/// closed under taking faces and satisfies the flag condition, so that the
/// intrinsic metric is CAT(0).  Strata are identified with their axis sets;
/// the empty set is the cone point.  Immutable after construction, all
/// queries are const.
class OrthantSpace {
public:
    OrthantSpace(int ambient_dim, const std::vector<AxisSet>& maximal_orthants)
        : ambient_dim_(ambient_dim) {
        if (ambient_dim < 0 || ambient_dim > AxisSet::max_axes)
            throw AxisOutOfRange("ambient_dim must be in [0, 64]");
        const AxisSet all(ambient_dim == 64 ? ~std::uint64_t{0}
                                            : (std::uint64_t{1} << ambient_dim) - 1);
        for (AxisSet m : maximal_orthants) {
            if (!all.contains(m))
                throw AxisOutOfRange("orthant " + m.to_string() +
                                     " has axes outside [0," +
                                     std::to_string(ambient_dim) + ")");
        }

        // Downward closure of the given orthants.
        for (AxisSet m : maximal_orthants)
            m.for_each_subset([&](AxisSet s) { members_.insert(s.mask()); });
        members_.insert(0);  // the cone point, even for an empty list

        strata_.reserve(members_.size());
        for (std::uint64_t m : members_) strata_.push_back(AxisSet(m));
        std::sort(strata_.begin(), strata_.end());

        check_flag_condition();

        for (AxisSet s : strata_) max_dim_ = std::max(max_dim_, s.size());
    }

    int ambient_dim() const { return ambient_dim_; }
    int max_dim() const { return max_dim_; }

    /// All strata in increasing bitmask order (deterministic).
    const std::vector<AxisSet>& strata() const { return strata_; }

    bool is_stratum(AxisSet s) const { return members_.count(s.mask()) != 0; }

    /// Def: E and F are compatible when O(E u F) lies in the space.
    bool compatible(AxisSet e, AxisSet f) const { return is_stratum(e | f); }

    /// Strata strictly containing E.
    std::vector<AxisSet> cobounding_strata(AxisSet e) const {
        std::vector<AxisSet> out;
        for (AxisSet s : strata_)
            if (s != e && s.contains(e)) out.push_back(s);
        return out;
    }

    /// Strata strictly contained in E.
    std::vector<AxisSet> bounding_strata(AxisSet e) const {
        std::vector<AxisSet> out;
        if (!is_stratum(e)) return out;
        e.for_each_subset([&](AxisSet s) {
            if (s != e) out.push_back(s);
        });
        std::sort(out.begin(), out.end());
        return out;
    }

    /// (max dimension over strata containing E) - |E|.
    int local_codimension(AxisSet e) const {
        int best = e.size();
        for (AxisSet s : strata_)
            if (s.contains(e)) best = std::max(best, s.size());
        return best - e.size();
    }

private:
    // The flag condition says every pairwise-compatible set of live axes
    // spans an orthant of the space.  By induction on clique size it is
    // enough that every stratum S with |S| >= 2 extends by any axis that is
    // pairwise compatible with all of S.
    void check_flag_condition() const {
        for (AxisSet s : strata_) {
            if (s.size() < 2) continue;
            for (int a = 0; a < ambient_dim_; ++a) {
                if (s.contains(a)) continue;
                const AxisSet av = AxisSet::single(a);
                if (!is_stratum(av)) continue;
                bool clique = true;
                s.for_each([&](int x) {
                    if (!is_stratum(av | AxisSet::single(x))) clique = false;
                });
                if (clique && !is_stratum(s | av))
                    throw FlagViolation("flag condition violated: orthant " +
                                            (s | av).to_string() +
                                            " is missing although all its "
                                            "2-faces are present",
                                        (s | av).mask());
            }
        }
    }

    int ambient_dim_ = 0;
    int max_dim_ = 0;
    std::unordered_set<std::uint64_t> members_;
    std::vector<AxisSet> strata_;
};

/// Convenience factory mirroring the space-file layout.
inline OrthantSpace build_space(int ambient_dim,
                                const std::vector<AxisSet>& maximal_orthants) {
    return OrthantSpace(ambient_dim, maximal_orthants);
}

}  // namespace orthant
