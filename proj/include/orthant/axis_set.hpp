#pragma once

#include <bit>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace orthant {

/// Subset of the coordinate axes 0..M-1, stored as a bitmask.  Supports the
/// usual set algebra plus subset enumeration; M is capped at 64 which is far
/// beyond desk scale.
class AxisSet {
public:
    constexpr AxisSet() = default;
    constexpr explicit AxisSet(std::uint64_t mask) : mask_(mask) {}
    AxisSet(std::initializer_list<int> axes) {
        for (int a : axes) insert(a);
    }

    static constexpr int max_axes = 64;

    static AxisSet single(int axis) { return AxisSet(std::uint64_t{1} << axis); }

    constexpr std::uint64_t mask() const { return mask_; }
    constexpr bool empty() const { return mask_ == 0; }
    constexpr int size() const { return std::popcount(mask_); }
    constexpr bool contains(int axis) const { return (mask_ >> axis) & 1u; }
    constexpr bool contains(AxisSet other) const { return (other.mask_ & ~mask_) == 0; }

    void insert(int axis) { mask_ |= std::uint64_t{1} << axis; }
    void erase(int axis) { mask_ &= ~(std::uint64_t{1} << axis); }

    constexpr AxisSet operator|(AxisSet o) const { return AxisSet(mask_ | o.mask_); }
    constexpr AxisSet operator&(AxisSet o) const { return AxisSet(mask_ & o.mask_); }
    /// Set difference.
    constexpr AxisSet operator-(AxisSet o) const { return AxisSet(mask_ & ~o.mask_); }

    constexpr bool operator==(const AxisSet&) const = default;
    constexpr bool operator<(AxisSet o) const { return mask_ < o.mask_; }

    constexpr bool intersects(AxisSet o) const { return (mask_ & o.mask_) != 0; }

    int lowest() const { return std::countr_zero(mask_); }

    std::vector<int> axes() const {
        std::vector<int> out;
        out.reserve(size());
        std::uint64_t m = mask_;
        while (m) {
            out.push_back(std::countr_zero(m));
            m &= m - 1;
        }
        return out;
    }

    /// Calls f(axis) for each member in increasing order.
    template <class F>
    void for_each(F&& f) const {
        std::uint64_t m = mask_;
        while (m) {
            f(std::countr_zero(m));
            m &= m - 1;
        }
    }

    /// Calls f(AxisSet) for every subset, the full set first and the empty
    /// set last.
    template <class F>
    void for_each_subset(F&& f) const {
        std::uint64_t s = mask_;
        while (true) {
            f(AxisSet(s));
            if (s == 0) break;
            s = (s - 1) & mask_;
        }
    }

    /// Calls f(AxisSet) for every non-empty proper subset.
    template <class F>
    void for_each_proper_subset(F&& f) const {
        std::uint64_t s = (mask_ - 1) & mask_;
        while (s != 0) {
            f(AxisSet(s));
            s = (s - 1) & mask_;
        }
    }

    std::string to_string() const {
        std::string out = "{";
        bool first = true;
        for_each([&](int a) {
            if (!first) out += ",";
            out += std::to_string(a);
            first = false;
        });
        out += "}";
        return out;
    }

private:
    std::uint64_t mask_ = 0;
};

}  // namespace orthant
