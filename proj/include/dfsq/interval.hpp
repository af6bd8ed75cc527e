#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace dfsq {

// A real interval, possibly unbounded on either side.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static Interval whole_line() { return {}; }

    bool lo_finite() const { return std::isfinite(lo); }
    bool hi_finite() const { return std::isfinite(hi); }
    bool finite() const { return lo_finite() && hi_finite(); }
    bool empty() const { return !(lo < hi); }
    double width() const { return hi - lo; }

    bool contains(double x) const { return x >= lo && x <= hi; }

    Interval intersect(const Interval& other) const {
        return {std::max(lo, other.lo), std::min(hi, other.hi)};
    }
};

} // namespace dfsq
