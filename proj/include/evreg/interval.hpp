#pragma once

#include <cmath>
#include <limits>

#include "evreg/errors.hpp"

namespace evreg {

// Closed real interval [lo, hi]; lo may be -inf and hi may be +inf.
struct RealInterval {
    double lo;
    double hi;

    RealInterval(double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (std::isnan(lo) || std::isnan(hi) || lo > hi)
            throw InvalidParameter("interval endpoints must satisfy lo <= hi and be non-NaN");
    }

    static RealInterval whole_line() {
        return {-std::numeric_limits<double>::infinity(),
                std::numeric_limits<double>::infinity()};
    }
    static RealInterval at_least(double a) {
        return {a, std::numeric_limits<double>::infinity()};
    }
    static RealInterval at_most(double b) {
        return {-std::numeric_limits<double>::infinity(), b};
    }
    static RealInterval point(double a) { return {a, a}; }

    bool lower_unbounded() const { return std::isinf(lo) && lo < 0; }
    bool upper_unbounded() const { return std::isinf(hi) && hi > 0; }
    bool is_whole_line() const { return lower_unbounded() && upper_unbounded(); }
    bool is_point() const { return lo == hi; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

} // namespace evreg
