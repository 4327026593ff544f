#include "evreg/grfn.hpp"

#include <cmath>

#include "evreg/belief_kernels.hpp"

namespace evreg {

double contour(const GRFN& f, double x) {
    if (!std::isfinite(x)) throw InvalidParameter("contour point must be finite");
    return detail::pl_point(f.mu, f.sigma2, f.h, x);
}

BeliefPlausibility bel_pl(const GRFN& f, const RealInterval& interval) {
    auto [bel, pl] = detail::bel_pl_core(f.mu, f.sigma2, f.h, interval);
    return {bel, pl};
}

GRFN combine(const GRFN& f1, const GRFN& f2) {
    // a vacuous operand is neutral, bitwise
    if (f1.h == 0.0) return f2;
    if (f2.h == 0.0) return f1;
    double H = f1.h + f2.h;
    double mu = (f1.h * f1.mu + f2.h * f2.mu) / H;
    double s2 = (f1.h * f1.h * f1.sigma2 + f2.h * f2.h * f2.sigma2) / (H * H);
    return {mu, s2, H};
}

RealInterval bpi(const GRFN& f, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw InvalidParameter("bpi level must lie in [0, 1)");
    if (alpha == 0.0) return RealInterval::point(f.mu);
    if (f.h == 0.0)
        throw UnreachableLevel("vacuous prediction cannot reach a positive belief level");

    auto bel_at = [&](double r) {
        return bel_pl(f, RealInterval(f.mu - r, f.mu + r)).bel;
    };

    double r_hi = std::sqrt(f.sigma2) + 1.0 / std::sqrt(f.h);
    int doublings = 0;
    while (bel_at(r_hi) < alpha) {
        r_hi *= 2.0;
        if (++doublings > 200)
            throw UnreachableLevel("belief level not reached while expanding the interval");
    }
    double r_lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        double r = 0.5 * (r_lo + r_hi);
        double b = bel_at(r);
        if (std::abs(b - alpha) <= 1e-9)
            return {f.mu - r, f.mu + r};
        if (b < alpha)
            r_lo = r;
        else
            r_hi = r;
    }
    throw UnreachableLevel("belief level bisection failed to converge");
}

BeliefPlausibility time_bel_pl(const LognormalRFN& f, double t_lo, double t_hi) {
    if (std::isnan(t_lo) || std::isnan(t_hi))
        throw InvalidParameter("time interval endpoints must not be NaN");
    if (t_lo < 0.0) throw NegativeTime("time interval must start at >= 0");
    if (t_lo > t_hi) throw InvalidParameter("time interval endpoints out of order");
    double lo = (t_lo == 0.0) ? -std::numeric_limits<double>::infinity() : std::log(t_lo);
    double hi = std::log(t_hi);
    return bel_pl(f.inner, RealInterval(lo, hi));
}

} // namespace evreg
