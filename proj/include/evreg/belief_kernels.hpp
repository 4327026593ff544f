#pragma once

// Closed-form and quadrature building blocks for GRFN belief/plausibility.
// Everything is templated on the scalar type so the same formulas run on
// plain doubles and on forward-mode duals (for training gradients).
// Branch decisions and quadrature panel plans use only value parts, keeping
// the dual path differentiable along the branch actually taken.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include "evreg/dual.hpp"
#include "evreg/interval.hpp"

namespace evreg::detail {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;
inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;

// density log-ratio kept inside the quadrature window; the discarded tail is
// below e^-80 of the window's own density maximum, so it stays negligible
// relative to the kept part even when the window sits far out in a tail
inline constexpr double kWindowLogDrop = 80.0;
inline constexpr int kMaxPanels = 24;

struct GaussLegendre24 {
    std::array<double, 24> x{};
    std::array<double, 24> w{};
};

// nodes/weights of 24-point Gauss-Legendre on [-1,1] via Newton on P_24
inline const GaussLegendre24& gauss_legendre_24() {
    static const GaussLegendre24 table = [] {
        GaussLegendre24 t;
        const int n = 24;
        for (int i = 0; i < n / 2; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) {
                    p0 = 1.0;
                    p1 = x;
                    for (int k = 2; k <= n; ++k) {
                        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                        p0 = p1;
                        p1 = p2;
                    }
                    dp = n * (x * p1 - p0) / (x * x - 1.0);
                    break;
                }
            }
            double w = 2.0 / ((1.0 - x * x) * dp * dp);
            t.x[i] = -x;
            t.w[i] = w;
            t.x[n - 1 - i] = x;
            t.w[n - 1 - i] = w;
        }
        return t;
    }();
    return table;
}

// min that returns the symmetric average at exact value ties, so the dual
// derivative at a cusp matches the central difference
template <class T>
T tie_min(const T& a, const T& b) {
    double av = value_of(a), bv = value_of(b);
    if (av < bv) return a;
    if (bv < av) return b;
    return (a + b) * T(0.5);
}

template <class T>
T clamp01(const T& x) {
    if (value_of(x) < 0.0) return T(0.0);
    if (value_of(x) > 1.0) return T(1.0);
    return x;
}

// P(alpha <= X <= beta) for X ~ N(mu, sigma^2); alpha/beta may be +-inf.
// erfc on the dominant tail keeps relative accuracy far from the mean.
template <class T>
T trunc_prob(const T& mu, const T& sigma, double alpha, double beta) {
    bool lo_inf = std::isinf(alpha) && alpha < 0.0;
    bool hi_inf = std::isinf(beta) && beta > 0.0;
    if (lo_inf && hi_inf) return T(1.0);
    if (lo_inf) {
        T z = (mu - T(beta)) / sigma;
        return T(0.5) * erfc(z * T(kInvSqrt2));
    }
    if (hi_inf) {
        T z = (T(alpha) - mu) / sigma;
        return T(0.5) * erfc(z * T(kInvSqrt2));
    }
    T z1 = (T(alpha) - mu) / sigma * T(kInvSqrt2);
    T z2 = (T(beta) - mu) / sigma * T(kInvSqrt2);
    if (value_of(z1) >= 0.0) return T(0.5) * (erfc(z1) - erfc(z2));
    if (value_of(z2) <= 0.0) return T(0.5) * (erfc(-z2) - erfc(-z1));
    return T(0.5) * (erf(z2) - erf(z1));
}

// E[ sup membership at x ] = (1+h sigma2)^{-1/2} exp(-h (x-mu)^2 / (2(1+h sigma2)))
template <class T>
T pl_point(const T& mu, const T& sigma2, const T& h, double x) {
    T q = T(1.0) + h * sigma2;
    T dx = T(x) - mu;
    return exp(-h * dx * dx / (T(2.0) * q)) / sqrt(q);
}

// E[ exp(-h (c-M)^2/2) ; alpha <= M <= beta ] for M ~ N(mu, sigma2), sigma2>0.
// Completing the square: pl_point(c) times the mass of N(m*, s*^2) in [alpha,beta],
// m* = (mu + h sigma2 c)/q, s*^2 = sigma2/q, q = 1 + h sigma2.
template <class T>
T kernel_mass(const T& mu, const T& sigma2, const T& h, double c, double alpha, double beta) {
    T q = T(1.0) + h * sigma2;
    T mstar = (mu + h * sigma2 * T(c)) / q;
    T sstar = sqrt(sigma2 / q);
    return pl_point(mu, sigma2, h, c) * trunc_prob(mstar, sstar, alpha, beta);
}

// integral of -expm1(-h (m-a)^2 / 2) * N(mu, sigma^2) density over [lo, hi]
// by fixed-order Gauss-Legendre panels; exact enough only while
// h (m-a)^2 stays O(1), which the caller guarantees via the split point
template <class T>
T necessity_near_quad(const T& mu, const T& sigma, const T& h, double a, double lo, double hi) {
    double muv = value_of(mu), sv = value_of(sigma), hv = value_of(h);
    // distance (in sds) from the density mode to the nearest window point;
    // clipping relative to the window's own density maximum keeps tail
    // windows intact instead of truncating them at a fixed sd count
    double zpk = 0.0;
    if (lo > muv)
        zpk = (lo - muv) / sv;
    else if (hi < muv)
        zpk = (muv - hi) / sv;
    double zcap = std::sqrt(zpk * zpk + 2.0 * kWindowLogDrop);
    double wlo = std::max(lo, muv - zcap * sv);
    double whi = std::min(hi, muv + zcap * sv);
    if (!(whi > wlo)) return T(0.0);
    // panels resolve the kernel scale, the density scale, and the density's
    // local tail decay rate zpk/sigma
    double scale = std::min({sv, 1.0 / std::sqrt(hv), 8.0 * sv / std::max(1.0, zpk)});
    int np = static_cast<int>(std::ceil((whi - wlo) / scale));
    np = std::clamp(np, 1, kMaxPanels);
    const auto& gl = gauss_legendre_24();
    T inv_s = T(1.0) / sigma;
    T norm = T(kInvSqrt2Pi) * inv_s;
    T total(0.0);
    double step = (whi - wlo) / np;
    for (int p = 0; p < np; ++p) {
        double x0 = wlo + p * step;
        double x1 = (p == np - 1) ? whi : x0 + step;
        double xm = 0.5 * (x0 + x1);
        double xr = 0.5 * (x1 - x0);
        T panel(0.0);
        for (int j = 0; j < 24; ++j) {
            double m = xm + xr * gl.x[j];
            T z = (T(m) - mu) * inv_s;
            T pdf = norm * exp(T(-0.5) * z * z);
            double u = m - a;
            T kern = -expm1(-h * T(0.5 * u * u));
            panel += T(gl.w[j]) * kern * pdf;
        }
        total += T(xr) * panel;
    }
    return total;
}

// E[ -expm1(-h (M-a)^2/2) ; a <= M <= hi ], sigma2 > 0, h > 0, hi may be +inf.
// Split at a + 1/sqrt(h): below it the kernel is within e^{-1/2} of zero and
// the difference P - kernel_mass would cancel catastrophically, so integrate
// -expm1 directly; above it the closed form is safe.
template <class T>
T necessity_mass(const T& mu, const T& sigma2, const T& h, double a, double hi) {
    T sigma = sqrt(sigma2);
    double ustar = 1.0 / std::sqrt(value_of(h));
    double split = a + ustar;
    T near = necessity_near_quad(mu, sigma, h, a, a, std::min(hi, split));
    if (hi <= split) return near;
    T far = trunc_prob(mu, sigma, split, hi) - kernel_mass(mu, sigma2, h, a, split, hi);
    return near + far;
}

// Bel and Pl of a closed interval for a GRFN (mu, sigma2, h), all branches.
template <class T>
std::pair<T, T> bel_pl_core(const T& mu, const T& sigma2, const T& h, const RealInterval& I) {
    if (I.is_whole_line()) return {T(1.0), T(1.0)};
    if (value_of(h) == 0.0) return {T(0.0), T(1.0)};

    if (I.is_point()) {
        T pl = pl_point(mu, sigma2, h, I.lo);
        return {T(0.0), clamp01(pl)};
    }

    T bel(0.0), pl(0.0);
    if (value_of(sigma2) == 0.0) {
        // degenerate mode: plain possibility/necessity of the Gaussian membership
        double m = value_of(mu);
        auto memb = [&](double x) {
            T d = T(x) - mu;
            return exp(-h * d * d * T(0.5));
        };
        auto nec_inside = [&](const T& dist) { return -expm1(-h * dist * dist * T(0.5)); };
        if (I.lower_unbounded()) {
            if (m <= I.hi) {
                pl = T(1.0);
                bel = nec_inside(T(I.hi) - mu);
            } else {
                pl = memb(I.hi);
            }
        } else if (I.upper_unbounded()) {
            if (m >= I.lo) {
                pl = T(1.0);
                bel = nec_inside(mu - T(I.lo));
            } else {
                pl = memb(I.lo);
            }
        } else {
            if (m >= I.lo && m <= I.hi) {
                pl = T(1.0);
                bel = nec_inside(tie_min(mu - T(I.lo), T(I.hi) - mu));
            } else {
                pl = (m < I.lo) ? memb(I.lo) : memb(I.hi);
            }
        }
    } else {
        T sigma = sqrt(sigma2);
        if (I.lower_unbounded()) {
            bel = necessity_mass(-mu, sigma2, h, -I.hi, kInf);
            pl = trunc_prob(mu, sigma, -kInf, I.hi) + kernel_mass(mu, sigma2, h, I.hi, I.hi, kInf);
        } else if (I.upper_unbounded()) {
            bel = necessity_mass(mu, sigma2, h, I.lo, kInf);
            pl = trunc_prob(mu, sigma, I.lo, kInf) + kernel_mass(mu, sigma2, h, I.lo, -kInf, I.lo);
        } else {
            double mid = 0.5 * (I.lo + I.hi);
            bel = necessity_mass(mu, sigma2, h, I.lo, mid) +
                  necessity_mass(-mu, sigma2, h, -I.hi, -mid);
            pl = trunc_prob(mu, sigma, I.lo, I.hi) +
                 kernel_mass(mu, sigma2, h, I.lo, -kInf, I.lo) +
                 kernel_mass(mu, sigma2, h, I.hi, I.hi, kInf);
        }
    }
    bel = clamp01(bel);
    pl = clamp01(pl);
    if (value_of(bel) > value_of(pl)) bel = pl;
    return {bel, pl};
}

} // namespace evreg::detail
