#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace evreg {

// Forward-mode dual number carrying three partial derivatives at once
// (enough for d/d(mu), d/d(sigma2), d/d(h) of the belief formulas).
struct Dual3 {
    double v = 0.0;
    std::array<double, 3> d{0.0, 0.0, 0.0};

    Dual3() = default;
    Dual3(double value) : v(value) {}
    Dual3(double value, double d0, double d1, double d2) : v(value), d{d0, d1, d2} {}
};

inline Dual3 operator+(const Dual3& a, const Dual3& b) {
    return {a.v + b.v, a.d[0] + b.d[0], a.d[1] + b.d[1], a.d[2] + b.d[2]};
}
inline Dual3 operator-(const Dual3& a, const Dual3& b) {
    return {a.v - b.v, a.d[0] - b.d[0], a.d[1] - b.d[1], a.d[2] - b.d[2]};
}
inline Dual3 operator-(const Dual3& a) { return {-a.v, -a.d[0], -a.d[1], -a.d[2]}; }
inline Dual3 operator*(const Dual3& a, const Dual3& b) {
    return {a.v * b.v,
            a.d[0] * b.v + a.v * b.d[0],
            a.d[1] * b.v + a.v * b.d[1],
            a.d[2] * b.v + a.v * b.d[2]};
}
inline Dual3 operator/(const Dual3& a, const Dual3& b) {
    double inv = 1.0 / b.v;
    double q = a.v * inv;
    return {q,
            (a.d[0] - q * b.d[0]) * inv,
            (a.d[1] - q * b.d[1]) * inv,
            (a.d[2] - q * b.d[2]) * inv};
}

inline Dual3& operator+=(Dual3& a, const Dual3& b) { a = a + b; return a; }
inline Dual3& operator-=(Dual3& a, const Dual3& b) { a = a - b; return a; }
inline Dual3& operator*=(Dual3& a, const Dual3& b) { a = a * b; return a; }

inline Dual3 chain(double fv, double dfdx, const Dual3& x) {
    return {fv, dfdx * x.d[0], dfdx * x.d[1], dfdx * x.d[2]};
}

inline Dual3 exp(const Dual3& x) { double e = std::exp(x.v); return chain(e, e, x); }
inline Dual3 expm1(const Dual3& x) { return chain(std::expm1(x.v), std::exp(x.v), x); }
inline Dual3 log(const Dual3& x) { return chain(std::log(x.v), 1.0 / x.v, x); }
inline Dual3 sqrt(const Dual3& x) {
    double s = std::sqrt(x.v);
    return chain(s, s > 0.0 ? 0.5 / s : 0.0, x);
}
inline Dual3 erf(const Dual3& x) {
    double g = 2.0 * std::numbers::inv_sqrtpi * std::exp(-x.v * x.v);
    return chain(std::erf(x.v), g, x);
}
inline Dual3 erfc(const Dual3& x) {
    double g = -2.0 * std::numbers::inv_sqrtpi * std::exp(-x.v * x.v);
    return chain(std::erfc(x.v), g, x);
}

// let unqualified calls in templated code pick the double overloads exactly
using std::erf;
using std::erfc;
using std::exp;
using std::expm1;
using std::log;
using std::sqrt;

inline double value_of(double x) { return x; }
inline double value_of(const Dual3& x) { return x.v; }

} // namespace evreg
