#pragma once

#include <cmath>
#include <cstdint>

#include "evreg/errors.hpp"
#include "evreg/interval.hpp"
#include "evreg/parallel.hpp"

namespace evreg {

// Gaussian random fuzzy number: a Gaussian possibility distribution with
// precision h whose mode is itself Gaussian, M ~ N(mu, sigma2).
// h == 0 is the vacuous case (membership identically 1, mode irrelevant).
struct GRFN {
    double mu;
    double sigma2;
    double h;

    GRFN(double mu_, double sigma2_, double h_) : mu(mu_), sigma2(sigma2_), h(h_) {
        if (!std::isfinite(mu) || !std::isfinite(sigma2) || !std::isfinite(h))
            throw InvalidParameter("GRFN parameters must be finite");
        if (sigma2 < 0.0) throw InvalidParameter("GRFN sigma2 must be >= 0");
        if (h < 0.0) throw InvalidParameter("GRFN h must be >= 0");
    }

    static GRFN vacuous() { return {0.0, 0.0, 0.0}; }
    bool is_vacuous() const { return h == 0.0; }
};

struct BeliefPlausibility {
    double bel;
    double pl;
};

// E[ sup of membership at x ] = (1+h*sigma2)^{-1/2} exp(-h (x-mu)^2 / (2 (1+h*sigma2)))
double contour(const GRFN& f, double x);

// Degrees of belief and plausibility of a closed interval under the
// expectation over the random mode.
BeliefPlausibility bel_pl(const GRFN& f, const RealInterval& interval);

// Precision-weighted conjunctive combination of two independent GRFNs.
GRFN combine(const GRFN& f1, const GRFN& f2);

// Smallest mu-centred interval [mu-r, mu+r] with Bel = alpha (|residual| <= 1e-9).
RealInterval bpi(const GRFN& f, double alpha);

struct McEstimate {
    double bel;
    double pl;
    double bel_se;
    double pl_se;
};

// Monte Carlo estimate of bel_pl by sampling modes; per-mode necessity and
// possibility are exact, so the only error is sampling noise.
McEstimate mc_oracle(const GRFN& f, const RealInterval& interval, std::size_t n,
                     std::uint64_t seed, Exec exec = Exec::Parallel);

// A positive random variable T whose log follows a GRFN.
struct LognormalRFN {
    GRFN inner;
    explicit LognormalRFN(const GRFN& f) : inner(f) {}
};

// Bel/Pl of the time interval [t_lo, t_hi], 0 <= t_lo <= t_hi <= +inf,
// evaluated through the log map.
BeliefPlausibility time_bel_pl(const LognormalRFN& f, double t_lo, double t_hi);

} // namespace evreg
