#include <cmath>
#include <vector>

#include "evreg/grfn.hpp"
#include "evreg/parallel.hpp"
#include "evreg/rng.hpp"

namespace evreg {
namespace {

struct NecPos {
    double nec;
    double pos;
};

// exact necessity/possibility of the interval once the mode m is fixed
NecPos per_mode(double m, double h, const RealInterval& I) {
    if (I.is_whole_line()) return {1.0, 1.0};
    if (h == 0.0) return {0.0, 1.0};
    auto memb = [&](double x) {
        double d = x - m;
        return std::exp(-0.5 * h * d * d);
    };
    auto nec = [&](double dist) { return -std::expm1(-0.5 * h * dist * dist); };
    if (I.is_point()) return {0.0, memb(I.lo)};
    if (I.lower_unbounded()) {
        if (m <= I.hi) return {nec(I.hi - m), 1.0};
        return {0.0, memb(I.hi)};
    }
    if (I.upper_unbounded()) {
        if (m >= I.lo) return {nec(m - I.lo), 1.0};
        return {0.0, memb(I.lo)};
    }
    if (m >= I.lo && m <= I.hi) return {nec(std::min(m - I.lo, I.hi - m)), 1.0};
    return {0.0, (m < I.lo) ? memb(I.lo) : memb(I.hi)};
}

struct Moments {
    double nec_sum = 0.0;
    double nec_sq = 0.0;
    double pos_sum = 0.0;
    double pos_sq = 0.0;
};

McEstimate finalize(const Moments& m, std::size_t n) {
    double nd = static_cast<double>(n);
    double bel = m.nec_sum / nd;
    double pl = m.pos_sum / nd;
    auto se = [&](double sum, double sq, double mean) {
        if (n < 2) return 0.0;
        double var = (sq - nd * mean * mean) / (nd - 1.0);
        return var > 0.0 ? std::sqrt(var / nd) : 0.0;
    };
    return {bel, pl, se(m.nec_sum, m.nec_sq, bel), se(m.pos_sum, m.pos_sq, pl)};
}

} // namespace

McEstimate mc_oracle(const GRFN& f, const RealInterval& interval, std::size_t n,
                     std::uint64_t seed, Exec exec) {
    if (n == 0) throw InvalidParameter("mc_oracle needs at least one draw");
    double sigma = std::sqrt(f.sigma2);

    auto draw = [&](std::uint64_t i) {
        double m = f.mu + sigma * counter_normal(seed, i);
        return per_mode(m, f.h, interval);
    };

    if (exec == Exec::Serial) {
        Moments acc;
        for (std::uint64_t i = 0; i < n; ++i) {
            NecPos np = draw(i);
            acc.nec_sum += np.nec;
            acc.nec_sq += np.nec * np.nec;
            acc.pos_sum += np.pos;
            acc.pos_sq += np.pos * np.pos;
        }
        return finalize(acc, n);
    }

    std::size_t nb = block_count(n, kReduceBlock);
    std::vector<Moments> blocks(nb);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        std::uint64_t lo = static_cast<std::uint64_t>(b) * kReduceBlock;
        std::uint64_t hi = std::min<std::uint64_t>(lo + kReduceBlock, n);
        Moments acc;
        for (std::uint64_t i = lo; i < hi; ++i) {
            NecPos np = draw(i);
            acc.nec_sum += np.nec;
            acc.nec_sq += np.nec * np.nec;
            acc.pos_sum += np.pos;
            acc.pos_sq += np.pos * np.pos;
        }
        blocks[b] = acc;
    }
    Moments total;
    for (const Moments& mb : blocks) {
        total.nec_sum += mb.nec_sum;
        total.nec_sq += mb.nec_sq;
        total.pos_sum += mb.pos_sum;
        total.pos_sq += mb.pos_sq;
    }
    return finalize(total, n);
}

} // namespace evreg
