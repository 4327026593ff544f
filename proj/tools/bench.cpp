// Times the parallel kernels against their serial references and checks the
// results agree. Run after building: ./bench [draws]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "evreg/data.hpp"
#include "evreg/grfn.hpp"
#include "evreg/metrics.hpp"
#include "evreg/model.hpp"
#include "evreg/training.hpp"

using namespace evreg;

namespace {

template <class F>
double time_ms(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

void report(const char* name, double serial_ms, double parallel_ms, double diff) {
    std::printf("%-16s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   |diff| %.3g\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, diff);
}

} // namespace

int main(int argc, char** argv) {
    std::size_t draws = argc > 1 ? std::stoull(argv[1]) : 2'000'000;

    {
        GRFN f(0.3, 1.7, 2.5);
        RealInterval I(-0.5, 1.25);
        McEstimate se{}, pe{};
        double ts = time_ms([&] { se = mc_oracle(f, I, draws, 42, Exec::Serial); });
        double tp = time_ms([&] { pe = mc_oracle(f, I, draws, 42, Exec::Parallel); });
        report("mc_oracle", ts, tp, std::abs(se.bel - pe.bel) + std::abs(se.pl - pe.pl));
    }

    SimConfig sim;
    sim.n = 4000;
    sim.seed = 7;
    sim.censor_prob = 0.3;
    Dataset ds = simulate(sim);
    ModelParams params = init_params(ds, 40, 11);
    LossConfig loss;

    {
        std::vector<double> gs, gp;
        double ts = time_ms([&] { gs = gradient(params, ds, loss, Exec::Serial); });
        double tp = time_ms([&] { gp = gradient(params, ds, loss, Exec::Parallel); });
        double diff = 0.0;
        for (std::size_t i = 0; i < gs.size(); ++i) diff = std::max(diff, std::abs(gs[i] - gp[i]));
        report("batch gradient", ts, tp, diff);
    }

    {
        std::vector<double> grid = make_grid(*std::min_element(ds.duration.begin(), ds.duration.end()),
                                             *std::max_element(ds.duration.begin(), ds.duration.end()),
                                             100);
        std::vector<std::vector<double>> surv(ds.n());
        for (std::size_t i = 0; i < ds.n(); ++i)
            surv[i] = survival_curve(forward(params, ds.row(i)), grid);
        double vs = 0.0, vp = 0.0;
        double ts = time_ms([&] { vs = ibs(ds.duration, ds.event, surv, grid, Exec::Serial); });
        double tp = time_ms([&] { vp = ibs(ds.duration, ds.event, surv, grid, Exec::Parallel); });
        report("ibs", ts, tp, std::abs(vs - vp));
    }
    return 0;
}
