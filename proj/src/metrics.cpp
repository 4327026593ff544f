#include "evreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "evreg/errors.hpp"

namespace evreg {

double StepSurvival::eval(double t) const {
    // value after the last drop at or before t
    auto it = std::upper_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

double StepSurvival::eval_left(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.begin()) return 1.0;
    return values[static_cast<std::size_t>(it - times.begin()) - 1];
}

StepSurvival km_estimator(const std::vector<double>& durations, const std::vector<int>& events) {
    if (durations.empty()) throw EmptyDataset("Kaplan-Meier needs at least one observation");
    if (durations.size() != events.size())
        throw DimensionMismatch("duration and event vectors differ in length");
    std::size_t n = durations.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (!(durations[i] > 0.0)) throw NegativeTime("durations must be positive");
        if (events[i] != 0 && events[i] != 1)
            throw InvalidParameter("event flags must be 0 or 1");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return durations[a] < durations[b]; });

    StepSurvival out;
    double s = 1.0;
    std::size_t i = 0;
    std::size_t at_risk = n;
    while (i < n) {
        double t = durations[order[i]];
        std::size_t d = 0, tied = 0;
        while (i < n && durations[order[i]] == t) {
            d += static_cast<std::size_t>(events[order[i]]);
            ++tied;
            ++i;
        }
        if (d > 0) {
            s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            out.times.push_back(t);
            out.values.push_back(s);
        }
        at_risk -= tied;
    }
    return out;
}

std::vector<double> survival_curve(const LognormalRFN& pred, const std::vector<double>& times,
                                   SurvivalMode mode) {
    std::vector<double> out;
    out.reserve(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        double t = times[i];
        if (i > 0 && t < times[i - 1]) throw InvalidParameter("time grid must be sorted");
        BeliefPlausibility bp = time_bel_pl(pred, t, std::numeric_limits<double>::infinity());
        switch (mode) {
        case SurvivalMode::Belief: out.push_back(bp.bel); break;
        case SurvivalMode::Plausibility: out.push_back(bp.pl); break;
        case SurvivalMode::Midpoint: out.push_back(0.5 * (bp.bel + bp.pl)); break;
        }
    }
    return out;
}

std::vector<double> make_grid(double lo, double hi, int points) {
    if (points < 2) throw InvalidParameter("grid needs at least two points");
    if (!(hi > lo)) throw DegenerateGrid("grid span must be positive");
    std::vector<double> g(points);
    for (int i = 0; i < points; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    return g;
}

namespace {

void check_surv_inputs(const std::vector<double>& durations, const std::vector<int>& events,
                       const std::vector<std::vector<double>>& surv,
                       const std::vector<double>& grid) {
    if (durations.empty()) throw EmptyDataset("no observations");
    if (durations.size() != events.size() || durations.size() != surv.size())
        throw DimensionMismatch("durations, events and survival rows must align");
    if (grid.size() < 2) throw DegenerateGrid("evaluation grid needs at least two points");
    if (!(grid.back() > grid.front())) throw DegenerateGrid("evaluation grid span is zero");
    for (const auto& row : surv)
        if (row.size() != grid.size())
            throw DimensionMismatch("survival row length differs from grid");
}

// index of the last grid point <= t (clamped to the grid)
std::size_t grid_index(const std::vector<double>& grid, double t) {
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    if (it == grid.begin()) return 0;
    return static_cast<std::size_t>(it - grid.begin()) - 1;
}

double trapezoid_mean(const std::vector<double>& grid, const std::vector<double>& f) {
    double area = 0.0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        area += 0.5 * (f[g] + f[g - 1]) * (grid[g] - grid[g - 1]);
    return area / (grid.back() - grid.front());
}

// shared IPCW evaluation: score(t) averaged over subjects with Graf weights,
// then integrated over the grid
template <class ScoreEvent, class ScoreSurvivor>
double ipcw_integral(const std::vector<double>& durations, const std::vector<int>& events,
                     const std::vector<std::vector<double>>& surv,
                     const std::vector<double>& grid, Exec exec, ScoreEvent score_event,
                     ScoreSurvivor score_survivor) {
    check_surv_inputs(durations, events, surv, grid);
    std::size_t n = durations.size();
    std::size_t G = grid.size();

    std::vector<int> flipped(n);
    for (std::size_t i = 0; i < n; ++i) flipped[i] = 1 - events[i];
    StepSurvival cens = km_estimator(durations, flipped);

    std::vector<double> g_at_t(n); // G(T_i-)
    for (std::size_t i = 0; i < n; ++i) g_at_t[i] = cens.eval_left(durations[i]);

    std::vector<double> bs(G, 0.0);
    auto eval_point = [&](std::size_t g) {
        double t = grid[g];
        double g_t = cens.eval(t);
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double s = surv[i][g];
            if (durations[i] <= t) {
                if (events[i] == 1 && g_at_t[i] > 0.0)
                    sum += score_event(s) / g_at_t[i];
            } else if (g_t > 0.0) {
                sum += score_survivor(s) / g_t;
            }
        }
        return sum / static_cast<double>(n);
    };

    if (exec == Exec::Serial) {
        for (std::size_t g = 0; g < G; ++g) bs[g] = eval_point(g);
    } else {
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t g = 0; g < static_cast<std::ptrdiff_t>(G); ++g)
            bs[g] = eval_point(static_cast<std::size_t>(g));
    }
    return trapezoid_mean(grid, bs);
}

} // namespace

double c_index_td(const std::vector<double>& durations, const std::vector<int>& events,
                  const std::vector<std::vector<double>>& surv, const std::vector<double>& grid) {
    check_surv_inputs(durations, events, surv, grid);
    std::size_t n = durations.size();

    double concordant = 0.0;
    std::size_t comparable = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (events[i] != 1) continue;
        std::size_t gi = grid_index(grid, durations[i]);
        double si = surv[i][gi];
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            bool cmp = durations[i] < durations[j] ||
                       (durations[i] == durations[j] && events[j] == 0);
            if (!cmp) continue;
            ++comparable;
            double sj = surv[j][gi];
            if (si < sj)
                concordant += 1.0;
            else if (si == sj)
                concordant += 0.5;
        }
    }
    if (comparable == 0) throw NoComparablePairs("no comparable pairs for concordance");
    return concordant / static_cast<double>(comparable);
}

double ibs(const std::vector<double>& durations, const std::vector<int>& events,
           const std::vector<std::vector<double>>& surv, const std::vector<double>& grid,
           Exec exec) {
    return ipcw_integral(
        durations, events, surv, grid, exec, [](double s) { return s * s; },
        [](double s) { return (1.0 - s) * (1.0 - s); });
}

double ibll(const std::vector<double>& durations, const std::vector<int>& events,
            const std::vector<std::vector<double>>& surv, const std::vector<double>& grid,
            Exec exec) {
    auto clamp = [](double s) { return std::clamp(s, 1e-7, 1.0 - 1e-7); };
    return ipcw_integral(
        durations, events, surv, grid, exec,
        [&](double s) { return -std::log(1.0 - clamp(s)); },
        [&](double s) { return -std::log(clamp(s)); });
}

double bpi_coverage(const std::vector<LognormalRFN>& preds, const std::vector<double>& y_log,
                    double alpha) {
    if (preds.empty()) throw EmptyDataset("no predictions to score");
    if (preds.size() != y_log.size())
        throw DimensionMismatch("predictions and targets differ in length");
    std::size_t inside = 0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        RealInterval I = bpi(preds[i].inner, alpha);
        if (I.contains(y_log[i])) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(preds.size());
}

} // namespace evreg
