#pragma once

#include <vector>

#include "evreg/grfn.hpp"
#include "evreg/parallel.hpp"

namespace evreg {

// right-continuous step function starting at 1
struct StepSurvival {
    std::vector<double> times;  // drop locations, ascending
    std::vector<double> values; // value from each drop onward

    double eval(double t) const;      // S(t)
    double eval_left(double t) const; // S(t-)
};

StepSurvival km_estimator(const std::vector<double>& durations, const std::vector<int>& events);

enum class SurvivalMode { Belief, Plausibility, Midpoint };

// S(t|x) read off the prediction as Bel/Pl of surviving past t, i.e. of the
// time ray [t, +inf); Midpoint averages the two
std::vector<double> survival_curve(const LognormalRFN& pred, const std::vector<double>& times,
                                   SurvivalMode mode = SurvivalMode::Midpoint);

std::vector<double> make_grid(double lo, double hi, int points);

// Time-dependent concordance (Antolini): among comparable pairs, how often
// the subject that failed first has the lower predicted survival at its own
// failure time. surv is n x grid.size(), each row S(.|x_i) on the grid.
double c_index_td(const std::vector<double>& durations, const std::vector<int>& events,
                  const std::vector<std::vector<double>>& surv, const std::vector<double>& grid);

// Integrated Brier score with inverse-censoring weights from the
// Kaplan-Meier estimate of the censoring distribution on the same sample.
double ibs(const std::vector<double>& durations, const std::vector<int>& events,
           const std::vector<std::vector<double>>& surv, const std::vector<double>& grid,
           Exec exec = Exec::Parallel);

// Integrated binomial log-likelihood, same weighting and grid handling as ibs
double ibll(const std::vector<double>& durations, const std::vector<int>& events,
            const std::vector<std::vector<double>>& surv, const std::vector<double>& grid,
            Exec exec = Exec::Parallel);

// fraction of log-scale targets falling inside the level-alpha belief
// prediction interval
double bpi_coverage(const std::vector<LognormalRFN>& preds, const std::vector<double>& y_log,
                    double alpha);

} // namespace evreg
