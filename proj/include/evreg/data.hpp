#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evreg/errors.hpp"

namespace evreg {

// Right-censored time-to-event data: event=1 observed, event=0 censored.
struct Dataset {
    int p = 0;
    std::vector<double> x; // n*p, row-major
    std::vector<double> duration;
    std::vector<int> event;
    std::vector<std::string> feature_names;

    std::size_t n() const { return duration.size(); }
    const double* row(std::size_t i) const { return x.data() + static_cast<std::size_t>(p) * i; }
    double* row(std::size_t i) { return x.data() + static_cast<std::size_t>(p) * i; }
};

struct SimConfig {
    std::size_t n = 1000;
    std::uint64_t seed = 1;
    double censor_prob = 0.1;
    double c_lo = -1.0; // censoring offset drawn uniformly from [c_lo, 0)
};

// noiseless part of the simulator's log-time response
double sim_log_time(double x, double v);

// One-feature benchmark generator: X ~ U[-2,2], latent log-time
// sim_log_time(X, V) with V ~ N(0,1); censoring shifts the log-time down by
// a U[c_lo, 0) offset with probability censor_prob. Durations are exp(log-time).
Dataset simulate(const SimConfig& cfg);

// CSV with a header row; duration/event columns by name, remaining numeric
// columns become features unless an explicit list is given.
Dataset load_csv(const std::string& path, const std::string& duration_col,
                 const std::string& event_col,
                 const std::vector<std::string>& feature_cols = {});

void save_csv(const Dataset& ds, const std::string& path);

// z-scores features; constant columns pass through unscaled
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> sd;

    static Standardizer fit(const Dataset& ds);
    void apply(Dataset& ds) const;
};

// k test-index sets from a seeded permutation; sizes differ by at most one,
// earlier folds take the remainder
std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed);

// seeded split into (train, holdout) index sets; holdout gets round(frac*n)
std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_holdout(std::size_t n, double frac, std::uint64_t seed);

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx);

} // namespace evreg
