#pragma once

#include <cstdint>
#include <vector>

#include "evreg/data.hpp"
#include "evreg/model.hpp"
#include "evreg/parallel.hpp"

namespace evreg {

struct LossConfig {
    double lambda = 0.1;  // weight of the belief (pessimistic) term
    double epsilon = 1e-6;
    double xi = 0.1;  // precision penalty
    double rho = 0.1; // similarity-spread penalty
};

struct TrainConfig {
    LossConfig loss;
    double lr = 1e-3;
    int batch_size = 256;
    int max_epochs = 1000;
    int patience = 20;
    std::uint64_t seed = 1;
    Exec exec = Exec::Parallel;
};

struct EpochRow {
    int epoch;
    double train_cost;
    double val_cost;
};

struct FitResult {
    ModelParams params; // best-validation parameters
    std::vector<EpochRow> history;
    int best_epoch = 0;
    double best_val_cost = 0.0;
};

// Generalized negative log-likelihood of one observation in the log domain:
// an event contributes Bel/Pl of [y-eps, y+eps], a censored time Bel/Pl of
// [y, +inf); the two are mixed with weight lambda on the belief term.
double loss_sample(const GRFN& pred, double y, int event, const LossConfig& cfg);

// mean loss over the dataset plus h and gamma^2 penalties averaged per prototype
double total_cost(const ModelParams& params, const Dataset& ds, const LossConfig& cfg,
                  Exec exec = Exec::Parallel);

// exact gradient of total_cost via forward-mode duals through the belief
// formulas and hand-derived fusion backprop
std::vector<double> gradient(const ModelParams& params, const Dataset& ds,
                             const LossConfig& cfg, Exec exec = Exec::Parallel);

// minibatch Adam with early stopping on validation cost; returns the
// parameters of the best validation epoch
FitResult fit(const Dataset& train, const Dataset& val, int K, const TrainConfig& cfg);

} // namespace evreg
