#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "evreg/data.hpp"
#include "evreg/metrics.hpp"
#include "evreg/model.hpp"
#include "evreg/training.hpp"

namespace evreg {

// One resolved configuration drives every subcommand; the manifest written
// next to the outputs is this structure serialized back to JSON, so any run
// can be replayed from its manifest.
struct PipelineConfig {
    std::uint64_t seed = 1;
    std::string out_dir = ".";

    std::string csv_path; // empty: use the simulator
    std::string duration_col = "duration";
    std::string event_col = "event";
    std::vector<std::string> feature_cols;

    std::size_t sim_n = 4000;
    std::size_t sim_val_n = 1000;
    double sim_censor_prob = 0.1;
    double sim_c_lo = -1.0;

    int K = 40;
    TrainConfig train;       // train.seed is derived from seed at run time
    double holdout_frac = 0.2;

    int grid_points = 100;
    std::vector<double> bpi_levels = {0.5, 0.9, 0.99};
    SurvivalMode mode = SurvivalMode::Midpoint;

    int cv_folds = 5;
    int cv_repeats = 5;

    double plot_lo = -2.0;
    double plot_hi = 2.0;
    int plot_points = 500;
    std::string checkpoint_path;
};

nlohmann::json config_to_json(const PipelineConfig& cfg);
PipelineConfig config_from_json(const nlohmann::json& j);
std::string config_hash(const PipelineConfig& cfg);

void write_manifest(const PipelineConfig& cfg, const std::string& command);

struct Checkpoint {
    ModelParams params;
    Standardizer standardizer;
    std::string config_hash;
};

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Standardizer& st, const std::string& hash);
Checkpoint load_checkpoint(const std::string& path);

struct TrainRun {
    ModelParams params;
    Standardizer standardizer;
    std::vector<EpochRow> history;
    int best_epoch = 0;
    Dataset val_raw; // untouched copy of the validation split
};

// load or simulate, split, standardize on the training part, fit
TrainRun run_training(const PipelineConfig& cfg);

struct FoldMetrics {
    int repeat = 0;
    int fold = 0;
    std::size_t n_test = 0;
    double c_index = 0.0;
    double ibs = 0.0;
    double ibll = 0.0;
    std::vector<double> coverage; // aligned with bpi_levels
};

// metrics of a trained model on raw (unstandardized) test data
FoldMetrics evaluate_model(const ModelParams& params, const Standardizer& st,
                           const Dataset& test_raw, const PipelineConfig& cfg);

struct CvReport {
    std::vector<FoldMetrics> folds;
    FoldMetrics mean;
    FoldMetrics stderr_; // standard error of the fold means
};

CvReport run_cv(const PipelineConfig& cfg, const Dataset& data_raw);

nlohmann::json report_to_json(const CvReport& report, const std::vector<double>& levels);

void write_history_csv(const std::string& path, const std::vector<EpochRow>& history);

// returns true when every row had reachable BPI bounds; an optional leading
// feature column supports single-feature plot exports
bool write_predictions_csv(const std::string& path, const std::vector<LognormalRFN>& preds,
                           const std::vector<double>& levels,
                           const std::vector<double>* x = nullptr);

std::string format_double(double v); // shortest reread-exact digits

} // namespace evreg
