#include "evreg/cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "evreg/data.hpp"
#include "evreg/metrics.hpp"
#include "evreg/pipeline.hpp"
#include "evreg/rng.hpp"

namespace evreg {
namespace {

struct CliValues {
    std::string config;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string data_csv;
    std::string duration_col = "duration";
    std::string event_col = "event";
    std::vector<std::string> features;
    std::uint64_t sim_n = 4000;
    std::uint64_t sim_val_n = 1000;
    double censor_prob = 0.1;
    double c_lo = -1.0;
    int K = 40;
    double lr = 1e-3;
    int batch_size = 256;
    int max_epochs = 1000;
    int patience = 20;
    double holdout_frac = 0.2;
    double lambda = 0.1;
    double epsilon = 1e-6;
    double xi = 0.1;
    double rho = 0.1;
    int grid_points = 100;
    std::vector<double> bpi_levels = {0.5, 0.9, 0.99};
    std::string mode = "midpoint";
    int cv_folds = 5;
    int cv_repeats = 5;
    double plot_lo = -2.0;
    double plot_hi = 2.0;
    int plot_points = 500;
    std::string checkpoint;
};

// every config path is mirrored by a flag; flags override the config file
void add_options(CLI::App& app, CliValues& v) {
    app.add_option("--config", v.config, "JSON config file; flags override its values");
    app.add_option("--seed", v.seed, "root seed for all randomness");
    app.add_option("--out-dir", v.out_dir, "output directory");
    app.add_option("--data.csv", v.data_csv, "input CSV; empty uses the simulator");
    app.add_option("--data.duration-col", v.duration_col, "duration column name");
    app.add_option("--data.event-col", v.event_col, "event column name");
    app.add_option("--data.features", v.features, "feature columns (default: all others)")
        ->delimiter(',');
    app.add_option("--data.sim.n", v.sim_n, "simulated training size");
    app.add_option("--data.sim.val-n", v.sim_val_n, "simulated validation size");
    app.add_option("--data.sim.censor-prob", v.censor_prob, "simulator censoring probability");
    app.add_option("--data.sim.c-lo", v.c_lo, "lower bound of the censoring log-offset");
    app.add_option("--model.k", v.K, "number of prototypes");
    app.add_option("--train.lr", v.lr, "Adam learning rate");
    app.add_option("--train.batch-size", v.batch_size, "minibatch size");
    app.add_option("--train.max-epochs", v.max_epochs, "epoch cap");
    app.add_option("--train.patience", v.patience, "early-stopping patience");
    app.add_option("--train.holdout-frac", v.holdout_frac, "validation fraction for CSV input");
    app.add_option("--train.loss.lambda", v.lambda, "belief-term weight");
    app.add_option("--train.loss.epsilon", v.epsilon, "event interval half-width");
    app.add_option("--train.loss.xi", v.xi, "precision penalty weight");
    app.add_option("--train.loss.rho", v.rho, "similarity-spread penalty weight");
    app.add_option("--eval.grid-points", v.grid_points, "survival grid resolution");
    app.add_option("--eval.bpi-levels", v.bpi_levels, "belief interval levels")->delimiter(',');
    app.add_option("--eval.mode", v.mode, "survival curve mode: belief|plausibility|midpoint");
    app.add_option("--cv.folds", v.cv_folds, "cross-validation folds");
    app.add_option("--cv.repeats", v.cv_repeats, "cross-validation repeats");
    app.add_option("--plot.lo", v.plot_lo, "plot grid lower bound (raw feature scale)");
    app.add_option("--plot.hi", v.plot_hi, "plot grid upper bound");
    app.add_option("--plot.points", v.plot_points, "plot grid size");
    app.add_option("--checkpoint", v.checkpoint, "model checkpoint path");
}

PipelineConfig resolve_config(const CLI::App& app, const CliValues& v) {
    PipelineConfig cfg;
    if (!v.config.empty()) {
        std::ifstream in(v.config);
        if (!in) throw FileNotFound("cannot open config '" + v.config + "'");
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded()) throw SchemaMismatch("config '" + v.config + "' is not valid JSON");
        cfg = config_from_json(j);
    }
    auto set = [&](const char* flag, auto apply) {
        if (app.count(flag) > 0) apply();
    };
    set("--seed", [&] { cfg.seed = v.seed; });
    set("--out-dir", [&] { cfg.out_dir = v.out_dir; });
    set("--data.csv", [&] { cfg.csv_path = v.data_csv; });
    set("--data.duration-col", [&] { cfg.duration_col = v.duration_col; });
    set("--data.event-col", [&] { cfg.event_col = v.event_col; });
    set("--data.features", [&] { cfg.feature_cols = v.features; });
    set("--data.sim.n", [&] { cfg.sim_n = v.sim_n; });
    set("--data.sim.val-n", [&] { cfg.sim_val_n = v.sim_val_n; });
    set("--data.sim.censor-prob", [&] { cfg.sim_censor_prob = v.censor_prob; });
    set("--data.sim.c-lo", [&] { cfg.sim_c_lo = v.c_lo; });
    set("--model.k", [&] { cfg.K = v.K; });
    set("--train.lr", [&] { cfg.train.lr = v.lr; });
    set("--train.batch-size", [&] { cfg.train.batch_size = v.batch_size; });
    set("--train.max-epochs", [&] { cfg.train.max_epochs = v.max_epochs; });
    set("--train.patience", [&] { cfg.train.patience = v.patience; });
    set("--train.holdout-frac", [&] { cfg.holdout_frac = v.holdout_frac; });
    set("--train.loss.lambda", [&] { cfg.train.loss.lambda = v.lambda; });
    set("--train.loss.epsilon", [&] { cfg.train.loss.epsilon = v.epsilon; });
    set("--train.loss.xi", [&] { cfg.train.loss.xi = v.xi; });
    set("--train.loss.rho", [&] { cfg.train.loss.rho = v.rho; });
    set("--eval.grid-points", [&] { cfg.grid_points = v.grid_points; });
    set("--eval.bpi-levels", [&] { cfg.bpi_levels = v.bpi_levels; });
    set("--eval.mode", [&] {
        nlohmann::json j;
        j["eval"]["mode"] = v.mode;
        cfg.mode = config_from_json(j).mode;
    });
    set("--cv.folds", [&] { cfg.cv_folds = v.cv_folds; });
    set("--cv.repeats", [&] { cfg.cv_repeats = v.cv_repeats; });
    set("--plot.lo", [&] { cfg.plot_lo = v.plot_lo; });
    set("--plot.hi", [&] { cfg.plot_hi = v.plot_hi; });
    set("--plot.points", [&] { cfg.plot_points = v.plot_points; });
    set("--checkpoint", [&] { cfg.checkpoint_path = v.checkpoint; });
    return cfg;
}

int cmd_simulate(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    // same derived seeds as simulator-mode training, so these files are the
    // exact splits a train run with this config would see
    SimConfig sim;
    sim.censor_prob = cfg.sim_censor_prob;
    sim.c_lo = cfg.sim_c_lo;
    sim.n = cfg.sim_n;
    sim.seed = derive_seed(cfg.seed, 0x7221);
    Dataset train = simulate(sim);
    save_csv(train, cfg.out_dir + "/simulated.csv");
    sim.n = cfg.sim_val_n;
    sim.seed = derive_seed(cfg.seed, 0x7222);
    Dataset val = simulate(sim);
    save_csv(val, cfg.out_dir + "/simulated_val.csv");
    write_manifest(cfg, "simulate");
    std::size_t events = 0;
    for (int e : train.event) events += static_cast<std::size_t>(e);
    std::cout << "wrote " << train.n() << " rows (" << events << " events) to " << cfg.out_dir
              << "/simulated.csv and " << val.n() << " rows to " << cfg.out_dir
              << "/simulated_val.csv\n";
    return 0;
}

int cmd_train(const PipelineConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    TrainRun run = run_training(cfg);

    save_checkpoint(cfg.out_dir + "/checkpoint.json", run.params, run.standardizer,
                    config_hash(cfg));
    write_history_csv(cfg.out_dir + "/history.csv", run.history);

    Dataset val = run.val_raw;
    run.standardizer.apply(val);
    std::vector<LognormalRFN> preds = forward_batch(run.params, val);
    bool reachable =
        write_predictions_csv(cfg.out_dir + "/predictions.csv", preds, cfg.bpi_levels);
    write_manifest(cfg, "train");

    std::cout << "trained " << run.history.size() << " epochs (best " << run.best_epoch
              << "), outputs in " << cfg.out_dir << "\n";
    if (!reachable) {
        std::cerr << "error: some predictions cannot reach the requested belief levels\n";
        return 3;
    }
    return 0;
}

int cmd_cv(const PipelineConfig& cfg) {
    if (cfg.csv_path.empty())
        throw InvalidParameter("cv requires --data.csv");
    std::filesystem::create_directories(cfg.out_dir);
    Dataset data = load_csv(cfg.csv_path, cfg.duration_col, cfg.event_col, cfg.feature_cols);
    CvReport report = run_cv(cfg, data);
    nlohmann::json j = report_to_json(report, cfg.bpi_levels);
    std::ofstream out(cfg.out_dir + "/cv_metrics.json", std::ios::binary);
    out << j.dump(2) << '\n';
    write_manifest(cfg, "cv");
    std::printf("c_index %.4f +- %.4f\nibs     %.4f +- %.4f\nibll    %.4f +- %.4f\n",
                report.mean.c_index, report.stderr_.c_index, report.mean.ibs,
                report.stderr_.ibs, report.mean.ibll, report.stderr_.ibll);
    return 0;
}

int cmd_eval(const PipelineConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw InvalidParameter("eval requires --checkpoint");
    if (cfg.csv_path.empty()) throw InvalidParameter("eval requires --data.csv");
    std::filesystem::create_directories(cfg.out_dir);
    Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
    Dataset data = load_csv(cfg.csv_path, cfg.duration_col, cfg.event_col, cfg.feature_cols);
    FoldMetrics fm = evaluate_model(ck.params, ck.standardizer, data, cfg);

    nlohmann::json j = {{"n_test", fm.n_test},
                        {"c_index", fm.c_index},
                        {"ibs", fm.ibs},
                        {"ibll", fm.ibll}};
    for (std::size_t l = 0; l < cfg.bpi_levels.size(); ++l)
        j["coverage"][format_double(cfg.bpi_levels[l])] = fm.coverage[l];
    std::ofstream out(cfg.out_dir + "/eval_metrics.json", std::ios::binary);
    out << j.dump(2) << '\n';
    write_manifest(cfg, "eval");
    std::printf("c_index %.4f  ibs %.4f  ibll %.4f  (n=%zu)\n", fm.c_index, fm.ibs, fm.ibll,
                fm.n_test);
    return 0;
}

int cmd_plotdata(const PipelineConfig& cfg) {
    if (cfg.checkpoint_path.empty()) throw InvalidParameter("plotdata requires --checkpoint");
    std::filesystem::create_directories(cfg.out_dir);
    Checkpoint ck = load_checkpoint(cfg.checkpoint_path);
    if (ck.params.p != 1)
        throw InvalidParameter("plotdata needs a single-feature model");
    if (cfg.plot_points < 2) throw InvalidParameter("plot grid needs at least two points");
    if (!(cfg.plot_hi > cfg.plot_lo)) throw DegenerateGrid("plot grid span must be positive");

    std::vector<double> xs = make_grid(cfg.plot_lo, cfg.plot_hi, cfg.plot_points);
    std::vector<LognormalRFN> preds;
    preds.reserve(xs.size());
    for (double x : xs) {
        double z = (x - ck.standardizer.mean[0]) / ck.standardizer.sd[0];
        preds.push_back(forward(ck.params, &z));
    }
    bool reachable =
        write_predictions_csv(cfg.out_dir + "/plotdata.csv", preds, cfg.bpi_levels, &xs);
    write_manifest(cfg, "plotdata");
    std::cout << "wrote " << xs.size() << " grid rows to " << cfg.out_dir << "/plotdata.csv\n";
    if (!reachable) {
        std::cerr << "error: some grid predictions cannot reach the requested belief levels\n";
        return 3;
    }
    return 0;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"evidential time-to-event regression with random fuzzy numbers"};
    app.require_subcommand(1);
    CliValues v;
    add_options(app, v);
    CLI::App* sc_sim = app.add_subcommand("simulate", "generate a benchmark dataset CSV");
    CLI::App* sc_train = app.add_subcommand("train", "fit a model and write its artifacts");
    CLI::App* sc_cv = app.add_subcommand("cv", "repeated k-fold cross-validation on a CSV");
    CLI::App* sc_plot = app.add_subcommand("plotdata", "prediction bands over a feature grid");
    CLI::App* sc_eval = app.add_subcommand("eval", "score a checkpoint on a CSV");
    for (CLI::App* sc : {sc_sim, sc_train, sc_cv, sc_plot, sc_eval}) sc->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        PipelineConfig cfg = resolve_config(app, v);
        if (app.got_subcommand(sc_sim)) return cmd_simulate(cfg);
        if (app.got_subcommand(sc_train)) return cmd_train(cfg);
        if (app.got_subcommand(sc_cv)) return cmd_cv(cfg);
        if (app.got_subcommand(sc_plot)) return cmd_plotdata(cfg);
        if (app.got_subcommand(sc_eval)) return cmd_eval(cfg);
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace evreg
