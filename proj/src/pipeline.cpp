#include "evreg/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "evreg/rng.hpp"

namespace evreg {

namespace {

std::string mode_name(SurvivalMode m) {
    switch (m) {
    case SurvivalMode::Belief: return "belief";
    case SurvivalMode::Plausibility: return "plausibility";
    case SurvivalMode::Midpoint: return "midpoint";
    }
    return "midpoint";
}

SurvivalMode mode_from_name(const std::string& s) {
    if (s == "belief") return SurvivalMode::Belief;
    if (s == "plausibility") return SurvivalMode::Plausibility;
    if (s == "midpoint") return SurvivalMode::Midpoint;
    throw InvalidParameter("unknown survival mode '" + s + "'");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileNotFound("cannot write '" + path + "'");
    out << text;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileNotFound("cannot open '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return text;
}

} // namespace

std::string format_double(double v) {
    // shortest digit string that parses back to the same double
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["data"] = {{"csv", cfg.csv_path},
                 {"duration_col", cfg.duration_col},
                 {"event_col", cfg.event_col},
                 {"features", cfg.feature_cols},
                 {"sim",
                  {{"n", cfg.sim_n},
                   {"val_n", cfg.sim_val_n},
                   {"censor_prob", cfg.sim_censor_prob},
                   {"c_lo", cfg.sim_c_lo}}}};
    j["model"] = {{"k", cfg.K}};
    j["train"] = {{"lr", cfg.train.lr},
                  {"batch_size", cfg.train.batch_size},
                  {"max_epochs", cfg.train.max_epochs},
                  {"patience", cfg.train.patience},
                  {"holdout_frac", cfg.holdout_frac},
                  {"loss",
                   {{"lambda", cfg.train.loss.lambda},
                    {"epsilon", cfg.train.loss.epsilon},
                    {"xi", cfg.train.loss.xi},
                    {"rho", cfg.train.loss.rho}}}};
    j["eval"] = {{"grid_points", cfg.grid_points},
                 {"bpi_levels", cfg.bpi_levels},
                 {"mode", mode_name(cfg.mode)}};
    j["cv"] = {{"folds", cfg.cv_folds}, {"repeats", cfg.cv_repeats}};
    j["plot"] = {{"lo", cfg.plot_lo}, {"hi", cfg.plot_hi}, {"points", cfg.plot_points}};
    j["checkpoint"] = cfg.checkpoint_path;
    return j;
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    auto get = [&](const nlohmann::json& obj, const char* key, auto& out) {
        if (obj.contains(key)) obj.at(key).get_to(out);
    };
    get(j, "seed", cfg.seed);
    get(j, "out_dir", cfg.out_dir);
    if (j.contains("data")) {
        const auto& d = j["data"];
        get(d, "csv", cfg.csv_path);
        get(d, "duration_col", cfg.duration_col);
        get(d, "event_col", cfg.event_col);
        get(d, "features", cfg.feature_cols);
        if (d.contains("sim")) {
            const auto& s = d["sim"];
            get(s, "n", cfg.sim_n);
            get(s, "val_n", cfg.sim_val_n);
            get(s, "censor_prob", cfg.sim_censor_prob);
            get(s, "c_lo", cfg.sim_c_lo);
        }
    }
    if (j.contains("model")) get(j["model"], "k", cfg.K);
    if (j.contains("train")) {
        const auto& t = j["train"];
        get(t, "lr", cfg.train.lr);
        get(t, "batch_size", cfg.train.batch_size);
        get(t, "max_epochs", cfg.train.max_epochs);
        get(t, "patience", cfg.train.patience);
        get(t, "holdout_frac", cfg.holdout_frac);
        if (t.contains("loss")) {
            const auto& l = t["loss"];
            get(l, "lambda", cfg.train.loss.lambda);
            get(l, "epsilon", cfg.train.loss.epsilon);
            get(l, "xi", cfg.train.loss.xi);
            get(l, "rho", cfg.train.loss.rho);
        }
    }
    if (j.contains("eval")) {
        const auto& e = j["eval"];
        get(e, "grid_points", cfg.grid_points);
        get(e, "bpi_levels", cfg.bpi_levels);
        if (e.contains("mode")) cfg.mode = mode_from_name(e["mode"].get<std::string>());
    }
    if (j.contains("cv")) {
        get(j["cv"], "folds", cfg.cv_folds);
        get(j["cv"], "repeats", cfg.cv_repeats);
    }
    if (j.contains("plot")) {
        get(j["plot"], "lo", cfg.plot_lo);
        get(j["plot"], "hi", cfg.plot_hi);
        get(j["plot"], "points", cfg.plot_points);
    }
    get(j, "checkpoint", cfg.checkpoint_path);
    return cfg;
}

std::string config_hash(const PipelineConfig& cfg) {
    // where the outputs land must not change what the run computes
    PipelineConfig keyed = cfg;
    keyed.out_dir.clear();
    std::string text = config_to_json(keyed).dump();
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const PipelineConfig& cfg, const std::string& command) {
    nlohmann::json j = config_to_json(cfg);
    j["command"] = command;
    std::filesystem::create_directories(cfg.out_dir);
    write_text_file(cfg.out_dir + "/manifest.json", j.dump(2) + "\n");
}

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const Standardizer& st, const std::string& hash) {
    nlohmann::json j;
    j["format"] = "evreg-checkpoint-v1";
    j["K"] = params.K;
    j["p"] = params.p;
    j["theta"] = params.theta;
    j["standardizer"] = {{"mean", st.mean}, {"sd", st.sd}};
    j["config_hash"] = hash;
    write_text_file(path, j.dump() + "\n");
}

Checkpoint load_checkpoint(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || j.value("format", "") != "evreg-checkpoint-v1")
        throw SchemaMismatch("'" + path + "' is not a model checkpoint");
    Checkpoint ck;
    ck.params = ModelParams(j["K"].get<int>(), j["p"].get<int>());
    std::vector<double> theta = j["theta"].get<std::vector<double>>();
    if (theta.size() != ck.params.size())
        throw SchemaMismatch("checkpoint parameter vector has the wrong length");
    ck.params.theta = std::move(theta);
    ck.standardizer.mean = j["standardizer"]["mean"].get<std::vector<double>>();
    ck.standardizer.sd = j["standardizer"]["sd"].get<std::vector<double>>();
    if (ck.standardizer.mean.size() != static_cast<std::size_t>(ck.params.p) ||
        ck.standardizer.sd.size() != static_cast<std::size_t>(ck.params.p))
        throw SchemaMismatch("checkpoint standardizer does not match feature count");
    ck.config_hash = j.value("config_hash", "");
    return ck;
}

TrainRun run_training(const PipelineConfig& cfg) {
    Dataset train_raw, val_raw;
    if (cfg.csv_path.empty()) {
        SimConfig sim;
        sim.n = cfg.sim_n;
        sim.censor_prob = cfg.sim_censor_prob;
        sim.c_lo = cfg.sim_c_lo;
        sim.seed = derive_seed(cfg.seed, 0x7221);
        train_raw = simulate(sim);
        sim.n = cfg.sim_val_n;
        sim.seed = derive_seed(cfg.seed, 0x7222);
        val_raw = simulate(sim);
    } else {
        Dataset all = load_csv(cfg.csv_path, cfg.duration_col, cfg.event_col, cfg.feature_cols);
        auto [tr_idx, va_idx] = split_holdout(all.n(), cfg.holdout_frac, derive_seed(cfg.seed, 0x5907));
        train_raw = subset(all, tr_idx);
        val_raw = subset(all, va_idx);
    }

    Standardizer st = Standardizer::fit(train_raw);
    Dataset train = train_raw, val = val_raw;
    st.apply(train);
    st.apply(val);

    TrainConfig tc = cfg.train;
    tc.seed = derive_seed(cfg.seed, 0xf17);
    FitResult fr = fit(train, val, cfg.K, tc);

    TrainRun run;
    run.params = std::move(fr.params);
    run.standardizer = std::move(st);
    run.history = std::move(fr.history);
    run.best_epoch = fr.best_epoch;
    run.val_raw = std::move(val_raw);
    return run;
}

FoldMetrics evaluate_model(const ModelParams& params, const Standardizer& st,
                           const Dataset& test_raw, const PipelineConfig& cfg) {
    if (test_raw.n() == 0) throw EmptyDataset("empty test split");
    Dataset test = test_raw;
    st.apply(test);

    std::vector<LognormalRFN> preds = forward_batch(params, test);

    double lo = *std::min_element(test.duration.begin(), test.duration.end());
    double hi = *std::max_element(test.duration.begin(), test.duration.end());
    if (!(hi > lo)) throw DegenerateGrid("test durations span a single point");
    std::vector<double> grid = make_grid(lo, hi, cfg.grid_points);

    std::vector<std::vector<double>> surv(test.n());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(test.n()); ++i)
        surv[i] = survival_curve(preds[i], grid, cfg.mode);

    FoldMetrics fm;
    fm.n_test = test.n();
    fm.c_index = c_index_td(test.duration, test.event, surv, grid);
    fm.ibs = ibs(test.duration, test.event, surv, grid);
    fm.ibll = ibll(test.duration, test.event, surv, grid);

    std::vector<double> y_log(test.n());
    for (std::size_t i = 0; i < test.n(); ++i) y_log[i] = std::log(test.duration[i]);
    for (double level : cfg.bpi_levels) fm.coverage.push_back(bpi_coverage(preds, y_log, level));
    return fm;
}

CvReport run_cv(const PipelineConfig& cfg, const Dataset& data_raw) {
    if (cfg.cv_folds < 2) throw InvalidParameter("cross-validation needs at least 2 folds");
    if (cfg.cv_repeats < 1) throw InvalidParameter("cross-validation needs at least 1 repeat");

    CvReport report;
    for (int r = 0; r < cfg.cv_repeats; ++r) {
        auto folds = make_folds(data_raw.n(), cfg.cv_folds,
                                derive_seed(cfg.seed, 0x2000u + static_cast<std::uint64_t>(r)));
        for (int f = 0; f < cfg.cv_folds; ++f) {
            std::vector<std::size_t> train_idx;
            for (int g = 0; g < cfg.cv_folds; ++g)
                if (g != f) train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
            std::sort(train_idx.begin(), train_idx.end());

            Dataset cv_train_raw = subset(data_raw, train_idx);
            Dataset test_raw = subset(data_raw, folds[f]);

            std::uint64_t fold_seed =
                derive_seed(cfg.seed, 0x3000u + static_cast<std::uint64_t>(r * 64 + f));
            auto [tr_idx, ho_idx] = split_holdout(cv_train_raw.n(), cfg.holdout_frac, fold_seed);

            Standardizer st = Standardizer::fit(cv_train_raw);
            Dataset inner_train = subset(cv_train_raw, tr_idx);
            Dataset inner_val = subset(cv_train_raw, ho_idx);
            st.apply(inner_train);
            st.apply(inner_val);

            TrainConfig tc = cfg.train;
            tc.seed = derive_seed(fold_seed, 0xf17);
            FitResult fr = fit(inner_train, inner_val, cfg.K, tc);

            FoldMetrics fm = evaluate_model(fr.params, st, test_raw, cfg);
            fm.repeat = r;
            fm.fold = f;
            report.folds.push_back(std::move(fm));
        }
    }

    std::size_t n = report.folds.size();
    std::size_t nl = cfg.bpi_levels.size();
    report.mean.coverage.assign(nl, 0.0);
    report.stderr_.coverage.assign(nl, 0.0);
    auto accumulate = [&](auto proj, double& mean_out, double& se_out) {
        double mean = 0.0;
        for (const FoldMetrics& fm : report.folds) mean += proj(fm);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (const FoldMetrics& fm : report.folds) {
            double d = proj(fm) - mean;
            ss += d * d;
        }
        double se = (n > 1) ? std::sqrt(ss / (static_cast<double>(n) - 1.0) /
                                        static_cast<double>(n))
                            : 0.0;
        mean_out = mean;
        se_out = se;
    };
    accumulate([](const FoldMetrics& f) { return f.c_index; }, report.mean.c_index,
               report.stderr_.c_index);
    accumulate([](const FoldMetrics& f) { return f.ibs; }, report.mean.ibs, report.stderr_.ibs);
    accumulate([](const FoldMetrics& f) { return f.ibll; }, report.mean.ibll,
               report.stderr_.ibll);
    for (std::size_t l = 0; l < nl; ++l)
        accumulate([&](const FoldMetrics& f) { return f.coverage[l]; }, report.mean.coverage[l],
                   report.stderr_.coverage[l]);
    return report;
}

nlohmann::json report_to_json(const CvReport& report, const std::vector<double>& levels) {
    nlohmann::json j;
    j["folds"] = nlohmann::json::array();
    for (const FoldMetrics& fm : report.folds) {
        nlohmann::json row = {{"repeat", fm.repeat}, {"fold", fm.fold},
                              {"n_test", fm.n_test}, {"c_index", fm.c_index},
                              {"ibs", fm.ibs},       {"ibll", fm.ibll}};
        for (std::size_t l = 0; l < levels.size(); ++l)
            row["coverage"][format_double(levels[l])] = fm.coverage[l];
        j["folds"].push_back(row);
    }
    auto summary = [&](const FoldMetrics& fm) {
        nlohmann::json s = {{"c_index", fm.c_index}, {"ibs", fm.ibs}, {"ibll", fm.ibll}};
        for (std::size_t l = 0; l < levels.size(); ++l)
            s["coverage"][format_double(levels[l])] = fm.coverage[l];
        return s;
    };
    j["mean"] = summary(report.mean);
    j["stderr"] = summary(report.stderr_);
    return j;
}

void write_history_csv(const std::string& path, const std::vector<EpochRow>& history) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileNotFound("cannot write '" + path + "'");
    out << "epoch,train_cost,val_cost\n";
    for (const EpochRow& row : history)
        out << row.epoch << ',' << format_double(row.train_cost) << ','
            << format_double(row.val_cost) << '\n';
}

bool write_predictions_csv(const std::string& path, const std::vector<LognormalRFN>& preds,
                           const std::vector<double>& levels, const std::vector<double>* x) {
    if (x && x->size() != preds.size())
        throw DimensionMismatch("feature column length differs from predictions");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileNotFound("cannot write '" + path + "'");
    if (x) out << "x,";
    out << "mu,sigma2,h";
    for (double level : levels) {
        std::string tag = format_double(level);
        out << ",bpi_" << tag << "_log_lo,bpi_" << tag << "_log_hi,bpi_" << tag << "_t_lo,bpi_"
            << tag << "_t_hi";
    }
    out << '\n';

    bool all_reachable = true;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const GRFN& g = preds[i].inner;
        if (x) out << format_double((*x)[i]) << ',';
        out << format_double(g.mu) << ',' << format_double(g.sigma2) << ',' << format_double(g.h);
        for (double level : levels) {
            try {
                RealInterval bounds = bpi(g, level);
                out << ',' << format_double(bounds.lo) << ',' << format_double(bounds.hi) << ','
                    << format_double(std::exp(bounds.lo)) << ','
                    << format_double(std::exp(bounds.hi));
            } catch (const UnreachableLevel&) {
                all_reachable = false;
                out << ",unreachable,unreachable,unreachable,unreachable";
            }
        }
        out << '\n';
    }
    return all_reachable;
}

} // namespace evreg
