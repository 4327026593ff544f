#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "evreg/cli.hpp"
#include "evreg/data.hpp"
#include "evreg/pipeline.hpp"

using namespace evreg;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("evreg");
    for (const std::string& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / "evreg_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

std::size_t count_lines(const std::string& text) {
    std::size_t n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

} // namespace

TEST_CASE("simulate writes both splits and a manifest that replays them") {
    fs::path d1 = fresh_dir("sim1");
    CHECK(run({"simulate", "--out-dir", d1.string(), "--seed", "9", "--data.sim.n", "200",
               "--data.sim.val-n", "50", "--data.sim.censor-prob", "0.2"}) == 0);

    Dataset ds = load_csv((d1 / "simulated.csv").string(), "duration", "event", {});
    CHECK(ds.n() == 200);
    CHECK(ds.p == 1);
    Dataset val = load_csv((d1 / "simulated_val.csv").string(), "duration", "event", {});
    CHECK(val.n() == 50);
    CHECK(val.x != std::vector<double>(ds.x.begin(), ds.x.begin() + 50)); // distinct streams

    json m = slurp_json(d1 / "manifest.json");
    CHECK(m["command"] == "simulate");
    CHECK(m["seed"] == 9);
    CHECK(m["data"]["sim"]["n"] == 200);
    CHECK(m["data"]["sim"]["censor_prob"] == 0.2);

    // the manifest is itself a valid config; only the output directory moves
    fs::path d2 = fresh_dir("sim2");
    CHECK(run({"simulate", "--config", (d1 / "manifest.json").string(), "--out-dir",
               d2.string()}) == 0);
    CHECK(slurp(d2 / "simulated.csv") == slurp(d1 / "simulated.csv"));
    CHECK(slurp(d2 / "simulated_val.csv") == slurp(d1 / "simulated_val.csv"));
}

TEST_CASE("flags override values from the config file") {
    fs::path dir = fresh_dir("override");
    fs::path cfg_file = dir / "config.json";
    {
        std::ofstream out(cfg_file);
        out << R"({"seed": 5, "data": {"sim": {"n": 100}}})";
    }
    CHECK(run({"simulate", "--config", cfg_file.string(), "--out-dir", dir.string(),
               "--data.sim.n", "50"}) == 0);
    Dataset ds = load_csv((dir / "simulated.csv").string(), "duration", "event", {});
    CHECK(ds.n() == 50); // flag wins
    json m = slurp_json(dir / "manifest.json");
    CHECK(m["seed"] == 5); // config survives where no flag was given
    CHECK(m["data"]["sim"]["n"] == 50);
}

TEST_CASE("train emits checkpoint, history, predictions and reruns bitwise") {
    std::vector<std::string> args = {"train",
                                     "--seed",
                                     "3",
                                     "--data.sim.n",
                                     "80",
                                     "--data.sim.val-n",
                                     "40",
                                     "--model.k",
                                     "3",
                                     "--train.max-epochs",
                                     "5",
                                     "--train.batch-size",
                                     "32"};

    fs::path d1 = fresh_dir("train1");
    std::vector<std::string> a1 = args;
    a1.insert(a1.end(), {"--out-dir", d1.string()});
    CHECK(run(a1) == 0);

    Checkpoint ck = load_checkpoint((d1 / "checkpoint.json").string());
    CHECK(ck.params.K == 3);
    CHECK(ck.params.p == 1);
    CHECK(!ck.config_hash.empty());

    std::string hist = slurp(d1 / "history.csv");
    CHECK(hist.rfind("epoch,train_cost,val_cost\n", 0) == 0);
    std::size_t epochs = count_lines(hist) - 1;
    CHECK(epochs >= 1);
    CHECK(epochs <= 5);

    // predictions cover the simulated validation set
    std::string preds = slurp(d1 / "predictions.csv");
    CHECK(count_lines(preds) == 41);
    CHECK(preds.rfind("mu,sigma2,h,bpi_0.5_log_lo", 0) == 0);

    json m = slurp_json(d1 / "manifest.json");
    CHECK(m["command"] == "train");
    CHECK(m["model"]["k"] == 3);

    fs::path d2 = fresh_dir("train2");
    std::vector<std::string> a2 = args;
    a2.insert(a2.end(), {"--out-dir", d2.string()});
    CHECK(run(a2) == 0);
    CHECK(slurp(d2 / "checkpoint.json") == slurp(d1 / "checkpoint.json"));
    CHECK(slurp(d2 / "history.csv") == slurp(d1 / "history.csv"));
    CHECK(slurp(d2 / "predictions.csv") == slurp(d1 / "predictions.csv"));
}

TEST_CASE("train on a csv holds out a validation fraction") {
    fs::path dir = fresh_dir("traincsv");
    REQUIRE(run({"simulate", "--out-dir", dir.string(), "--seed", "11", "--data.sim.n",
                 "100"}) == 0);
    fs::path csv = dir / "simulated.csv";

    CHECK(run({"train", "--out-dir", dir.string(), "--data.csv", csv.string(), "--model.k",
               "2", "--train.max-epochs", "3", "--train.holdout-frac", "0.25"}) == 0);
    CHECK(count_lines(slurp(dir / "predictions.csv")) == 26); // header + 25 rows

    // checkpoint survives a load/save cycle byte for byte
    Checkpoint ck = load_checkpoint((dir / "checkpoint.json").string());
    fs::path copy = dir / "checkpoint_copy.json";
    save_checkpoint(copy.string(), ck.params, ck.standardizer, ck.config_hash);
    CHECK(slurp(copy) == slurp(dir / "checkpoint.json"));
}

TEST_CASE("eval scores a checkpoint against a csv") {
    fs::path dir = fresh_dir("eval");
    REQUIRE(run({"simulate", "--out-dir", dir.string(), "--seed", "21", "--data.sim.n",
                 "120"}) == 0);
    fs::path csv = dir / "simulated.csv";
    REQUIRE(run({"train", "--out-dir", dir.string(), "--data.csv", csv.string(), "--model.k",
                 "2", "--train.max-epochs", "3"}) == 0);

    fs::path out = fresh_dir("eval_out");
    CHECK(run({"eval", "--checkpoint", (dir / "checkpoint.json").string(), "--data.csv",
               csv.string(), "--out-dir", out.string(), "--eval.grid-points", "30"}) == 0);

    json j = slurp_json(out / "eval_metrics.json");
    CHECK(j["n_test"] == 120);
    double ci = j["c_index"];
    CHECK(ci >= 0.0);
    CHECK(ci <= 1.0);
    double bs = j["ibs"];
    CHECK(bs >= 0.0);
    CHECK(bs <= 1.0);
    CHECK(double(j["ibll"]) > 0.0);
    REQUIRE(j.contains("coverage"));
    for (const char* level : {"0.5", "0.9", "0.99"}) {
        double c = j["coverage"][level];
        CHECK(c >= 0.0);
        CHECK(c <= 1.0);
    }
}

TEST_CASE("cv reports per fold and aggregate metrics") {
    fs::path dir = fresh_dir("cv");
    REQUIRE(run({"simulate", "--out-dir", dir.string(), "--seed", "31", "--data.sim.n",
                 "60"}) == 0);
    CHECK(run({"cv", "--out-dir", dir.string(), "--data.csv",
               (dir / "simulated.csv").string(), "--cv.folds", "3", "--cv.repeats", "2",
               "--model.k", "2", "--train.max-epochs", "3", "--eval.grid-points", "15"}) == 0);

    json j = slurp_json(dir / "cv_metrics.json");
    REQUIRE(j["folds"].size() == 6);
    std::size_t total = 0;
    for (const auto& f : j["folds"]) total += std::size_t(f["n_test"]);
    CHECK(total == 120); // two repeats, each partitioning all 60 rows
    CHECK(j["mean"].contains("c_index"));
    CHECK(j["stderr"].contains("ibs"));
}

TEST_CASE("plotdata exports prediction bands over the feature grid") {
    fs::path dir = fresh_dir("plot");
    REQUIRE(run({"train", "--out-dir", dir.string(), "--seed", "4", "--data.sim.n", "60",
                 "--data.sim.val-n", "20", "--model.k", "2", "--train.max-epochs", "2"}) == 0);

    CHECK(run({"plotdata", "--checkpoint", (dir / "checkpoint.json").string(), "--out-dir",
               dir.string(), "--plot.lo", "-1", "--plot.hi", "1", "--plot.points", "7"}) == 0);
    std::string text = slurp(dir / "plotdata.csv");
    CHECK(count_lines(text) == 8);
    CHECK(text.rfind("x,mu,sigma2,h,", 0) == 0);

    // default levels 0.5 < 0.9 < 0.99 give nested intervals on every row
    std::istringstream rows(text);
    std::string line;
    std::getline(rows, line); // header
    while (std::getline(rows, line)) {
        std::vector<double> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) cells.push_back(std::stod(cell));
        REQUIRE(cells.size() == 16); // x, mu, sigma2, h, then 4 columns per level
        CHECK(cells[4] >= cells[8]);
        CHECK(cells[8] >= cells[12]); // log lower bounds widen
        CHECK(cells[5] <= cells[9]);
        CHECK(cells[9] <= cells[13]); // log upper bounds widen
    }

    fs::path again = fresh_dir("plot2");
    CHECK(run({"plotdata", "--checkpoint", (dir / "checkpoint.json").string(), "--out-dir",
               again.string(), "--plot.lo", "-1", "--plot.hi", "1", "--plot.points", "7"}) == 0);
    CHECK(slurp(again / "plotdata.csv") == text);
}

TEST_CASE("exit codes separate usage, data and numeric failures") {
    fs::path dir = fresh_dir("exits");

    CHECK(run({"simulate", "--no-such-flag"}) == 1);
    CHECK(run({"--seed", "3"}) == 1); // missing subcommand
    CHECK(run({"cv", "--out-dir", dir.string()}) == 1); // cv without a csv
    CHECK(run({"simulate", "--out-dir", dir.string(), "--data.sim.censor-prob", "1.5"}) == 1);

    CHECK(run({"train", "--out-dir", dir.string(), "--data.csv",
               (dir / "missing.csv").string()}) == 2);
    CHECK(run({"eval", "--checkpoint", (dir / "missing.json").string(), "--data.csv",
               (dir / "missing.csv").string(), "--out-dir", dir.string()}) == 2);

    fs::path bad_ck = dir / "bad_checkpoint.json";
    {
        std::ofstream out(bad_ck);
        out << "{}";
    }
    CHECK(run({"plotdata", "--checkpoint", bad_ck.string(), "--out-dir", dir.string()}) == 2);

    fs::path bad_cfg = dir / "bad_config.json";
    {
        std::ofstream out(bad_cfg);
        out << "not json at all";
    }
    CHECK(run({"simulate", "--config", bad_cfg.string(), "--out-dir", dir.string()}) == 2);

    // a two-feature model cannot be plotted over a scalar grid
    Standardizer st2;
    st2.mean = {0.0, 0.0};
    st2.sd = {1.0, 1.0};
    fs::path ck2 = dir / "two_feature.json";
    save_checkpoint(ck2.string(), ModelParams(1, 2), st2, "h");
    CHECK(run({"plotdata", "--checkpoint", ck2.string(), "--out-dir", dir.string()}) == 1);

    // all-zero parameters give a vacuous prediction everywhere: belief
    // intervals are unreachable, which is a numeric failure
    Standardizer st1;
    st1.mean = {0.0};
    st1.sd = {1.0};
    fs::path ck1 = dir / "vacuous.json";
    save_checkpoint(ck1.string(), ModelParams(1, 1), st1, "h");
    CHECK(run({"plotdata", "--checkpoint", ck1.string(), "--out-dir", dir.string(),
               "--plot.points", "3"}) == 3);
    std::string text = slurp(dir / "plotdata.csv");
    CHECK(text.find("unreachable") != std::string::npos);

    CHECK(run({"plotdata", "--checkpoint", ck1.string(), "--out-dir", dir.string(),
               "--plot.lo", "1", "--plot.hi", "1"}) == 3); // degenerate grid
}
