#include "evreg/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "evreg/rng.hpp"

namespace evreg {

double sim_log_time(double x, double v) {
    double c = std::cos(3.0 * x);
    return 1.5 * x + 2.0 * c * c * c + (x + 5.0) / (3.0 * std::sqrt(5.0)) * v;
}

Dataset simulate(const SimConfig& cfg) {
    if (cfg.n == 0) throw EmptyDataset("simulate needs n >= 1");
    if (!(cfg.censor_prob >= 0.0 && cfg.censor_prob <= 1.0))
        throw InvalidParameter("censor_prob must lie in [0, 1]");
    if (!(cfg.c_lo < 0.0) || !std::isfinite(cfg.c_lo))
        throw InvalidParameter("c_lo must be a finite negative log-time offset");

    std::mt19937_64 rng(derive_seed(cfg.seed, 0xd47a));
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::uniform_real_distribution<double> ucens(0.0, 1.0);
    std::uniform_real_distribution<double> uoffset(cfg.c_lo, 0.0);

    Dataset ds;
    ds.p = 1;
    ds.feature_names = {"x"};
    ds.x.reserve(cfg.n);
    ds.duration.reserve(cfg.n);
    ds.event.reserve(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) {
        // four draws per sample, unconditionally, so records are independent
        // of the censoring branch taken by earlier samples
        double xi = ux(rng);
        double vi = noise(rng);
        double coin = ucens(rng);
        double offset = uoffset(rng);
        double y = sim_log_time(xi, vi);
        int ev = 1;
        if (coin < cfg.censor_prob) {
            ev = 0;
            y += offset;
        }
        ds.x.push_back(xi);
        ds.duration.push_back(std::exp(y));
        ds.event.push_back(ev);
    }
    return ds;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    cells.push_back(cur);
    for (std::string& s : cells) {
        std::size_t b = s.find_first_not_of(" \t");
        std::size_t e = s.find_last_not_of(" \t");
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }
    return cells;
}

double parse_cell(const std::string& cell, int row, const std::string& col) {
    if (cell.empty())
        throw SchemaMismatch("empty value in column '" + col + "' at row " + std::to_string(row));
    char* end = nullptr;
    double v = std::strtod(cell.c_str(), &end);
    if (end != cell.c_str() + cell.size() || !std::isfinite(v))
        throw SchemaMismatch("non-numeric value '" + cell + "' in column '" + col + "' at row " +
                             std::to_string(row));
    return v;
}

} // namespace

Dataset load_csv(const std::string& path, const std::string& duration_col,
                 const std::string& event_col, const std::vector<std::string>& feature_cols) {
    std::ifstream in(path);
    if (!in) throw FileNotFound("cannot open '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw SchemaMismatch("'" + path + "' has no header row");
    std::vector<std::string> header = split_csv_line(line);

    auto col_index = [&](const std::string& name) {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw SchemaMismatch("column '" + name + "' missing from '" + path + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::size_t dur_idx = col_index(duration_col);
    std::size_t ev_idx = col_index(event_col);

    std::vector<std::string> features = feature_cols;
    if (features.empty()) {
        for (const std::string& name : header)
            if (name != duration_col && name != event_col) features.push_back(name);
    }
    if (features.empty()) throw SchemaMismatch("'" + path + "' has no feature columns");
    std::vector<std::size_t> feat_idx;
    feat_idx.reserve(features.size());
    for (const std::string& name : features) feat_idx.push_back(col_index(name));

    Dataset ds;
    ds.p = static_cast<int>(features.size());
    ds.feature_names = features;

    int row = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        ++row;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw SchemaMismatch("row " + std::to_string(row) + " has " +
                                 std::to_string(cells.size()) + " cells, header has " +
                                 std::to_string(header.size()));
        double dur = parse_cell(cells[dur_idx], row, duration_col);
        if (!(dur > 0.0))
            throw NonPositiveDuration(row, "duration must be > 0 at row " + std::to_string(row));
        double evd = parse_cell(cells[ev_idx], row, event_col);
        if (evd != 0.0 && evd != 1.0)
            throw SchemaMismatch("event must be 0 or 1 at row " + std::to_string(row));
        for (std::size_t j = 0; j < feat_idx.size(); ++j)
            ds.x.push_back(parse_cell(cells[feat_idx[j]], row, features[j]));
        ds.duration.push_back(dur);
        ds.event.push_back(static_cast<int>(evd));
    }
    if (ds.duration.empty()) throw EmptyDataset("'" + path + "' has no data rows");
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FileNotFound("cannot write '" + path + "'");
    for (const std::string& name : ds.feature_names) out << name << ',';
    out << "duration,event\n";
    char buf[64];
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double* r = ds.row(i);
        for (int j = 0; j < ds.p; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", r[j]);
            out << buf << ',';
        }
        std::snprintf(buf, sizeof buf, "%.17g", ds.duration[i]);
        out << buf << ',' << ds.event[i] << '\n';
    }
}

Standardizer Standardizer::fit(const Dataset& ds) {
    if (ds.n() == 0) throw EmptyDataset("cannot fit standardizer on empty data");
    Standardizer st;
    st.mean.assign(ds.p, 0.0);
    st.sd.assign(ds.p, 1.0);
    double n = static_cast<double>(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const double* r = ds.row(i);
        for (int j = 0; j < ds.p; ++j) st.mean[j] += r[j];
    }
    for (int j = 0; j < ds.p; ++j) st.mean[j] /= n;
    if (ds.n() > 1) {
        std::vector<double> ss(ds.p, 0.0);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const double* r = ds.row(i);
            for (int j = 0; j < ds.p; ++j) {
                double d = r[j] - st.mean[j];
                ss[j] += d * d;
            }
        }
        for (int j = 0; j < ds.p; ++j) {
            double sd = std::sqrt(ss[j] / (n - 1.0));
            if (sd > 0.0) st.sd[j] = sd;
        }
    }
    return st;
}

void Standardizer::apply(Dataset& ds) const {
    if (static_cast<std::size_t>(ds.p) != mean.size())
        throw DimensionMismatch("standardizer fitted on a different feature count");
    for (std::size_t i = 0; i < ds.n(); ++i) {
        double* r = ds.row(i);
        for (int j = 0; j < ds.p; ++j) r[j] = (r[j] - mean[j]) / sd[j];
    }
}

std::vector<std::vector<std::size_t>> make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw InvalidParameter("need at least 2 folds");
    if (n < static_cast<std::size_t>(k)) throw TooFewSamples("fewer samples than folds");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, 0xf01d));
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t base = n / k, extra = n % k;
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        std::size_t len = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        folds[f].assign(perm.begin() + pos, perm.begin() + pos + len);
        pos += len;
    }
    return folds;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>>
split_holdout(std::size_t n, double frac, std::uint64_t seed) {
    if (!(frac > 0.0 && frac < 1.0)) throw InvalidParameter("holdout fraction must be in (0,1)");
    if (n < 2) throw TooFewSamples("need at least 2 samples to split");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(derive_seed(seed, 0x5b17));
    std::shuffle(perm.begin(), perm.end(), rng);
    std::size_t nh = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n)));
    nh = std::clamp<std::size_t>(nh, 1, n - 1);
    std::vector<std::size_t> hold(perm.begin(), perm.begin() + nh);
    std::vector<std::size_t> train(perm.begin() + nh, perm.end());
    return {train, hold};
}

Dataset subset(const Dataset& ds, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.p = ds.p;
    out.feature_names = ds.feature_names;
    out.x.reserve(idx.size() * ds.p);
    out.duration.reserve(idx.size());
    out.event.reserve(idx.size());
    for (std::size_t i : idx) {
        const double* r = ds.row(i);
        out.x.insert(out.x.end(), r, r + ds.p);
        out.duration.push_back(ds.duration[i]);
        out.event.push_back(ds.event[i]);
    }
    return out;
}

} // namespace evreg
