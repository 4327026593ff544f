#include "evreg/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "evreg/rng.hpp"

namespace evreg {
namespace {

double sq_dist(const double* a, const double* b, int p) {
    double d2 = 0.0;
    for (int j = 0; j < p; ++j) {
        double d = a[j] - b[j];
        d2 += d * d;
    }
    return d2;
}

// k-means++ seeding then Lloyd iterations; deterministic for a fixed seed
std::vector<double> kmeans(const Dataset& ds, int K, std::uint64_t seed) {
    std::size_t n = ds.n();
    int p = ds.p;
    std::mt19937_64 rng(derive_seed(seed, 0x6b6d));
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<double> centers(static_cast<std::size_t>(K) * p);
    std::vector<double> d2(n, std::numeric_limits<double>::infinity());

    std::size_t first = static_cast<std::size_t>(unit(rng) * static_cast<double>(n));
    first = std::min(first, n - 1);
    std::copy_n(ds.row(first), p, centers.begin());
    for (int k = 1; k < K; ++k) {
        const double* last = centers.data() + static_cast<std::size_t>(k - 1) * p;
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sq_dist(ds.row(i), last, p));
            total += d2[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            double target = unit(rng) * total;
            double run = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                run += d2[i];
                if (run >= target) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = std::min(static_cast<std::size_t>(unit(rng) * static_cast<double>(n)), n - 1);
        }
        std::copy_n(ds.row(pick), p, centers.begin() + static_cast<std::size_t>(k) * p);
    }

    std::vector<int> assign(n, -1);
    for (int iter = 0; iter < 50; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < n; ++i) {
            int best = 0;
            double best_d = sq_dist(ds.row(i), centers.data(), p);
            for (int k = 1; k < K; ++k) {
                double d = sq_dist(ds.row(i), centers.data() + static_cast<std::size_t>(k) * p, p);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            if (assign[i] != best) {
                assign[i] = best;
                changed = true;
            }
        }
        if (!changed) break;
        std::vector<double> sums(static_cast<std::size_t>(K) * p, 0.0);
        std::vector<std::size_t> counts(K, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = ds.row(i);
            double* s = sums.data() + static_cast<std::size_t>(assign[i]) * p;
            for (int j = 0; j < p; ++j) s[j] += r[j];
            ++counts[assign[i]];
        }
        for (int k = 0; k < K; ++k) {
            if (counts[k] == 0) continue; // empty cluster keeps its center
            double* c = centers.data() + static_cast<std::size_t>(k) * p;
            const double* s = sums.data() + static_cast<std::size_t>(k) * p;
            for (int j = 0; j < p; ++j) c[j] = s[j] / static_cast<double>(counts[k]);
        }
    }
    return centers;
}

} // namespace

std::vector<double> similarities(const ModelParams& params, const double* x) {
    std::vector<double> s(params.K);
    for (int k = 0; k < params.K; ++k) {
        double g = params.gamma(k);
        s[k] = std::exp(-g * g * sq_dist(x, params.proto(k), params.p));
    }
    return s;
}

LognormalRFN forward(const ModelParams& params, const double* x, FusionCache* cache) {
    int K = params.K, p = params.p;
    FusionCache local;
    FusionCache& c = cache ? *cache : local;
    c.s.resize(K);
    c.w.resize(K);
    c.mu_k.resize(K);
    c.d2.resize(K);

    double H = 0.0;
    for (int k = 0; k < K; ++k) {
        double g = params.gamma(k);
        double d2 = sq_dist(x, params.proto(k), p);
        double s = std::exp(-g * g * d2);
        double mu_k = params.beta0(k);
        const double* b = params.beta(k);
        for (int j = 0; j < p; ++j) mu_k += b[j] * x[j];
        c.s[k] = s;
        c.w[k] = s * params.h(k);
        c.mu_k[k] = mu_k;
        c.d2[k] = d2;
        H += c.w[k];
    }
    c.H = H;
    if (H == 0.0) {
        c.mu = c.sigma2 = c.h = 0.0;
        return LognormalRFN(GRFN::vacuous());
    }
    double mu = 0.0, s2 = 0.0;
    for (int k = 0; k < K; ++k) {
        mu += c.w[k] * c.mu_k[k];
        double ws = c.w[k] * params.varsigma(k);
        s2 += ws * ws;
    }
    mu /= H;
    s2 /= H * H;
    c.mu = mu;
    c.sigma2 = s2;
    c.h = H;
    return LognormalRFN(GRFN(mu, s2, H));
}

std::vector<LognormalRFN> forward_batch(const ModelParams& params, const Dataset& ds) {
    if (ds.p != params.p) throw DimensionMismatch("dataset feature count differs from model");
    std::vector<LognormalRFN> out;
    out.reserve(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) out.push_back(forward(params, ds.row(i)));
    return out;
}

ModelParams init_params(const Dataset& train, int K, std::uint64_t seed) {
    if (K < 1) throw InvalidParameter("need at least one prototype");
    if (train.n() == 0) throw EmptyDataset("cannot initialize from empty data");
    if (train.n() < static_cast<std::size_t>(K))
        throw TooFewSamples("fewer training samples than prototypes");

    ModelParams params(K, train.p);
    std::vector<double> centers = kmeans(train, K, seed);
    std::copy(centers.begin(), centers.end(), params.theta.begin() + params.proto_off());

    double gamma = 1.0;
    if (K > 1) {
        std::vector<double> dists;
        dists.reserve(static_cast<std::size_t>(K) * (K - 1) / 2);
        for (int a = 0; a < K; ++a)
            for (int b = a + 1; b < K; ++b)
                dists.push_back(std::sqrt(sq_dist(params.proto(a), params.proto(b), train.p)));
        std::sort(dists.begin(), dists.end());
        std::size_t m = dists.size();
        double med = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
        if (med > 0.0) gamma = 1.0 / med;
    }

    double mean_y = 0.0;
    for (std::size_t i = 0; i < train.n(); ++i) mean_y += std::log(train.duration[i]);
    mean_y /= static_cast<double>(train.n());
    double sd_y = 0.0;
    if (train.n() > 1) {
        double ss = 0.0;
        for (std::size_t i = 0; i < train.n(); ++i) {
            double d = std::log(train.duration[i]) - mean_y;
            ss += d * d;
        }
        sd_y = std::sqrt(ss / (static_cast<double>(train.n()) - 1.0));
    }

    for (int k = 0; k < K; ++k) {
        params.gamma(k) = gamma;
        params.eta(k) = 1.0;
        params.varsigma(k) = sd_y;
        params.beta0(k) = mean_y;
    }
    return params;
}

std::string params_to_json(const ModelParams& params) {
    nlohmann::json j;
    j["format"] = "evreg-params-v1";
    j["K"] = params.K;
    j["p"] = params.p;
    j["theta"] = params.theta;
    return j.dump();
}

ModelParams params_from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("K") || !j.contains("p") || !j.contains("theta"))
        throw SchemaMismatch("malformed model parameter JSON");
    ModelParams params(j["K"].get<int>(), j["p"].get<int>());
    std::vector<double> theta = j["theta"].get<std::vector<double>>();
    if (theta.size() != params.size())
        throw SchemaMismatch("parameter vector length does not match K and p");
    params.theta = std::move(theta);
    return params;
}

} // namespace evreg
