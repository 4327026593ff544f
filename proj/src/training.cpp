#include "evreg/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "evreg/belief_kernels.hpp"
#include "evreg/rng.hpp"

namespace evreg {
namespace {

constexpr double kProbFloor = 1e-300;
constexpr std::size_t kSampleBlock = 32;

void validate_loss(const LossConfig& cfg) {
    if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0))
        throw InvalidParameter("loss lambda must lie in [0, 1]");
    if (!(cfg.epsilon > 0.0)) throw InvalidParameter("loss epsilon must be > 0");
    if (!(cfg.xi >= 0.0) || !(cfg.rho >= 0.0))
        throw InvalidParameter("penalty weights must be >= 0");
}

template <class T>
T loss_core(const T& mu, const T& sigma2, const T& h, double y, int event,
            const LossConfig& cfg) {
    RealInterval I = event ? RealInterval(y - cfg.epsilon, y + cfg.epsilon)
                           : RealInterval::at_least(y);
    auto [bel, pl] = detail::bel_pl_core(mu, sigma2, h, I);
    T b = value_of(bel) < kProbFloor ? T(kProbFloor) : bel;
    T q = value_of(pl) < kProbFloor ? T(kProbFloor) : pl;
    return T(cfg.lambda) * (-log(b)) + T(1.0 - cfg.lambda) * (-log(q));
}

struct LossPartials {
    double value;
    double dmu;
    double dsigma2;
    double dh;
};

LossPartials loss_partials(double mu, double sigma2, double h, double y, int event,
                           const LossConfig& cfg) {
    Dual3 m(mu, 1.0, 0.0, 0.0);
    Dual3 s2(sigma2, 0.0, 1.0, 0.0);
    Dual3 hh(h, 0.0, 0.0, 1.0);
    Dual3 L = loss_core<Dual3>(m, s2, hh, y, event, cfg);
    return {L.v, L.d[0], L.d[1], L.d[2]};
}

double penalty(const ModelParams& params, const LossConfig& cfg) {
    double sum_h = 0.0, sum_g2 = 0.0;
    for (int k = 0; k < params.K; ++k) {
        sum_h += params.h(k);
        sum_g2 += params.gamma(k) * params.gamma(k);
    }
    double K = static_cast<double>(params.K);
    return cfg.xi / K * sum_h + cfg.rho / K * sum_g2;
}

double sample_loss_value(const ModelParams& params, const Dataset& ds, std::size_t i,
                         const LossConfig& cfg) {
    LognormalRFN pred = forward(params, ds.row(i));
    return loss_core<double>(pred.inner.mu, pred.inner.sigma2, pred.inner.h,
                             std::log(ds.duration[i]), ds.event[i], cfg);
}

// backprop of the loss partials through the fusion layer into the flat vector
void accumulate_sample_grad(const ModelParams& P, const double* x, const FusionCache& c,
                            const LossPartials& lp, double* g) {
    if (c.H == 0.0) return;
    int K = P.K, p = P.p;
    double H = c.H;
    for (int k = 0; k < K; ++k) {
        double s = c.s[k], w = c.w[k];
        double eta = P.eta(k), vs = P.varsigma(k), gam = P.gamma(k);

        double gmuk = lp.dmu * w / H;
        double* gb = g + P.beta_off() + static_cast<std::size_t>(k) * p;
        for (int j = 0; j < p; ++j) gb[j] += gmuk * x[j];
        g[P.beta0_off() + k] += gmuk;

        g[P.vsig_off() + k] += lp.dsigma2 * 2.0 * w * w * vs / (H * H);

        double gW = lp.dmu * (c.mu_k[k] - c.mu) / H +
                    lp.dsigma2 * 2.0 * (w * vs * vs - c.sigma2 * H) / (H * H) + lp.dh;
        double gs = gW * eta * eta;
        g[P.eta_off() + k] += gW * 2.0 * s * eta;

        g[P.gamma_off() + k] += gs * (-2.0 * gam * c.d2[k] * s);
        double* gp = g + P.proto_off() + static_cast<std::size_t>(k) * p;
        const double* proto = P.proto(k);
        double coef = gs * 2.0 * gam * gam * s;
        for (int j = 0; j < p; ++j) gp[j] += coef * (x[j] - proto[j]);
    }
}

void sample_grad(const ModelParams& params, const Dataset& ds, std::size_t i,
                 const LossConfig& cfg, FusionCache& cache, double* g) {
    forward(params, ds.row(i), &cache);
    LossPartials lp = loss_partials(cache.mu, cache.sigma2, cache.h,
                                    std::log(ds.duration[i]), ds.event[i], cfg);
    accumulate_sample_grad(params, ds.row(i), cache, lp, g);
}

double mean_loss_indices(const ModelParams& params, const Dataset& ds,
                         const std::vector<std::size_t>& idx, const LossConfig& cfg, Exec exec) {
    std::size_t n = idx.size();
    if (exec == Exec::Serial) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += sample_loss_value(params, ds, idx[i], cfg);
        return sum / static_cast<double>(n);
    }
    std::size_t nb = block_count(n, kSampleBlock);
    std::vector<double> blocks(nb, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
        std::size_t lo = static_cast<std::size_t>(b) * kSampleBlock;
        std::size_t hi = std::min(lo + kSampleBlock, n);
        double local = 0.0;
        for (std::size_t i = lo; i < hi; ++i) local += sample_loss_value(params, ds, idx[i], cfg);
        blocks[b] = local;
    }
    double sum = 0.0;
    for (double v : blocks) sum += v;
    return sum / static_cast<double>(n);
}

std::vector<double> grad_indices(const ModelParams& params, const Dataset& ds,
                                 const std::vector<std::size_t>& idx, const LossConfig& cfg,
                                 Exec exec) {
    std::size_t n = idx.size();
    std::size_t P = params.size();
    std::vector<double> g(P, 0.0);
    if (exec == Exec::Serial) {
        FusionCache cache;
        for (std::size_t i = 0; i < n; ++i) sample_grad(params, ds, idx[i], cfg, cache, g.data());
    } else {
        std::size_t nb = block_count(n, kSampleBlock);
        std::vector<std::vector<double>> blocks(nb);
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(nb); ++b) {
            std::size_t lo = static_cast<std::size_t>(b) * kSampleBlock;
            std::size_t hi = std::min(lo + kSampleBlock, n);
            std::vector<double> local(P, 0.0);
            FusionCache cache;
            for (std::size_t i = lo; i < hi; ++i)
                sample_grad(params, ds, idx[i], cfg, cache, local.data());
            blocks[b] = std::move(local);
        }
        for (const auto& local : blocks)
            for (std::size_t j = 0; j < P; ++j) g[j] += local[j];
    }
    double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : g) v *= inv_n;

    double K = static_cast<double>(params.K);
    for (int k = 0; k < params.K; ++k) {
        g[params.eta_off() + k] += cfg.xi / K * 2.0 * params.eta(k);
        g[params.gamma_off() + k] += cfg.rho / K * 2.0 * params.gamma(k);
    }
    return g;
}

std::vector<std::size_t> all_indices(std::size_t n) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
}

} // namespace

double loss_sample(const GRFN& pred, double y, int event, const LossConfig& cfg) {
    validate_loss(cfg);
    if (!std::isfinite(y)) throw InvalidParameter("loss target must be finite");
    if (event != 0 && event != 1) throw InvalidParameter("event flag must be 0 or 1");
    return loss_core<double>(pred.mu, pred.sigma2, pred.h, y, event, cfg);
}

double total_cost(const ModelParams& params, const Dataset& ds, const LossConfig& cfg,
                  Exec exec) {
    validate_loss(cfg);
    if (ds.n() == 0) throw EmptyDataset("cost of an empty dataset is undefined");
    if (ds.p != params.p) throw DimensionMismatch("dataset feature count differs from model");
    return mean_loss_indices(params, ds, all_indices(ds.n()), cfg, exec) + penalty(params, cfg);
}

std::vector<double> gradient(const ModelParams& params, const Dataset& ds, const LossConfig& cfg,
                             Exec exec) {
    validate_loss(cfg);
    if (ds.n() == 0) throw EmptyDataset("gradient of an empty dataset is undefined");
    if (ds.p != params.p) throw DimensionMismatch("dataset feature count differs from model");
    return grad_indices(params, ds, all_indices(ds.n()), cfg, exec);
}

FitResult fit(const Dataset& train, const Dataset& val, int K, const TrainConfig& cfg) {
    validate_loss(cfg.loss);
    if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) throw InvalidParameter("lr must be positive");
    if (cfg.batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
    if (cfg.max_epochs < 1) throw InvalidParameter("max_epochs must be >= 1");
    if (cfg.patience < 1) throw InvalidParameter("patience must be >= 1");
    if (train.n() == 0) throw EmptyDataset("training set is empty");
    if (val.n() == 0) throw EmptyDataset("validation set is empty");
    if (train.p != val.p) throw DimensionMismatch("train/validation feature counts differ");

    ModelParams params = init_params(train, K, derive_seed(cfg.seed, 0x1a17));
    std::size_t P = params.size();

    std::vector<double> m(P, 0.0), v(P, 0.0);
    const double b1 = 0.9, b2 = 0.999, adam_eps = 1e-8;
    long t = 0;

    FitResult result;
    double best_val = std::numeric_limits<double>::infinity();
    ModelParams best = params;
    int patience_left = cfg.patience;

    std::vector<std::size_t> perm = all_indices(train.n());
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::mt19937_64 rng(derive_seed(cfg.seed, 0x10000u + static_cast<std::uint64_t>(epoch)));
        std::shuffle(perm.begin(), perm.end(), rng);

        for (std::size_t start = 0; start < perm.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            std::size_t stop = std::min(perm.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<std::size_t> batch(perm.begin() + start, perm.begin() + stop);
            std::vector<double> g = grad_indices(params, train, batch, cfg.loss, cfg.exec);
            ++t;
            double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
            double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
            for (std::size_t j = 0; j < P; ++j) {
                m[j] = b1 * m[j] + (1.0 - b1) * g[j];
                v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
                params.theta[j] -= cfg.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + adam_eps);
            }
        }

        double train_cost = total_cost(params, train, cfg.loss, cfg.exec);
        double val_cost = total_cost(params, val, cfg.loss, cfg.exec);
        if (!std::isfinite(train_cost) || !std::isfinite(val_cost))
            throw Error(ErrorCategory::Numeric, "training cost became non-finite");
        result.history.push_back({epoch, train_cost, val_cost});

        if (val_cost < best_val) {
            best_val = val_cost;
            best = params;
            result.best_epoch = epoch;
            patience_left = cfg.patience;
        } else if (--patience_left == 0) {
            break;
        }
    }

    result.params = std::move(best);
    result.best_val_cost = best_val;
    return result;
}

} // namespace evreg
