#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "evreg/data.hpp"
#include "evreg/grfn.hpp"

namespace evreg {

// Prototype-based evidential network. All parameters live in one flat vector
// so the optimizer and finite differences can treat them uniformly:
//   [prototypes K*p][gamma K][eta K][varsigma K][beta K*p][beta0 K]
// h_k = eta_k^2 and sigma2_k = varsigma_k^2 keep both nonnegative without
// constraints; gamma_k enters the similarity squared for the same reason.
struct ModelParams {
    int K = 0;
    int p = 0;
    std::vector<double> theta;

    ModelParams() = default;
    ModelParams(int K_, int p_) : K(K_), p(p_), theta(size_for(K_, p_), 0.0) {}

    static std::size_t size_for(int K, int p) {
        return static_cast<std::size_t>(K) * (2 * p + 4);
    }
    std::size_t size() const { return theta.size(); }

    std::size_t proto_off() const { return 0; }
    std::size_t gamma_off() const { return static_cast<std::size_t>(K) * p; }
    std::size_t eta_off() const { return gamma_off() + K; }
    std::size_t vsig_off() const { return eta_off() + K; }
    std::size_t beta_off() const { return vsig_off() + K; }
    std::size_t beta0_off() const { return beta_off() + static_cast<std::size_t>(K) * p; }

    double* proto(int k) { return theta.data() + proto_off() + static_cast<std::size_t>(k) * p; }
    const double* proto(int k) const {
        return theta.data() + proto_off() + static_cast<std::size_t>(k) * p;
    }
    double& gamma(int k) { return theta[gamma_off() + k]; }
    double gamma(int k) const { return theta[gamma_off() + k]; }
    double& eta(int k) { return theta[eta_off() + k]; }
    double eta(int k) const { return theta[eta_off() + k]; }
    double& varsigma(int k) { return theta[vsig_off() + k]; }
    double varsigma(int k) const { return theta[vsig_off() + k]; }
    double* beta(int k) { return theta.data() + beta_off() + static_cast<std::size_t>(k) * p; }
    const double* beta(int k) const {
        return theta.data() + beta_off() + static_cast<std::size_t>(k) * p;
    }
    double& beta0(int k) { return theta[beta0_off() + k]; }
    double beta0(int k) const { return theta[beta0_off() + k]; }

    double h(int k) const { return eta(k) * eta(k); }
    double sigma2(int k) const { return varsigma(k) * varsigma(k); }
};

// per-sample intermediates kept for backpropagation
struct FusionCache {
    std::vector<double> s;    // similarity to each prototype
    std::vector<double> w;    // s_k * h_k
    std::vector<double> mu_k; // per-prototype location beta_k.x + beta0_k
    std::vector<double> d2;   // squared distance to each prototype
    double H = 0.0;           // sum of w
    double mu = 0.0;
    double sigma2 = 0.0;
    double h = 0.0;
};

// s_k(x) = exp(-gamma_k^2 ||x - p_k||^2)
std::vector<double> similarities(const ModelParams& params, const double* x);

// Precision-weighted fusion of the prototype GRFNs; zero total weight gives
// the vacuous prediction.
LognormalRFN forward(const ModelParams& params, const double* x, FusionCache* cache = nullptr);

std::vector<LognormalRFN> forward_batch(const ModelParams& params, const Dataset& ds);

// k-means prototypes on the (already standardized) features, shared spread
// gamma from the median inter-prototype distance, unit precision, output
// variance from the response spread.
ModelParams init_params(const Dataset& train, int K, std::uint64_t seed);

// JSON round trip; doubles survive bit-exactly
std::string params_to_json(const ModelParams& params);
ModelParams params_from_json(const std::string& text);

} // namespace evreg
