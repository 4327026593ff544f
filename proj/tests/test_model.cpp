#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "evreg/model.hpp"

using namespace evreg;

namespace {

ModelParams random_params(int K, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    ModelParams params(K, p);
    for (double& t : params.theta) t = u(rng);
    return params;
}

Dataset toy_dataset(std::size_t n, int p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::uniform_real_distribution<double> dur(0.2, 5.0);
    Dataset ds;
    ds.p = p;
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) ds.x.push_back(u(rng));
        ds.duration.push_back(dur(rng));
        ds.event.push_back(rng() % 3 != 0);
    }
    return ds;
}

} // namespace

TEST_CASE("similarity peaks at the prototype") {
    ModelParams params(2, 2);
    params.proto(0)[0] = 1.0;
    params.proto(0)[1] = -1.0;
    params.proto(1)[0] = 0.0;
    params.proto(1)[1] = 0.5;
    params.gamma(0) = 0.7;
    params.gamma(1) = 1.3;

    double at_proto[2] = {1.0, -1.0};
    auto s = similarities(params, at_proto);
    CHECK(s[0] == 1.0);
    double d2 = 1.0 + 1.5 * 1.5;
    CHECK(s[1] == doctest::Approx(std::exp(-1.3 * 1.3 * d2)).epsilon(1e-15));

    // zero spread means indifference
    params.gamma(1) = 0.0;
    s = similarities(params, at_proto);
    CHECK(s[1] == 1.0);

    for (double v : s) {
        CHECK(v > 0.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("fusion matches the precision weighted closed form") {
    ModelParams params(2, 1);
    params.proto(0)[0] = -1.0;
    params.proto(1)[0] = 1.0;
    params.gamma(0) = 0.8;
    params.gamma(1) = 0.6;
    params.eta(0) = 1.2;
    params.eta(1) = 0.9;
    params.varsigma(0) = 0.5;
    params.varsigma(1) = 1.5;
    params.beta(0)[0] = 0.3;
    params.beta(1)[0] = -0.2;
    params.beta0(0) = 1.0;
    params.beta0(1) = 2.0;

    double x = 0.25;
    auto s = similarities(params, &x);
    double w0 = s[0] * params.h(0), w1 = s[1] * params.h(1);
    double H = w0 + w1;
    double mu0 = 0.3 * x + 1.0, mu1 = -0.2 * x + 2.0;
    double mu = (w0 * mu0 + w1 * mu1) / H;
    double s2 = (w0 * w0 * 0.25 + w1 * w1 * 2.25) / (H * H);

    LognormalRFN out = forward(params, &x);
    CHECK(out.inner.mu == doctest::Approx(mu).epsilon(1e-14));
    CHECK(out.inner.sigma2 == doctest::Approx(s2).epsilon(1e-14));
    CHECK(out.inner.h == doctest::Approx(H).epsilon(1e-14));
}

TEST_CASE("fusion equals folding pairwise combination of discounted parts") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        ModelParams params = random_params(4, 3, 100 + rep);
        double x[3] = {u(rng), u(rng), u(rng)};
        auto s = similarities(params, x);

        GRFN acc = GRFN::vacuous();
        for (int k = 0; k < 4; ++k) {
            double mu_k = params.beta0(k);
            for (int j = 0; j < 3; ++j) mu_k += params.beta(k)[j] * x[j];
            acc = combine(acc, GRFN(mu_k, params.sigma2(k), s[k] * params.h(k)));
        }

        LognormalRFN out = forward(params, x);
        CHECK(out.inner.mu == doctest::Approx(acc.mu).epsilon(1e-12));
        CHECK(out.inner.sigma2 == doctest::Approx(acc.sigma2).epsilon(1e-12));
        CHECK(out.inner.h == doctest::Approx(acc.h).epsilon(1e-12));
    }
}

TEST_CASE("prototype order does not change the prediction") {
    ModelParams params = random_params(2, 2, 7);
    ModelParams swapped = params;
    // swap every per-prototype slice
    for (int j = 0; j < 2; ++j) {
        std::swap(swapped.proto(0)[j], swapped.proto(1)[j]);
        std::swap(swapped.beta(0)[j], swapped.beta(1)[j]);
    }
    std::swap(swapped.gamma(0), swapped.gamma(1));
    std::swap(swapped.eta(0), swapped.eta(1));
    std::swap(swapped.varsigma(0), swapped.varsigma(1));
    std::swap(swapped.beta0(0), swapped.beta0(1));

    double x[2] = {0.3, -0.9};
    LognormalRFN a = forward(params, x), b = forward(swapped, x);
    // two-term sums commute exactly
    CHECK(a.inner.h == b.inner.h);
    CHECK(a.inner.mu == doctest::Approx(b.inner.mu).epsilon(1e-14));
    CHECK(a.inner.sigma2 == doctest::Approx(b.inner.sigma2).epsilon(1e-14));
}

TEST_CASE("total similarity underflow yields the vacuous prediction") {
    ModelParams params(1, 1);
    params.proto(0)[0] = 0.0;
    params.gamma(0) = 100.0;
    params.eta(0) = 1.0;
    double far = 2.0; // exp(-100^2 * 4) underflows to zero
    LognormalRFN out = forward(params, &far);
    CHECK(out.inner.h == 0.0);
    CHECK(out.inner.mu == 0.0);
    CHECK(out.inner.sigma2 == 0.0);
}

TEST_CASE("initialization is deterministic and sane") {
    Dataset ds = toy_dataset(200, 2, 11);
    ModelParams a = init_params(ds, 5, 99);
    ModelParams b = init_params(ds, 5, 99);
    CHECK(a.theta == b.theta);
    ModelParams c = init_params(ds, 5, 100);
    CHECK(a.theta != c.theta);

    double mean_y = 0.0;
    for (double t : ds.duration) mean_y += std::log(t);
    mean_y /= static_cast<double>(ds.n());
    double ss = 0.0;
    for (double t : ds.duration) {
        double d = std::log(t) - mean_y;
        ss += d * d;
    }
    double sd_y = std::sqrt(ss / (static_cast<double>(ds.n()) - 1.0));

    for (int k = 0; k < 5; ++k) {
        CHECK(a.eta(k) == 1.0);
        CHECK(a.varsigma(k) == doctest::Approx(sd_y).epsilon(1e-12));
        CHECK(a.beta0(k) == doctest::Approx(mean_y).epsilon(1e-12));
        CHECK(a.gamma(k) > 0.0);
        for (int j = 0; j < 2; ++j) {
            CHECK(a.beta(k)[j] == 0.0);
            CHECK(a.proto(k)[j] >= -2.0);
            CHECK(a.proto(k)[j] <= 2.0);
        }
    }
    // shared spread equals one over the median inter-prototype distance
    std::vector<double> dists;
    for (int i = 0; i < 5; ++i)
        for (int j = i + 1; j < 5; ++j) {
            double d2 = 0.0;
            for (int q = 0; q < 2; ++q) {
                double d = a.proto(i)[q] - a.proto(j)[q];
                d2 += d * d;
            }
            dists.push_back(std::sqrt(d2));
        }
    std::sort(dists.begin(), dists.end());
    std::size_t m = dists.size();
    double median =
        (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    CHECK(a.gamma(0) == doctest::Approx(1.0 / median).epsilon(1e-12));

    ModelParams single = init_params(ds, 1, 3);
    CHECK(single.gamma(0) == 1.0);

    Dataset tiny = toy_dataset(3, 2, 1);
    CHECK_THROWS_AS(init_params(tiny, 5, 1), TooFewSamples);
    Dataset empty;
    empty.p = 2;
    CHECK_THROWS_AS(init_params(empty, 1, 1), EmptyDataset);
    CHECK_THROWS_AS(init_params(ds, 0, 1), InvalidParameter);
}

TEST_CASE("parameter json round trip is exact") {
    ModelParams params = random_params(3, 4, 12345);
    params.theta[0] = 1e-310;  // subnormal
    params.theta[1] = -0.0;
    params.theta[2] = 0.1 + 0.2; // not representable nicely

    ModelParams back = params_from_json(params_to_json(params));
    CHECK(back.K == params.K);
    CHECK(back.p == params.p);
    REQUIRE(back.theta.size() == params.theta.size());
    for (std::size_t i = 0; i < params.theta.size(); ++i) {
        CHECK(std::memcmp(&back.theta[i], &params.theta[i], sizeof(double)) == 0);
    }

    CHECK_THROWS_AS(params_from_json("{\"K\": 2}"), SchemaMismatch);
    CHECK_THROWS_AS(params_from_json("not json"), SchemaMismatch);
    CHECK_THROWS_AS(params_from_json("{\"K\":2,\"p\":1,\"theta\":[1,2]}"), SchemaMismatch);
}
