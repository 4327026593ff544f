#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "evreg/metrics.hpp"

using namespace evreg;

namespace {

// independent O(n^2) product-limit reference
std::vector<std::pair<double, double>> km_naive(const std::vector<double>& t,
                                                const std::vector<int>& d) {
    std::vector<double> uniq = t;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    std::vector<std::pair<double, double>> out;
    double s = 1.0;
    for (double u : uniq) {
        std::size_t risk = 0, events = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (t[i] >= u) ++risk;
            if (t[i] == u && d[i] == 1) ++events;
        }
        if (events > 0) {
            s *= 1.0 - static_cast<double>(events) / static_cast<double>(risk);
            out.emplace_back(u, s);
        }
    }
    return out;
}

} // namespace

TEST_CASE("product limit estimator on worked examples") {
    StepSurvival all = km_estimator({1.0, 2.0, 3.0}, {1, 1, 1});
    REQUIRE(all.times.size() == 3);
    CHECK(all.eval(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(all.eval(2.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(all.eval(3.0) == 0.0);
    CHECK(all.eval(0.5) == 1.0);
    CHECK(all.eval_left(1.0) == 1.0);
    CHECK(all.eval_left(2.5) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    StepSurvival cens = km_estimator({1.0, 2.0, 3.0}, {1, 0, 1});
    REQUIRE(cens.times.size() == 2);
    CHECK(cens.eval(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(cens.eval(2.5) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(cens.eval(3.0) == 0.0);

    StepSurvival tied = km_estimator({1.0, 1.0, 2.0}, {1, 1, 1});
    CHECK(tied.eval(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(tied.eval(2.0) == 0.0);

    StepSurvival flat = km_estimator({1.0, 2.0}, {0, 0});
    CHECK(flat.times.empty());
    CHECK(flat.eval(5.0) == 1.0);

    CHECK_THROWS_AS(km_estimator({}, {}), EmptyDataset);
    CHECK_THROWS_AS(km_estimator({1.0}, {1, 0}), DimensionMismatch);
    CHECK_THROWS_AS(km_estimator({-1.0}, {1}), NegativeTime);
    CHECK_THROWS_AS(km_estimator({1.0}, {2}), InvalidParameter);
}

TEST_CASE("product limit estimator matches a naive reference on random data") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> dur(0.1, 10.0);
    for (int rep = 0; rep < 30; ++rep) {
        std::size_t n = 5 + rng() % 60;
        std::vector<double> t(n);
        std::vector<int> d(n);
        for (std::size_t i = 0; i < n; ++i) {
            t[i] = (rng() % 4 == 0 && i > 0) ? t[i - 1] : dur(rng); // inject ties
            d[i] = rng() % 3 != 0;
        }
        StepSurvival km = km_estimator(t, d);
        auto ref = km_naive(t, d);
        REQUIRE(km.times.size() == ref.size());
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(km.times[i] == ref[i].first);
            CHECK(km.values[i] == doctest::Approx(ref[i].second).epsilon(1e-13));
        }
    }
}

TEST_CASE("survival curves are ordered, monotone and start near certainty") {
    LognormalRFN pred(GRFN(0.5, 0.8, 2.0));
    std::vector<double> grid = make_grid(1e-9, 20.0, 60);

    auto bel = survival_curve(pred, grid, SurvivalMode::Belief);
    auto pl = survival_curve(pred, grid, SurvivalMode::Plausibility);
    auto mid = survival_curve(pred, grid); // default midpoint

    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(bel[i] <= mid[i] + 1e-15);
        CHECK(mid[i] <= pl[i] + 1e-15);
        CHECK(mid[i] == doctest::Approx(0.5 * (bel[i] + pl[i])).epsilon(1e-15));
        if (i > 0) {
            CHECK(bel[i] <= bel[i - 1] + 1e-12);
            CHECK(pl[i] <= pl[i - 1] + 1e-12);
        }
        BeliefPlausibility bp =
            time_bel_pl(pred, grid[i], std::numeric_limits<double>::infinity());
        CHECK(bel[i] == bp.bel);
        CHECK(pl[i] == bp.pl);
    }
    CHECK(mid.front() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(mid.back() < 0.05);

    CHECK_THROWS_AS(survival_curve(pred, {2.0, 1.0}), InvalidParameter);
    CHECK_THROWS_AS(survival_curve(pred, {-1.0, 1.0}), NegativeTime);
}

TEST_CASE("concordance rewards correctly ordered risks") {
    std::vector<double> grid = make_grid(0.5, 3.5, 10);
    auto curve = [&](double rate) {
        std::vector<double> s;
        for (double t : grid) s.push_back(std::exp(-rate * t));
        return s;
    };

    std::vector<double> t = {1.0, 2.0, 3.0};
    std::vector<int> d = {1, 1, 1};
    std::vector<std::vector<double>> good = {curve(3.0), curve(2.0), curve(1.0)};
    CHECK(c_index_td(t, d, good, grid) == 1.0);
    std::vector<std::vector<double>> bad = {curve(1.0), curve(2.0), curve(3.0)};
    CHECK(c_index_td(t, d, bad, grid) == 0.0);

    // one concordant pair plus one exactly tied pair out of two comparable
    std::vector<double> t2 = {1.0, 2.0, 2.0};
    std::vector<int> d2 = {1, 1, 1};
    std::vector<std::vector<double>> s2 = {curve(2.0), curve(1.0), curve(2.0)};
    CHECK(c_index_td(t2, d2, s2, grid) == 0.75);

    // censored-before-everyone data has no usable ordering
    std::vector<int> none = {0, 0, 0};
    CHECK_THROWS_AS(c_index_td(t, none, good, grid), NoComparablePairs);

    // tied failure times, one censored: the event subject must look riskier
    std::vector<double> t3 = {2.0, 2.0};
    std::vector<int> d3 = {1, 0};
    std::vector<std::vector<double>> s3 = {curve(2.0), curve(1.0)};
    CHECK(c_index_td(t3, d3, s3, grid) == 1.0);
}

TEST_CASE("integrated scores on hand checkable extremes") {
    // no censoring, so the weights are all one
    std::vector<double> t = {1.0, 2.0, 4.0};
    std::vector<int> d = {1, 1, 1};
    std::vector<double> grid = {1.0, 2.0, 3.0, 4.0};

    std::vector<std::vector<double>> sure_death(3, std::vector<double>(grid.size(), 0.0));
    std::vector<std::vector<double>> sure_life(3, std::vector<double>(grid.size(), 1.0));

    // with S = 0: BS(t) = fraction still alive after t
    // alive fractions at the grid: 2/3, 1/3, 1/3, 0
    double b1 = 2.0 / 3.0, b2 = 1.0 / 3.0, b3 = 1.0 / 3.0, b4 = 0.0;
    double want_death = (0.5 * (b1 + b2) + 0.5 * (b2 + b3) + 0.5 * (b3 + b4)) / 3.0;
    CHECK(ibs(t, d, sure_death, grid) == doctest::Approx(want_death).epsilon(1e-14));

    // with S = 1: BS(t) = fraction already failed by t
    double a1 = 1.0 / 3.0, a2 = 2.0 / 3.0, a3 = 2.0 / 3.0, a4 = 1.0;
    double want_life = (0.5 * (a1 + a2) + 0.5 * (a2 + a3) + 0.5 * (a3 + a4)) / 3.0;
    CHECK(ibs(t, d, sure_life, grid) == doctest::Approx(want_life).epsilon(1e-14));

    // extreme overconfidence is finite thanks to the probability clamp
    double ll = ibll(t, d, sure_life, grid);
    CHECK(std::isfinite(ll));
    CHECK(ll > 5.0); // log(1e-7) scale penalties

    // middling predictions beat confident wrong ones
    std::vector<std::vector<double>> half(3, std::vector<double>(grid.size(), 0.5));
    CHECK(ibs(t, d, half, grid) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ibll(t, d, half, grid) == doctest::Approx(std::log(2.0)).epsilon(1e-14));

    CHECK_THROWS_AS(ibs(t, d, sure_life, std::vector<double>{2.0, 2.0}), DegenerateGrid);
    CHECK_THROWS_AS(ibs(t, d, {sure_life[0]}, grid), DimensionMismatch);
}

TEST_CASE("parallel metric evaluation equals the serial reference") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t n = 120;
    std::vector<double> t(n);
    std::vector<int> d(n);
    std::vector<double> grid = make_grid(0.1, 8.0, 50);
    std::vector<std::vector<double>> surv(n, std::vector<double>(grid.size()));
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = 0.1 + 8.0 * u(rng);
        d[i] = u(rng) < 0.7;
        double rate = 0.2 + 2.0 * u(rng);
        for (std::size_t g = 0; g < grid.size(); ++g) surv[i][g] = std::exp(-rate * grid[g]);
    }
    CHECK(ibs(t, d, surv, grid, Exec::Serial) == ibs(t, d, surv, grid, Exec::Parallel));
    CHECK(ibll(t, d, surv, grid, Exec::Serial) == ibll(t, d, surv, grid, Exec::Parallel));
}

TEST_CASE("interval coverage counts targets inside the belief bounds") {
    // degenerate predictions make the radius analytic
    std::vector<LognormalRFN> preds;
    for (int i = 0; i < 4; ++i) preds.push_back(LognormalRFN(GRFN(0.0, 0.0, 2.0)));
    double alpha = 0.8;
    double r = std::sqrt(-2.0 * std::log1p(-alpha) / 2.0);

    std::vector<double> targets = {0.0, 0.9 * r, -1.1 * r, 3.0 * r};
    CHECK(bpi_coverage(preds, targets, alpha) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(bpi_coverage(preds, targets, 0.0) == doctest::Approx(0.25).epsilon(1e-15));

    // coverage grows with the level
    double prev = 0.0;
    for (double a : {0.1, 0.5, 0.9, 0.99}) {
        double c = bpi_coverage(preds, targets, a);
        CHECK(c >= prev);
        prev = c;
    }

    preds.push_back(LognormalRFN(GRFN::vacuous()));
    targets.push_back(0.0);
    CHECK_THROWS_AS(bpi_coverage(preds, targets, 0.5), UnreachableLevel);
    CHECK_THROWS_AS(bpi_coverage({}, {}, 0.5), EmptyDataset);
}
