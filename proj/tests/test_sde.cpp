#include "doctest.h"

#include "fracdrift/errors.hpp"
#include "fracdrift/sde.hpp"
#include "support.hpp"

#include <cmath>
#include <cstdlib>

using namespace fracdrift;
using testing_support::moments;

namespace {

DriftSpec zero_drift() {
    DriftSpec d;
    d.id = "zero";
    d.b0 = [](double) { return 0.0; };
    d.b0_prime = [](double) { return 0.0; };
    return d;
}

// Exponential integrator for dX = -X dt + dB on the fine noise grid.
std::vector<double> integrating_factor_reference(double x0, const GaussianPath& fine) {
    const double h = fine.grid.step();
    const double decay = std::exp(-h);
    const double half = std::exp(-0.5 * h);
    std::vector<double> x(fine.values.size());
    x[0] = x0;
    for (std::size_t k = 0; k + 1 < x.size(); ++k) {
        x[k + 1] = decay * x[k] + half * (fine.values[k + 1] - fine.values[k]);
    }
    return x;
}

GaussianPath subsample(const GaussianPath& fine, std::size_t factor) {
    const std::size_t n = fine.grid.n_steps() / factor;
    GaussianPath coarse{TimeGrid(fine.grid.t_max(), n), std::vector<double>(n + 1)};
    for (std::size_t k = 0; k <= n; ++k) coarse.values[k] = fine.values[k * factor];
    return coarse;
}

double max_deviation(const SdePath& coarse, const std::vector<double>& fine, std::size_t factor) {
    double worst = 0.0;
    for (std::size_t k = 0; k < coarse.values.size(); ++k) {
        worst = std::max(worst, std::abs(coarse.values[k] - fine[k * factor]));
    }
    return worst;
}

}  // namespace

TEST_CASE("drift registry") {
    const DriftSpec linear = make_drift("linear", 2.0);
    CHECK(linear.b0(1.5) == doctest::Approx(-3.0));
    CHECK(linear.lipschitz_bound == 2.0);
    CHECK(*linear.dissipativity_margin == 2.0);
    CHECK_NOTHROW(validate_drift(linear));
    const DriftSpec sine = make_drift("linear-plus-sine");
    CHECK(sine.b0(0.3) == doctest::Approx(-0.6 + std::sin(0.3)));
    CHECK_NOTHROW(validate_drift(sine));
    CHECK_THROWS_AS(make_drift("cubic"), DomainError);
    CHECK_THROWS_AS(make_drift("linear", -1.0), DomainError);

    DriftSpec wrong = sine;
    wrong.lipschitz_bound = 2.5;
    CHECK_THROWS_AS(validate_drift(wrong), DomainError);
}

TEST_CASE("fOU stationary variance reduces to the OU value at H = 1/2") {
    CHECK(fou_stationary_variance(2.0, 3.0, HurstIndex(0.5)) == doctest::Approx(9.0 / 4.0));
}

TEST_CASE("zero drift reproduces the scaled noise") {
    const GaussianPath noise = sample_fbm_circulant(TimeGrid(1.0, 128), HurstIndex(0.7), 3);
    const SdePath path = euler_solve(0.25, zero_drift(), 1.5, noise);
    for (std::size_t k = 0; k < noise.values.size(); ++k) {
        CHECK(path.values[k] == doctest::Approx(0.25 + 1.5 * noise.values[k]).epsilon(1e-14));
    }
}

TEST_CASE("Euler errors") {
    const GaussianPath noise = sample_fbm_circulant(TimeGrid(1.0, 64), HurstIndex(0.7), 3);
    CHECK_THROWS_AS(euler_solve(0.0, zero_drift(), 0.0, noise), DomainError);

    DriftSpec explosive = zero_drift();
    explosive.b0 = [](double x) { return x * x * x * x; };
    try {
        euler_solve(10.0, explosive, 1.0, noise);
        FAIL("expected NonFiniteError");
    } catch (const NonFiniteError& e) {
        CHECK(e.index() >= 1);
        CHECK(e.index() <= 64);
    }
    CHECK_THROWS_AS(burn_in_stationary(zero_drift(), 1.0, HurstIndex(0.7), TimeGrid(1.0, 16), 10.0, 1),
                    DomainError);
}

TEST_CASE("Euler matches a fine-grid integrating-factor solution") {
    const GaussianPath fine = sample_fbm_circulant(TimeGrid(1.0, 256 * 16), HurstIndex(0.7), 41);
    const std::vector<double> reference = integrating_factor_reference(0.8, fine);
    const SdePath coarse = euler_solve(0.8, make_drift("linear"), 1.0, subsample(fine, 16));
    double scale = 0.0;
    for (double x : reference) scale = std::max(scale, std::abs(x));
    CHECK(max_deviation(coarse, reference, 16) / scale <= 2e-2);
}

TEST_CASE("strong error is first order in the step") {
    double err_coarse = 0.0, err_fine = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GaussianPath fine = sample_fbm_circulant(TimeGrid(1.0, 4096), HurstIndex(0.7), 100 + seed);
        const std::vector<double> reference = integrating_factor_reference(0.8, fine);
        err_coarse += max_deviation(euler_solve(0.8, make_drift("linear"), 1.0, subsample(fine, 64)), reference, 64);
        err_fine += max_deviation(euler_solve(0.8, make_drift("linear"), 1.0, subsample(fine, 32)), reference, 32);
    }
    const double ratio = err_coarse / err_fine;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.5);
}

TEST_CASE("burn-in reaches the stationary fOU law") {
    SdeConfig config;
    config.drift = make_drift("linear", 1.0);
    config.grid = TimeGrid(1.0, 64);
    config.n_paths = 4000;
    config.seed = 2024;
    const SdeEnsemble ensemble = simulate_ensemble(config);
    std::vector<double> x0;
    for (const auto& path : ensemble.paths) x0.push_back(path.x0());
    const auto m = moments(x0);
    const double exact = fou_stationary_variance(1.0, 1.0, HurstIndex(0.7));
    CHECK(std::abs(m.variance / exact - 1.0) < 0.05);
    CHECK(std::abs(m.mean) < 4.0 * m.standard_error);

    // Doubling the burn-in leaves the variance unchanged within Monte Carlo error.
    config.init = StationaryStart{20.0};
    config.seed = 2025;
    std::vector<double> x0_long;
    for (const auto& path : simulate_ensemble(config).paths) x0_long.push_back(path.x0());
    const auto m_long = moments(x0_long);
    const double se_diff = std::sqrt(2.0 / 3999.0) * std::hypot(m.variance, m_long.variance);
    CHECK(std::abs(m_long.variance - m.variance) < 2.0 * se_diff);
}

TEST_CASE("ensemble seed contract") {
    SdeConfig config;
    config.drift = make_drift("linear-plus-sine");
    config.grid = TimeGrid(1.0, 32);
    config.seed = 77;
    config.n_paths = 10;
    const SdeEnsemble small = simulate_ensemble(config);
    config.n_paths = 100;
    const SdeEnsemble large = simulate_ensemble(config);
    CHECK(small.paths[3].values == large.paths[3].values);
    CHECK(small.seeds[3] == derive_seed(77, 3));

    config.n_paths = 1;
    const SdeEnsemble single = simulate_ensemble(config);
    const SdePath direct = burn_in_stationary(config.drift, config.sigma, config.hurst, config.grid, 10.0,
                                              derive_seed(77, 0));
    CHECK(single.paths[0].values == direct.values);

    config.init = FixedStart{0.5};
    const SdeEnsemble fixed = simulate_ensemble(config);
    const SdePath manual = euler_solve(0.5, config.drift, 1.0,
                                       sample_fbm_circulant(config.grid, config.hurst, derive_seed(77, 0)));
    CHECK(fixed.paths[0].values == manual.values);
}

TEST_CASE("ensembles do not depend on the worker count") {
    SdeConfig config;
    config.drift = make_drift("linear");
    config.grid = TimeGrid(1.0, 32);
    config.n_paths = 24;
    config.seed = 5;
    setenv("FRACDRIFT_THREADS", "1", 1);
    const SdeEnsemble serial = simulate_ensemble(config);
    setenv("FRACDRIFT_THREADS", "4", 1);
    const SdeEnsemble threaded = simulate_ensemble(config);
    unsetenv("FRACDRIFT_THREADS");
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(serial.paths[i].values == threaded.paths[i].values);
}

TEST_CASE("odd drift gives a symmetric occupation density") {
    const SdeEnsemble ensemble = testing_support::linear_ensemble(400, 2.0, 128, 8);
    std::vector<double> positive_fraction;
    for (const auto& path : ensemble.paths) {
        double count = 0.0;
        for (double x : path.values) count += x > 0.0 ? 1.0 : 0.0;
        positive_fraction.push_back(count / static_cast<double>(path.values.size()));
    }
    const auto m = moments(positive_fraction);
    CHECK(std::abs(m.mean - 0.5) < 4.0 * m.standard_error);
}

TEST_CASE("dissipative paths stay bounded as N grows") {
    auto quantile = [](std::size_t n) {
        const SdeEnsemble ensemble = testing_support::linear_ensemble(n, 1.0, 64, 12);
        std::vector<double> sups;
        for (const auto& path : ensemble.paths) {
            double s = 0.0;
            for (double x : path.values) s = std::max(s, std::abs(x));
            sups.push_back(s);
        }
        std::sort(sups.begin(), sups.end());
        return sups[static_cast<std::size_t>(0.999 * static_cast<double>(n - 1))];
    };
    const double q_small = quantile(1000);
    const double q_large = quantile(4000);
    CHECK(q_large < 1.5 * q_small);
    CHECK(q_large < 6.0);
}
