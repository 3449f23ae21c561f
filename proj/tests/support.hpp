#pragma once

#include "fracdrift/sde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace testing_support {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
    double standard_error = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double variance = ss / (n - 1.0);
    return {mean, variance, std::sqrt(variance / n)};
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance of a sample to the standard normal law.
inline double ks_distance_normal(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = normal_cdf(xs[i]);
        d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
    }
    return d;
}

/// Stationary linear-drift ensemble used across estimator tests.
inline fracdrift::SdeEnsemble linear_ensemble(std::size_t n_paths, double horizon, std::size_t n_steps,
                                              std::uint64_t seed, double hurst = 0.7) {
    fracdrift::SdeConfig config;
    config.drift = fracdrift::make_drift("linear", 1.0);
    config.sigma = 1.0;
    config.hurst = fracdrift::HurstIndex(hurst);
    config.grid = fracdrift::TimeGrid(horizon, n_steps);
    config.n_paths = n_paths;
    config.seed = seed;
    config.init = fracdrift::StationaryStart{};
    return fracdrift::simulate_ensemble(config);
}

}  // namespace testing_support
