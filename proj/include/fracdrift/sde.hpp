#pragma once

#include "fracdrift/fbm.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fracdrift {

using RealFunction = std::function<double(double)>;

/// Drift b0 of dX = b0(X) dt + sigma dB together with the constants the
/// estimators need: a certified bound on |b0'|, sup b0' and, for dissipative
/// drifts, the margin m with b0' <= -m.
struct DriftSpec {
    std::string id;
    RealFunction b0;
    RealFunction b0_prime;
    double lipschitz_bound = 0.0;
    double sup_derivative = 0.0;
    std::optional<double> dissipativity_margin;
    /// Rate theta of the linear drift b0(x) = -theta x; its stationary law is Gaussian.
    std::optional<double> linear_rate;
};

/// Built-in registry: "linear" (b0 = -rate x) and "linear-plus-sine" (b0 = -2x + sin x).
DriftSpec make_drift(const std::string& id, double rate = 1.0);

/// Spot-checks |b0'| <= lipschitz_bound and b0' <= -margin on a probe grid.
void validate_drift(const DriftSpec& drift, double lo = -10.0, double hi = 10.0,
                    std::size_t probes = 2001);

/// Var of the stationary fractional Ornstein-Uhlenbeck law for b0(x) = -rate x.
double fou_stationary_variance(double rate, double sigma, HurstIndex hurst);

struct SdePath {
    TimeGrid grid;
    std::vector<double> values;
    double x0() const { return values.front(); }
    double terminal() const { return values.back(); }
};

/// X_{k+1} = X_k + b0(X_k) dt + sigma (B_{k+1} - B_k).
SdePath euler_solve(double x0, const DriftSpec& drift, double sigma, const GaussianPath& noise);

enum class FbmMethod { cholesky, circulant };

/// Simulates from x = 0 at time -burn_multiplier/m and returns the restriction to [0, T].
SdePath burn_in_stationary(const DriftSpec& drift, double sigma, HurstIndex hurst,
                           const TimeGrid& grid, double burn_multiplier, std::uint64_t seed,
                           FbmMethod method = FbmMethod::circulant);

struct FixedStart {
    double x0 = 0.0;
};
struct StationaryStart {
    double burn_multiplier = 10.0;
};
using InitMode = std::variant<FixedStart, StationaryStart>;

struct SdeConfig {
    DriftSpec drift;
    double sigma = 1.0;
    HurstIndex hurst{0.7};
    TimeGrid grid{1.0, 256};
    std::size_t n_paths = 1;
    std::uint64_t seed = 0;
    InitMode init = StationaryStart{};
    FbmMethod method = FbmMethod::circulant;
};

struct SdeEnsemble {
    std::vector<SdePath> paths;
    HurstIndex hurst{0.7};
    double sigma = 1.0;
    std::string drift_id;
    std::uint64_t master_seed = 0;
    std::vector<std::uint64_t> seeds;

    const TimeGrid& grid() const { return paths.front().grid; }
    std::size_t size() const noexcept { return paths.size(); }
    double horizon() const { return grid().t_max(); }
};

/// N paths with per-path seeds derive_seed(seed, i); path i does not depend on N.
SdeEnsemble simulate_ensemble(const SdeConfig& config);

}  // namespace fracdrift
