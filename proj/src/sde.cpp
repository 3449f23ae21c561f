#include "fracdrift/sde.hpp"

#include "fracdrift/errors.hpp"
#include "fracdrift/parallel.hpp"

#include <cmath>
#include <memory>

namespace fracdrift {

namespace {

using NoiseSource = std::function<GaussianPath(std::uint64_t)>;

NoiseSource make_noise_source(const TimeGrid& grid, HurstIndex hurst, FbmMethod method) {
    if (method == FbmMethod::cholesky) {
        auto sampler = std::make_shared<const CholeskyFbmSampler>(grid, hurst);
        return [sampler](std::uint64_t seed) { return sampler->sample(seed); };
    }
    auto sampler = std::make_shared<const CirculantFbmSampler>(grid, hurst);
    return [sampler](std::uint64_t seed) { return sampler->sample(seed); };
}

std::size_t burn_steps(const DriftSpec& drift, const TimeGrid& grid, double burn_multiplier) {
    if (!drift.dissipativity_margin) {
        throw DomainError("stationary start requires a dissipative drift (margin missing for '" +
                          drift.id + "')");
    }
    if (!(burn_multiplier > 0.0)) throw DomainError("burn_multiplier must be positive");
    const double burn_time = burn_multiplier / *drift.dissipativity_margin;
    return static_cast<std::size_t>(std::ceil(burn_time / grid.step()));
}

TimeGrid extended_grid(const TimeGrid& grid, std::size_t n_burn) {
    const std::size_t total = n_burn + grid.n_steps();
    return TimeGrid(grid.step() * static_cast<double>(total), total);
}

// Runs Euler over the burn-in window and returns the part after n_burn steps.
SdePath restrict_after_burn_in(const DriftSpec& drift, double sigma, const TimeGrid& grid,
                               const GaussianPath& long_noise, std::size_t n_burn) {
    const SdePath full = euler_solve(0.0, drift, sigma, long_noise);
    SdePath path{grid, std::vector<double>(full.values.begin() + static_cast<std::ptrdiff_t>(n_burn),
                                           full.values.end())};
    return path;
}

}  // namespace

DriftSpec make_drift(const std::string& id, double rate) {
    if (id == "linear") {
        if (!(rate > 0.0)) throw DomainError("linear drift needs a positive rate");
        DriftSpec d;
        d.id = id;
        d.b0 = [rate](double x) { return -rate * x; };
        d.b0_prime = [rate](double) { return -rate; };
        d.lipschitz_bound = rate;
        d.sup_derivative = -rate;
        d.dissipativity_margin = rate;
        d.linear_rate = rate;
        return d;
    }
    if (id == "linear-plus-sine") {
        DriftSpec d;
        d.id = id;
        d.b0 = [](double x) { return -2.0 * x + std::sin(x); };
        d.b0_prime = [](double x) { return -2.0 + std::cos(x); };
        d.lipschitz_bound = 3.0;
        d.sup_derivative = -1.0;
        d.dissipativity_margin = 1.0;
        return d;
    }
    throw DomainError("unknown drift id '" + id + "'");
}

void validate_drift(const DriftSpec& drift, double lo, double hi, std::size_t probes) {
    if (!drift.b0 || !drift.b0_prime) throw DomainError("drift '" + drift.id + "' is incomplete");
    for (std::size_t k = 0; k < probes; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(probes - 1);
        const double d = drift.b0_prime(x);
        if (std::abs(d) > drift.lipschitz_bound * (1.0 + 1e-12)) {
            throw DomainError("drift '" + drift.id + "' exceeds its Lipschitz bound at x=" +
                              std::to_string(x));
        }
        if (d > drift.sup_derivative + 1e-12 * (1.0 + std::abs(drift.sup_derivative))) {
            throw DomainError("drift '" + drift.id + "' exceeds sup b0' at x=" + std::to_string(x));
        }
        if (drift.dissipativity_margin && d > -*drift.dissipativity_margin * (1.0 - 1e-12)) {
            throw DomainError("drift '" + drift.id + "' violates dissipativity at x=" +
                              std::to_string(x));
        }
    }
}

double fou_stationary_variance(double rate, double sigma, HurstIndex hurst) {
    const double h = hurst.value();
    return sigma * sigma * std::pow(rate, -2.0 * h) * h * std::tgamma(2.0 * h);
}

SdePath euler_solve(double x0, const DriftSpec& drift, double sigma, const GaussianPath& noise) {
    if (sigma == 0.0) throw DomainError("sigma must be non-zero");
    const std::size_t n = noise.grid.n_steps();
    if (noise.values.size() != n + 1) throw DomainError("noise path length does not match its grid");
    const double dt = noise.grid.step();

    SdePath path{noise.grid, std::vector<double>(n + 1)};
    double x = x0;
    path.values[0] = x;
    for (std::size_t k = 0; k < n; ++k) {
        x += drift.b0(x) * dt + sigma * (noise.values[k + 1] - noise.values[k]);
        if (!std::isfinite(x)) throw NonFiniteError("Euler state", k + 1);
        path.values[k + 1] = x;
    }
    return path;
}

SdePath burn_in_stationary(const DriftSpec& drift, double sigma, HurstIndex hurst,
                           const TimeGrid& grid, double burn_multiplier, std::uint64_t seed,
                           FbmMethod method) {
    const std::size_t n_burn = burn_steps(drift, grid, burn_multiplier);
    const TimeGrid long_grid = extended_grid(grid, n_burn);
    const GaussianPath noise = make_noise_source(long_grid, hurst, method)(seed);
    return restrict_after_burn_in(drift, sigma, grid, noise, n_burn);
}

SdeEnsemble simulate_ensemble(const SdeConfig& config) {
    if (config.n_paths == 0) throw DomainError("ensemble needs at least one path");
    if (config.sigma == 0.0) throw DomainError("sigma must be non-zero");

    SdeEnsemble ensemble;
    ensemble.hurst = config.hurst;
    ensemble.sigma = config.sigma;
    ensemble.drift_id = config.drift.id;
    ensemble.master_seed = config.seed;
    ensemble.seeds.resize(config.n_paths);
    for (std::size_t i = 0; i < config.n_paths; ++i) ensemble.seeds[i] = derive_seed(config.seed, i);

    std::vector<std::optional<SdePath>> slots(config.n_paths);
    if (const auto* start = std::get_if<StationaryStart>(&config.init)) {
        const std::size_t n_burn = burn_steps(config.drift, config.grid, start->burn_multiplier);
        const NoiseSource noise =
            make_noise_source(extended_grid(config.grid, n_burn), config.hurst, config.method);
        parallel_for(config.n_paths, [&](std::size_t i) {
            slots[i] = restrict_after_burn_in(config.drift, config.sigma, config.grid,
                                              noise(ensemble.seeds[i]), n_burn);
        });
    } else {
        const double x0 = std::get<FixedStart>(config.init).x0;
        const NoiseSource noise = make_noise_source(config.grid, config.hurst, config.method);
        parallel_for(config.n_paths, [&](std::size_t i) {
            slots[i] = euler_solve(x0, config.drift, config.sigma, noise(ensemble.seeds[i]));
        });
    }
    ensemble.paths.reserve(config.n_paths);
    for (auto& slot : slots) ensemble.paths.push_back(std::move(*slot));
    return ensemble;
}

}  // namespace fracdrift
