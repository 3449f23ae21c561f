#include "fracdrift/fbm.hpp"

#include "fracdrift/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <string>

namespace fracdrift {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocovariance(std::size_t k, double hurst) {
    const double two_h = 2.0 * hurst;
    const double kd = static_cast<double>(k);
    if (k == 0) return 1.0;
    return 0.5 * (std::pow(kd + 1.0, two_h) - 2.0 * std::pow(kd, two_h) + std::pow(kd - 1.0, two_h));
}

std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

HurstIndex::HurstIndex(double value) : value_(value) {
    if (!(value > 0.0 && value < 1.0)) {
        throw DomainError("Hurst index must lie in (0,1), got " + std::to_string(value));
    }
}

TimeGrid::TimeGrid(double t_max, std::size_t n_steps) : t_max_(t_max), n_steps_(n_steps) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw DomainError("time horizon must be positive and finite");
    }
    if (n_steps == 0) throw DomainError("time grid needs at least one step");
}

double fbm_covariance(double s, double t, HurstIndex hurst) {
    if (s < 0.0 || t < 0.0) throw DomainError("fbm_covariance requires non-negative times");
    const double two_h = 2.0 * hurst.value();
    return 0.5 * (std::pow(s, two_h) + std::pow(t, two_h) - std::pow(std::abs(t - s), two_h));
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

std::mt19937_64 make_engine(std::uint64_t seed) { return std::mt19937_64(splitmix64(seed)); }

CholeskyFbmSampler::CholeskyFbmSampler(TimeGrid grid, HurstIndex hurst, std::size_t max_steps)
    : grid_(grid), hurst_(hurst) {
    const std::size_t n = grid_.n_steps();
    if (n > max_steps) {
        throw DomainError("Cholesky sampler limited to " + std::to_string(max_steps) +
                          " steps, got " + std::to_string(n));
    }
    factor_.assign(n * n, 0.0);
    auto at = [&](std::size_t r, std::size_t c) -> double& { return factor_[r * n + c]; };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            at(i, j) = fbm_covariance(grid_.node(i + 1), grid_.node(j + 1), hurst_);
        }
    }
    // In-place Cholesky, no jitter.
    for (std::size_t j = 0; j < n; ++j) {
        double diag = at(j, j);
        for (std::size_t k = 0; k < j; ++k) diag -= at(j, k) * at(j, k);
        if (!(diag > 0.0)) throw FactorizationError(j, diag);
        const double pivot = std::sqrt(diag);
        at(j, j) = pivot;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = at(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= at(i, k) * at(j, k);
            at(i, j) = v / pivot;
        }
    }
}

GaussianPath CholeskyFbmSampler::sample(std::uint64_t seed) const {
    const std::size_t n = grid_.n_steps();
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal;
    std::vector<double> z(n);
    for (auto& v : z) v = normal(engine);

    GaussianPath path{grid_, std::vector<double>(n + 1, 0.0)};
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = &factor_[i * n];
        double acc = 0.0;
        for (std::size_t k = 0; k <= i; ++k) acc += row[k] * z[k];
        path.values[i + 1] = acc;
    }
    return path;
}

CirculantFbmSampler::CirculantFbmSampler(TimeGrid grid, HurstIndex hurst)
    : grid_(grid), hurst_(hurst) {
    const std::size_t half = next_power_of_two(grid_.n_steps());
    const std::size_t size = 2 * half;
    std::vector<std::complex<double>> row(size);
    for (std::size_t k = 0; k <= half; ++k) row[k] = fgn_autocovariance(k, hurst_.value());
    for (std::size_t k = half + 1; k < size; ++k) row[k] = row[size - k];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, row);

    double largest = 0.0;
    for (const auto& c : spectrum) largest = std::max(largest, c.real());
    sqrt_eigenvalues_.resize(size);
    for (std::size_t k = 0; k < size; ++k) {
        double lambda = spectrum[k].real();
        if (lambda < 0.0) {
            if (lambda < -1e-10 * largest) throw EmbeddingError(k, lambda);
            lambda = 0.0;
        }
        sqrt_eigenvalues_[k] = std::sqrt(lambda / static_cast<double>(size));
    }
}

GaussianPath CirculantFbmSampler::sample(std::uint64_t seed) const {
    const std::size_t size = sqrt_eigenvalues_.size();
    const std::size_t n = grid_.n_steps();
    auto engine = make_engine(seed);
    std::normal_distribution<double> normal;

    std::vector<std::complex<double>> weighted(size);
    for (std::size_t k = 0; k < size; ++k) {
        const double re = normal(engine);
        const double im = normal(engine);
        weighted[k] = sqrt_eigenvalues_[k] * std::complex<double>(re, im);
    }
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> noise;
    fft.fwd(noise, weighted);

    const double scale = std::pow(grid_.step(), hurst_.value());
    GaussianPath path{grid_, std::vector<double>(n + 1, 0.0)};
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        acc += scale * noise[k].real();
        path.values[k + 1] = acc;
    }
    return path;
}

GaussianPath sample_fbm_cholesky(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                                 std::size_t max_steps) {
    return CholeskyFbmSampler(grid, hurst, max_steps).sample(seed);
}

GaussianPath sample_fbm_circulant(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed) {
    return CirculantFbmSampler(grid, hurst).sample(seed);
}

}  // namespace fracdrift
