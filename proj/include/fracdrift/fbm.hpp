#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace fracdrift {

/// Hurst index of a fractional Brownian motion, 0 < H < 1.
class HurstIndex {
public:
    explicit HurstIndex(double value);
    double value() const noexcept { return value_; }
    /// True for the long-memory regime 1/2 < H < 1 the estimators require.
    bool long_memory() const noexcept { return value_ > 0.5; }

private:
    double value_;
};

/// Uniform grid t_k = k * t_max / n_steps, k = 0..n_steps.
class TimeGrid {
public:
    TimeGrid(double t_max, std::size_t n_steps);
    double t_max() const noexcept { return t_max_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_nodes() const noexcept { return n_steps_ + 1; }
    double step() const noexcept { return t_max_ / static_cast<double>(n_steps_); }
    double node(std::size_t k) const noexcept { return step() * static_cast<double>(k); }

    friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

private:
    double t_max_;
    std::size_t n_steps_;
};

/// Discretized fBm sample path; values[0] = 0.
struct GaussianPath {
    TimeGrid grid;
    std::vector<double> values;
};

/// Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double s, double t, HurstIndex hurst);

/// Mixes a master seed and a path index into an independent stream seed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index);

/// 64-bit Mersenne twister seeded through a splitmix64 scrambler.
std::mt19937_64 make_engine(std::uint64_t seed);

inline constexpr std::size_t kDefaultCholeskyCap = 4096;

/// Exact sampler: lower Cholesky factor of the covariance of (B_{t_1},...,B_{t_n}).
/// The factorization is computed once; sample() is O(n^2).
class CholeskyFbmSampler {
public:
    CholeskyFbmSampler(TimeGrid grid, HurstIndex hurst, std::size_t max_steps = kDefaultCholeskyCap);
    GaussianPath sample(std::uint64_t seed) const;
    const TimeGrid& grid() const noexcept { return grid_; }

private:
    TimeGrid grid_;
    HurstIndex hurst_;
    std::vector<double> factor_;  // row-major lower triangle, n x n
};

/// Davies-Harte circulant embedding of fractional Gaussian noise; O(n log n) per path.
class CirculantFbmSampler {
public:
    CirculantFbmSampler(TimeGrid grid, HurstIndex hurst);
    GaussianPath sample(std::uint64_t seed) const;
    const TimeGrid& grid() const noexcept { return grid_; }
    std::size_t embedding_size() const noexcept { return sqrt_eigenvalues_.size(); }

private:
    TimeGrid grid_;
    HurstIndex hurst_;
    std::vector<double> sqrt_eigenvalues_;  // sqrt(lambda_k / M)
};

GaussianPath sample_fbm_cholesky(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed,
                                 std::size_t max_steps = kDefaultCholeskyCap);
GaussianPath sample_fbm_circulant(const TimeGrid& grid, HurstIndex hurst, std::uint64_t seed);

}  // namespace fracdrift
