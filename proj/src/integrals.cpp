#include "fracdrift/integrals.hpp"

#include "fracdrift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracdrift {

namespace {

// exp() overflows just above 709.78.
constexpr double kMaxExponent = 700.0;
// Below this spread of C the factorization exp(C_k - C_l) = e^{C_k - c0} e^{c0 - C_l}
// stays well inside double range.
constexpr double kFactorizedSpread = 600.0;

}  // namespace

KernelGrid::KernelGrid(TimeGrid grid, HurstIndex hurst) : grid_(grid), hurst_(hurst) {
    if (!hurst.long_memory()) throw DomainError("kernel |t-s|^{2H-2} requires H > 1/2");
    const double two_h = 2.0 * hurst.value();
    const double scale = std::pow(grid.step(), two_h) / (two_h * (two_h - 1.0));
    const std::size_t n = grid.n_steps();
    lag_weights_.resize(n);
    lag_weights_[0] = scale;
    for (std::size_t d = 1; d < n; ++d) {
        // d^{2H} [(1 + 1/d)^{2H} - 2 + (1 - 1/d)^{2H}] without cancellation in the leading terms.
        const double x = 1.0 / static_cast<double>(d);
        const double second_difference =
            std::expm1(two_h * std::log1p(x)) + std::expm1(two_h * std::log1p(-x));
        lag_weights_[d] = scale * std::pow(static_cast<double>(d), two_h) * second_difference;
    }
}

double KernelGrid::total() const {
    const std::size_t n = grid_.n_steps();
    double acc = 0.0;
    for (std::size_t d = 0; d < n; ++d) acc += static_cast<double>(n - d) * lag_weights_[d];
    return acc;
}

double KernelGrid::closed_form_total(double t_max, HurstIndex hurst) {
    const double two_h = 2.0 * hurst.value();
    return std::pow(t_max, two_h) / (two_h * (two_h - 1.0));
}

Integrand basis_integrand(const TrigBasis& basis, std::size_t j) {
    if (j >= basis.size()) throw DomainError("basis index out of range");
    return Integrand{[&basis, j](double x) { return basis.value(j, x); },
                     [&basis, j](double x) { return basis.derivative(j, x); },
                     [&basis, j](double x) { return basis.antiderivative(j, x); }};
}

double young_integral(const SdePath& path, const RealFunction& antiderivative) {
    return antiderivative(path.terminal()) - antiderivative(path.x0());
}

double path_time_integral(const SdePath& path, const RealFunction& g) {
    const std::size_t n = path.grid.n_steps();
    double acc = 0.5 * (g(path.values[0]) + g(path.values[n]));
    for (std::size_t k = 1; k < n; ++k) acc += g(path.values[k]);
    return acc * path.grid.step();
}

std::vector<double> cumulative_trapezoid(const SdePath& path, const RealFunction& g) {
    const std::size_t n = path.grid.n_steps();
    const double half_dt = 0.5 * path.grid.step();
    std::vector<double> cumulative(n + 1, 0.0);
    double previous = g(path.values[0]);
    for (std::size_t k = 0; k < n; ++k) {
        const double next = g(path.values[k + 1]);
        cumulative[k + 1] = cumulative[k] + half_dt * (previous + next);
        previous = next;
    }
    return cumulative;
}

double kernel_double_integral(const std::function<double(double, double)>& g,
                              const KernelGrid& kernel) {
    const TimeGrid& grid = kernel.grid();
    const std::size_t n = grid.n_steps();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = grid.node(k);
        double row = 0.0;
        for (std::size_t l = 0; l <= k; ++l) {
            const double value = g(grid.node(l), t);
            if (!std::isfinite(value)) throw NonFiniteError("kernel integrand", k * n + l);
            row += value * kernel.weight(k, l);
        }
        acc += row;
    }
    return acc;
}

std::vector<double> exp_kernel_row_sums(std::span<const double> cumulative, const KernelGrid& kernel) {
    return exp_kernel_row_sums(cumulative, kernel, {});
}

std::vector<double> exp_kernel_row_sums(std::span<const double> cumulative, const KernelGrid& kernel,
                                        std::span<const double> values) {
    const std::size_t n = kernel.grid().n_steps();
    if (cumulative.size() < n) throw DomainError("cumulative exponent shorter than the grid");
    const bool weighted = !values.empty();
    if (weighted && values.size() < n) throw DomainError("weights shorter than the grid");
    const std::span<const double> w = kernel.lag_weights();

    double running_min = cumulative[0];
    double max_exponent = 0.0;
    double lowest = cumulative[0];
    double highest = cumulative[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double c = cumulative[k];
        if (!std::isfinite(c)) throw NonFiniteError("cumulative exponent", k);
        running_min = std::min(running_min, c);
        max_exponent = std::max(max_exponent, c - running_min);
        lowest = std::min(lowest, c);
        highest = std::max(highest, c);
    }
    if (max_exponent > kMaxExponent) throw ExponentOverflowError(max_exponent);

    std::vector<double> sums(n, 0.0);
    if (highest - lowest < kFactorizedSpread) {
        std::vector<double> up(n), down(n);
        for (std::size_t k = 0; k < n; ++k) {
            up[k] = std::exp(cumulative[k] - lowest);
            down[k] = std::exp(lowest - cumulative[k]);
            if (weighted) down[k] *= values[k];
        }
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l <= k; ++l) acc += down[l] * w[k - l];
            sums[k] = up[k] * acc;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l <= k; ++l) {
                const double v = weighted ? values[l] : 1.0;
                acc += std::exp(cumulative[k] - cumulative[l]) * w[k - l] * v;
            }
            sums[k] = acc;
        }
    }
    return sums;
}

double exp_weighted_correction(const SdePath& path, const RealFunction& phi_prime,
                               const RealFunction& psi_prime, const KernelGrid& kernel) {
    if (!(path.grid == kernel.grid())) throw DomainError("path and kernel grids differ");
    const std::vector<double> cumulative = cumulative_trapezoid(path, psi_prime);
    const std::vector<double> row_sums = exp_kernel_row_sums(cumulative, kernel);
    double acc = 0.0;
    for (std::size_t k = 0; k < row_sums.size(); ++k) {
        const double d = phi_prime(path.values[k]);
        if (!std::isfinite(d)) throw NonFiniteError("phi'", k);
        acc += d * row_sums[k];
    }
    return acc;
}

double skorokhod_integral(const SdePath& path, const Integrand& phi, const RealFunction& b0_prime,
                          double sigma, const KernelGrid& kernel) {
    const double h = kernel.hurst().value();
    const double amplitude = sigma * sigma * h * (2.0 * h - 1.0);
    return young_integral(path, phi.antiderivative) -
           amplitude * exp_weighted_correction(path, phi.derivative, b0_prime, kernel);
}

double skorokhod_noise_component(const SdePath& path, const Integrand& phi, const DriftSpec& drift,
                                 double sigma, const KernelGrid& kernel) {
    const double skorokhod = skorokhod_integral(path, phi, drift.b0_prime, sigma, kernel);
    const double drift_part =
        path_time_integral(path, [&](double x) { return phi.value(x) * drift.b0(x); });
    return (skorokhod - drift_part) / sigma;
}

double stationary_scale(double sup_derivative, HurstIndex hurst, double t_max) {
    const double two_h = 2.0 * hurst.value();
    const double h = hurst.value();
    if (sup_derivative < 0.0) return std::pow(-h / sup_derivative, two_h);
    if (sup_derivative == 0.0) return std::pow(t_max, two_h);
    return std::pow(h / sup_derivative, two_h) * std::exp(2.0 * sup_derivative * t_max);
}

double variance_bound_skorokhod(double integrated_phi_sq, double integrated_phi_prime_sq,
                                double sup_derivative, HurstIndex hurst, [[maybe_unused]] double sigma,
                                double t_max, double constant) {
    // sigma only enters through `constant`.
    const double scale = std::max(1.0, stationary_scale(sup_derivative, hurst, t_max));
    return constant * scale * std::pow(t_max, 2.0 * hurst.value() - 1.0) *
           (integrated_phi_sq + integrated_phi_prime_sq);
}

}  // namespace fracdrift
