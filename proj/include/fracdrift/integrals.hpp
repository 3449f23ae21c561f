#pragma once

#include "fracdrift/basis.hpp"
#include "fracdrift/fbm.hpp"
#include "fracdrift/sde.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace fracdrift {

/// Exact cell weights of the kernel |t - s|^{2H-2} over the lower triangle
/// 0 <= s <= t <= T of a uniform grid.
///
/// Cell (k, l), l <= k, is [s_l, s_{l+1}] x [t_k, t_{k+1}] (a triangle when
/// k == l). On a uniform grid the weight only depends on the lag d = k - l:
///   w_0 = G(dt),  w_d = G((d+1) dt) - 2 G(d dt) + G((d-1) dt),
/// with G(u) = u^{2H} / (2H (2H-1)) the double primitive of u^{2H-2}.
/// The weights telescope to G(T).
class KernelGrid {
public:
    KernelGrid(TimeGrid grid, HurstIndex hurst);

    const TimeGrid& grid() const noexcept { return grid_; }
    HurstIndex hurst() const noexcept { return hurst_; }
    double weight(std::size_t k, std::size_t l) const { return lag_weights_[k - l]; }
    std::span<const double> lag_weights() const noexcept { return lag_weights_; }
    /// Sum of all cell weights.
    double total() const;
    /// T^{2H} / (2H (2H - 1)).
    static double closed_form_total(double t_max, HurstIndex hurst);

private:
    TimeGrid grid_;
    HurstIndex hurst_;
    std::vector<double> lag_weights_;
};

/// phi together with phi' and a primitive, enough to form pathwise and
/// Skorokhod integrals of phi(X).
struct Integrand {
    RealFunction value;
    RealFunction derivative;
    RealFunction antiderivative;
};

/// Closures over basis element j; `basis` must outlive the result.
Integrand basis_integrand(const TrigBasis& basis, std::size_t j);

/// int_0^T phi(X) dX = Phi(X_T) - Phi(X_0) for a primitive Phi of phi.
double young_integral(const SdePath& path, const RealFunction& antiderivative);

/// Trapezoid rule for int_0^T g(X_t) dt.
double path_time_integral(const SdePath& path, const RealFunction& g);

/// C_k = int_0^{t_k} g(X_u) du by the cumulative trapezoid rule, k = 0..n.
std::vector<double> cumulative_trapezoid(const SdePath& path, const RealFunction& g);

/// sum_{k, l <= k} g(s_l, t_k) w_{k-l}; g is sampled at the lower-left corner of each cell.
double kernel_double_integral(const std::function<double(double, double)>& g,
                              const KernelGrid& kernel);

/// A_k = sum_{l <= k} exp(C_k - C_l) w_{k-l} for k = 0..n-1, given the
/// cumulative exponent C (length >= n). Throws ExponentOverflowError when
/// max_{l <= k} (C_k - C_l) would overflow exp.
std::vector<double> exp_kernel_row_sums(std::span<const double> cumulative, const KernelGrid& kernel);

/// sum_{l <= k} exp(C_k - C_l) w_{k-l} v_l for k = 0..n-1.
std::vector<double> exp_kernel_row_sums(std::span<const double> cumulative, const KernelGrid& kernel,
                                        std::span<const double> values);

/// int int_{0 <= s <= t <= T} phi'(X_t) exp(int_s^t psi'(X_u) du) |t - s|^{2H-2} ds dt.
double exp_weighted_correction(const SdePath& path, const RealFunction& phi_prime,
                               const RealFunction& psi_prime, const KernelGrid& kernel);

/// Skorokhod integral int_0^T phi(X) delta X, computed as the Young integral
/// minus sigma^2 H (2H - 1) times the exponentially weighted kernel correction.
double skorokhod_integral(const SdePath& path, const Integrand& phi, const RealFunction& b0_prime,
                          double sigma, const KernelGrid& kernel);

/// The delta-B part: (int phi(X) delta X - int phi(X) b0(X) dt) / sigma.
double skorokhod_noise_component(const SdePath& path, const Integrand& phi, const DriftSpec& drift,
                                 double sigma, const KernelGrid& kernel);

/// m_T = (-H/M)^{2H} if M < 0, T^{2H} if M = 0, (H/M)^{2H} e^{2MT} if M > 0.
double stationary_scale(double sup_derivative, HurstIndex hurst, double t_max);

/// Diagnostic scale for E[(int_0^T phi(X) delta B)^2]:
///   constant * max(1, m_T) * T^{2H-1} * (int E phi(X_s)^2 ds + int E phi'(X_s)^2 ds).
/// The two integrals are over [0, T]. `constant` is not known in closed form.
double variance_bound_skorokhod(double integrated_phi_sq, double integrated_phi_prime_sq,
                                double sup_derivative, HurstIndex hurst, double sigma,
                                double t_max, double constant = 1.0);

}  // namespace fracdrift
