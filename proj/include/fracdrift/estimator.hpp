#pragma once

#include "fracdrift/basis.hpp"
#include "fracdrift/integrals.hpp"
#include "fracdrift/sde.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace fracdrift {

/// Density f on I used to turn coefficients into a drift estimate x -> sum theta_j phi_j(x) / f(x).
/// Evaluation is floored at lower_floor > 0.
class DensityModel {
public:
    /// Known density; `derivative` may be empty.
    static DensityModel known(RealFunction density, RealFunction derivative, double lower_floor);
    /// Centered Gaussian N(0, variance); floor is its minimum over `support`.
    static DensityModel gaussian(double variance, const IntervalSupport& support);
    /// Projection estimate sum c_j phi_j.
    static DensityModel estimated(TrigBasis basis, Coefficients coefficients, double lower_floor);

    double operator()(double x) const;
    double raw(double x) const;
    /// f'(x) when available; 0 where the floor binds.
    std::optional<double> derivative(double x) const;
    double lower_floor() const noexcept { return floor_; }
    bool is_estimated() const noexcept { return basis_.has_value(); }
    const Coefficients& coefficients() const noexcept { return coefficients_; }

private:
    DensityModel() = default;

    RealFunction density_;
    RealFunction derivative_;
    std::optional<TrigBasis> basis_;
    Coefficients coefficients_;
    double floor_ = 0.0;
};

struct EstimatorConfig {
    double c_bound = 10.0;   ///< radius c of the derivative ball S_{m,c}
    double l_target = 0.5;   ///< contraction target l in (0,1)
    std::size_t max_iter = 100;
    double tol = 1e-8;
    std::size_t quadrature_points = 2001;
    std::size_t sup_grid_points = 2048;
    /// Also accept Delta_{m,l} when the Jacobian at every iterate satisfies it.
    bool empirical_jacobian = false;

    void validate() const;
};

/// Per-path tables shared by every evaluation of F_m and its Jacobian:
/// phi_j'(X_k) at the left anchors and their cumulative time integrals.
class EnsembleFunctionals {
public:
    EnsembleFunctionals(const SdeEnsemble& ensemble, const TrigBasis& basis, const KernelGrid& kernel);

    const SdeEnsemble& ensemble() const noexcept { return *ensemble_; }
    const TrigBasis& basis() const noexcept { return *basis_; }
    const KernelGrid& kernel() const noexcept { return *kernel_; }
    std::size_t dimension() const noexcept { return basis_->size(); }

    /// sigma^2 H (2H - 1).
    double amplitude() const noexcept { return amplitude_; }

    /// I_bar_j = (1 / NT) sum_i [phibar_j(X_T^i) - phibar_j(X_0^i)].
    const Coefficients& pathwise_coefficients() const noexcept { return pathwise_; }

    /// F_m(theta)_j = (a / NT) sum_i int int phi_j'(X_t) exp(sum_l theta_l int_s^t phi_l'(X_u) du) k(t - s).
    Coefficients apply(const Coefficients& theta) const;
    /// The same sum with an arbitrary exponent drift psi' in place of sum theta_l phi_l'.
    Coefficients correction(const RealFunction& psi_prime) const;
    /// dF_m(theta)_j / dtheta_l.
    Eigen::MatrixXd jacobian(const Coefficients& theta) const;
    /// Phi_m in coefficient space: I_bar - F_m(theta).
    Coefficients step(const Coefficients& theta) const;

private:
    Coefficients reduce(const std::vector<Coefficients>& per_path) const;
    Coefficients path_correction(std::size_t i, std::span<const double> cumulative) const;

    const SdeEnsemble* ensemble_;
    const TrigBasis* basis_;
    const KernelGrid* kernel_;
    double amplitude_;
    Coefficients pathwise_;
    // For path i: m x n matrices (row j, column k).
    std::vector<Eigen::MatrixXd> derivative_at_anchor_;
    std::vector<Eigen::MatrixXd> cumulative_derivative_;
};

Coefficients pathwise_coefficients(const SdeEnsemble& ensemble, const TrigBasis& basis);

Coefficients F_m_apply(const Coefficients& theta, const EnsembleFunctionals& functionals);
Eigen::MatrixXd F_m_jacobian(const Coefficients& theta, const EnsembleFunctionals& functionals);
Coefficients phi_m_step(const Coefficients& theta, const EnsembleFunctionals& functionals);

/// (a / (2H (2H + 1))) * R(m) * e^{c T} * T^{2H}: bound on ||DF_m||_op over S_{m,c}.
double jacobian_norm_bound(const EnsembleFunctionals& functionals, double c_bound);
/// l(m, T) = (a / (2H (2H + 1))) * sqrt(R(m)) * e^{c T} * T^{2H}.
double analytic_contraction_bound(const EnsembleFunctionals& functionals, double c_bound);
/// Largest singular value.
double operator_norm(const Eigen::MatrixXd& matrix);

struct DeltaDiagnostics {
    bool delta_c_holds = false;
    bool delta_l_holds = false;
    double jacobian_bound = 0.0;              ///< analytic bound on ||DF_m||_op
    std::optional<double> empirical_jacobian; ///< max ||DF_m(theta)||_op over iterates, if computed
    double max_represented_derivative = 0.0;  ///< max over iterates of sup_I |(sum theta phi / f)'|
    double max_coefficient_derivative = 0.0;  ///< max over iterates of sup_I |(sum theta phi)'|
};

/// Checks Delta_{m,c} along the recorded iterates and Delta_{m,l} by the
/// analytic bound, falling back to the Jacobian at each iterate when enabled.
DeltaDiagnostics delta_event_check(const std::vector<Coefficients>& iterates,
                                   const EstimatorConfig& config,
                                   const EnsembleFunctionals& functionals,
                                   const DensityModel& density);

struct EstimateResult {
    Coefficients theta_star;
    bool converged = false;
    bool diverged = false;
    bool delta_c_holds = false;
    bool delta_l_holds = false;
    bool truncated = false;
    std::size_t iterations = 0;
    std::vector<double> iteration_trace;  ///< ||theta_{n+1} - theta_n|| per step
    double contraction_estimate = 0.0;    ///< max ratio of successive residuals
    double analytic_contraction_bound = 0.0;
    double jacobian_bound = 0.0;
    std::optional<double> empirical_jacobian;
    double max_represented_derivative = 0.0;
    double max_coefficient_derivative = 0.0;
    bool estimated_density = false;
    std::vector<std::string> warnings;

    /// theta_star, or zero when the estimate is truncated off Delta_m.
    Coefficients reported_coefficients() const;
};

/// Function x -> sum theta_j phi_j(x) / f(x) on I, zero off I.
class DriftEstimate {
public:
    DriftEstimate(const TrigBasis& basis, Coefficients theta, const DensityModel& density);
    double operator()(double x) const;
    const Coefficients& coefficients() const noexcept { return theta_; }

private:
    const TrigBasis* basis_;
    Coefficients theta_;
    const DensityModel* density_;
};

/// Picard iteration theta <- I_bar - F_m(theta) from theta0 (default I_bar).
EstimateResult fixed_point_solve(const EstimatorConfig& config, const EnsembleFunctionals& functionals,
                                 const DensityModel& density,
                                 std::optional<Coefficients> theta0 = std::nullopt);

/// Coefficients (1 / NT) sum_i int phi_j(X^i) delta X^i via the Skorokhod correction formula.
Coefficients oracle_hat_b(const SdeEnsemble& ensemble, const TrigBasis& basis,
                          const KernelGrid& kernel, const DriftSpec& drift);

/// c_j = (1 / NT) sum_i int_0^T phi_j(X_s^i) ds (trapezoid).
Coefficients density_projection(const SdeEnsemble& ensemble, const TrigBasis& basis);

enum class DensityMode { known, estimated };

/// Fixed-point estimate whose function representation and Delta_{m,c} check use
/// either the supplied known density or the floored projection density estimate.
EstimateResult practical_estimate(const EnsembleFunctionals& functionals, const EstimatorConfig& config,
                                  DensityMode mode, const DensityModel& known_density,
                                  double estimated_floor = 1e-3);

/// Density model used by practical_estimate in estimated mode.
DensityModel estimated_density(const SdeEnsemble& ensemble, const TrigBasis& basis, double lower_floor);

/// int_I (estimate - reference)^2 f^2 dx by composite Simpson.
double weighted_l2_error(const RealFunction& estimate, const RealFunction& reference,
                         const DensityModel& density, const IntervalSupport& support,
                         std::size_t quadrature_points = 4001);

/// ||b_m - b0||^2_{f^2} = int_I ((b0 f)_m - b0 f)^2 dx.
double projection_bias(const RealFunction& b0, const DensityModel& density, const TrigBasis& basis,
                       std::size_t quadrature_points = 4001);

}  // namespace fracdrift
