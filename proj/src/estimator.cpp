#include "fracdrift/estimator.hpp"

#include "fracdrift/errors.hpp"
#include "fracdrift/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fracdrift {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

void require_long_memory(HurstIndex hurst) {
    if (!hurst.long_memory()) throw DomainError("drift estimation requires H > 1/2");
}

double kernel_moment_scale(const EnsembleFunctionals& functionals) {
    const double h = functionals.kernel().hurst().value();
    const double t = functionals.kernel().grid().t_max();
    return functionals.amplitude() / (2.0 * h * (2.0 * h + 1.0)) * std::pow(t, 2.0 * h);
}

}  // namespace

// ---------------------------------------------------------------------------
// DensityModel

DensityModel DensityModel::known(RealFunction density, RealFunction derivative, double lower_floor) {
    if (!(lower_floor > 0.0)) throw DomainError("density floor must be positive");
    DensityModel model;
    model.density_ = std::move(density);
    model.derivative_ = std::move(derivative);
    model.floor_ = lower_floor;
    return model;
}

DensityModel DensityModel::gaussian(double variance, const IntervalSupport& support) {
    if (!(variance > 0.0)) throw DomainError("Gaussian density needs positive variance");
    const double norm = 1.0 / std::sqrt(2.0 * std::numbers::pi * variance);
    auto f = [variance, norm](double x) { return norm * std::exp(-x * x / (2.0 * variance)); };
    auto df = [variance, f](double x) { return -x / variance * f(x); };
    const double floor = std::min(f(support.lo()), f(support.hi()));
    return known(f, df, floor);
}

DensityModel DensityModel::estimated(TrigBasis basis, Coefficients coefficients, double lower_floor) {
    if (!(lower_floor > 0.0)) throw DomainError("density floor must be positive");
    if (coefficients.size() != idx(basis.size())) throw DomainError("density coefficients size mismatch");
    DensityModel model;
    model.basis_ = basis;
    model.coefficients_ = std::move(coefficients);
    model.floor_ = lower_floor;
    return model;
}

double DensityModel::raw(double x) const {
    if (basis_) return basis_->combination(coefficients_, x);
    return density_(x);
}

double DensityModel::operator()(double x) const { return std::max(raw(x), floor_); }

std::optional<double> DensityModel::derivative(double x) const {
    if (basis_) {
        return raw(x) >= floor_ ? basis_->combination_derivative(coefficients_, x) : 0.0;
    }
    if (!derivative_) return std::nullopt;
    return raw(x) >= floor_ ? derivative_(x) : 0.0;
}

void EstimatorConfig::validate() const {
    if (!(c_bound > 0.0)) throw DomainError("c_bound must be positive");
    if (!(l_target > 0.0 && l_target < 1.0)) throw DomainError("l_target must lie in (0,1)");
    if (!(tol > 0.0)) throw DomainError("tol must be positive");
    if (max_iter == 0) throw DomainError("max_iter must be positive");
    if (sup_grid_points < 2) throw DomainError("sup_grid_points must be at least 2");
}

// ---------------------------------------------------------------------------
// EnsembleFunctionals

EnsembleFunctionals::EnsembleFunctionals(const SdeEnsemble& ensemble, const TrigBasis& basis,
                                         const KernelGrid& kernel)
    : ensemble_(&ensemble), basis_(&basis), kernel_(&kernel) {
    if (ensemble.paths.empty()) throw DomainError("empty ensemble");
    require_long_memory(ensemble.hurst);
    if (!(ensemble.grid() == kernel.grid())) throw DomainError("ensemble and kernel grids differ");
    if (ensemble.hurst.value() != kernel.hurst().value()) throw DomainError("ensemble and kernel H differ");

    const double h = ensemble.hurst.value();
    amplitude_ = ensemble.sigma * ensemble.sigma * h * (2.0 * h - 1.0);
    pathwise_ = fracdrift::pathwise_coefficients(ensemble, basis);

    const std::size_t n_paths = ensemble.size();
    const std::size_t m = basis.size();
    const std::size_t n = ensemble.grid().n_steps();
    const double half_dt = 0.5 * ensemble.grid().step();
    derivative_at_anchor_.resize(n_paths);
    cumulative_derivative_.resize(n_paths);
    parallel_for(n_paths, [&](std::size_t i) {
        const auto& x = ensemble.paths[i].values;
        Eigen::MatrixXd d(idx(m), idx(n));
        std::vector<double> row(m);
        for (std::size_t k = 0; k < n; ++k) {
            basis.derivatives(x[k], row);
            for (std::size_t j = 0; j < m; ++j) d(idx(j), idx(k)) = row[j];
        }
        Eigen::MatrixXd cumulative = Eigen::MatrixXd::Zero(idx(m), idx(n));
        for (std::size_t k = 1; k < n; ++k) {
            cumulative.col(idx(k)) = cumulative.col(idx(k - 1)) + half_dt * (d.col(idx(k - 1)) + d.col(idx(k)));
        }
        derivative_at_anchor_[i] = std::move(d);
        cumulative_derivative_[i] = std::move(cumulative);
    });
}

Coefficients EnsembleFunctionals::reduce(const std::vector<Coefficients>& per_path) const {
    Coefficients total = Coefficients::Zero(idx(dimension()));
    for (const auto& c : per_path) total += c;
    const double scale = amplitude_ / (static_cast<double>(ensemble_->size()) * ensemble_->horizon());
    return total * scale;
}

Coefficients EnsembleFunctionals::path_correction(std::size_t i, std::span<const double> cumulative) const {
    const std::vector<double> row_sums = exp_kernel_row_sums(cumulative, *kernel_);
    const Eigen::Map<const Eigen::VectorXd> a(row_sums.data(), idx(row_sums.size()));
    return derivative_at_anchor_[i] * a;
}

Coefficients EnsembleFunctionals::apply(const Coefficients& theta) const {
    if (theta.size() != idx(dimension())) throw DomainError("theta has wrong dimension");
    std::vector<Coefficients> per_path(ensemble_->size());
    parallel_for(ensemble_->size(), [&](std::size_t i) {
        const Eigen::VectorXd cumulative = cumulative_derivative_[i].transpose() * theta;
        per_path[i] = path_correction(i, {cumulative.data(), static_cast<std::size_t>(cumulative.size())});
    });
    return reduce(per_path);
}

Coefficients EnsembleFunctionals::correction(const RealFunction& psi_prime) const {
    std::vector<Coefficients> per_path(ensemble_->size());
    parallel_for(ensemble_->size(), [&](std::size_t i) {
        const std::vector<double> cumulative = cumulative_trapezoid(ensemble_->paths[i], psi_prime);
        per_path[i] = path_correction(i, cumulative);
    });
    return reduce(per_path);
}

Eigen::MatrixXd EnsembleFunctionals::jacobian(const Coefficients& theta) const {
    if (theta.size() != idx(dimension())) throw DomainError("theta has wrong dimension");
    const std::size_t m = dimension();
    const std::size_t n = kernel_->grid().n_steps();
    std::vector<Eigen::MatrixXd> per_path(ensemble_->size());
    parallel_for(ensemble_->size(), [&](std::size_t i) {
        const Eigen::MatrixXd& cumulative_d = cumulative_derivative_[i];
        const Eigen::VectorXd c = cumulative_d.transpose() * theta;
        const std::span<const double> c_span(c.data(), n);
        const std::vector<double> row_sums = exp_kernel_row_sums(c_span, *kernel_);
        // B(l, k) = sum_{q <= k} e^{C_k - C_q} w_{k-q} (D_l(k) - D_l(q)).
        Eigen::MatrixXd b(idx(m), idx(n));
        std::vector<double> d_row(n);
        for (std::size_t l = 0; l < m; ++l) {
            for (std::size_t k = 0; k < n; ++k) d_row[k] = cumulative_d(idx(l), idx(k));
            const std::vector<double> weighted = exp_kernel_row_sums(c_span, *kernel_, d_row);
            for (std::size_t k = 0; k < n; ++k) b(idx(l), idx(k)) = d_row[k] * row_sums[k] - weighted[k];
        }
        per_path[i] = derivative_at_anchor_[i] * b.transpose();
    });
    Eigen::MatrixXd total = Eigen::MatrixXd::Zero(idx(m), idx(m));
    for (const auto& j : per_path) total += j;
    return total * (amplitude_ / (static_cast<double>(ensemble_->size()) * ensemble_->horizon()));
}

Coefficients EnsembleFunctionals::step(const Coefficients& theta) const { return pathwise_ - apply(theta); }

// ---------------------------------------------------------------------------
// Free-function surface

Coefficients pathwise_coefficients(const SdeEnsemble& ensemble, const TrigBasis& basis) {
    if (ensemble.paths.empty()) throw DomainError("empty ensemble");
    const std::size_t m = basis.size();
    Coefficients total = Coefficients::Zero(idx(m));
    for (const auto& path : ensemble.paths) {
        for (std::size_t j = 0; j < m; ++j) {
            total[idx(j)] += basis.antiderivative(j, path.terminal()) - basis.antiderivative(j, path.x0());
        }
    }
    return total / (static_cast<double>(ensemble.size()) * ensemble.horizon());
}

Coefficients F_m_apply(const Coefficients& theta, const EnsembleFunctionals& functionals) {
    return functionals.apply(theta);
}

Eigen::MatrixXd F_m_jacobian(const Coefficients& theta, const EnsembleFunctionals& functionals) {
    return functionals.jacobian(theta);
}

Coefficients phi_m_step(const Coefficients& theta, const EnsembleFunctionals& functionals) {
    return functionals.step(theta);
}

double jacobian_norm_bound(const EnsembleFunctionals& functionals, double c_bound) {
    const double t = functionals.kernel().grid().t_max();
    return kernel_moment_scale(functionals) * functionals.basis().constants().derivatives *
           std::exp(c_bound * t);
}

double analytic_contraction_bound(const EnsembleFunctionals& functionals, double c_bound) {
    const double t = functionals.kernel().grid().t_max();
    return kernel_moment_scale(functionals) * std::sqrt(functionals.basis().constants().derivatives) *
           std::exp(c_bound * t);
}

double operator_norm(const Eigen::MatrixXd& matrix) {
    if (matrix.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(matrix);
    return svd.singularValues()(0);
}

DeltaDiagnostics delta_event_check(const std::vector<Coefficients>& iterates,
                                   const EstimatorConfig& config,
                                   const EnsembleFunctionals& functionals,
                                   const DensityModel& density) {
    const TrigBasis& basis = functionals.basis();
    const IntervalSupport& support = basis.support();
    const std::size_t m = basis.size();
    const std::size_t points = config.sup_grid_points;

    // Basis and density tables on the sup-norm grid.
    Eigen::MatrixXd values(idx(points), idx(m)), derivatives(idx(points), idx(m));
    Eigen::VectorXd f(idx(points)), f_prime(idx(points));
    bool have_f_prime = true;
    std::vector<double> row(m);
    for (std::size_t p = 0; p < points; ++p) {
        const double x = support.point(p, points);
        basis.values(x, row);
        for (std::size_t j = 0; j < m; ++j) values(idx(p), idx(j)) = row[j];
        basis.derivatives(x, row);
        for (std::size_t j = 0; j < m; ++j) derivatives(idx(p), idx(j)) = row[j];
        f[idx(p)] = density(x);
        const auto d = density.derivative(x);
        if (d) {
            f_prime[idx(p)] = *d;
        } else {
            have_f_prime = false;
        }
    }

    DeltaDiagnostics diag;
    for (const auto& theta : iterates) {
        const Eigen::VectorXd g = values * theta;
        const Eigen::VectorXd dg = derivatives * theta;
        diag.max_coefficient_derivative = std::max(diag.max_coefficient_derivative, dg.cwiseAbs().maxCoeff());
        double sup = 0.0;
        if (have_f_prime) {
            for (Eigen::Index p = 0; p < g.size(); ++p) {
                const double d = dg[p] / f[p] - g[p] * f_prime[p] / (f[p] * f[p]);
                sup = std::max(sup, std::abs(d));
            }
        } else {
            // Density without derivative: central differences of x -> g(x) / f(x), one-sided at the ends.
            const double h = 1e-6 * support.length();
            auto represented = [&](double x) { return basis.combination(theta, x) / density(x); };
            for (std::size_t p = 0; p < points; ++p) {
                const double x = support.point(p, points);
                const double left = std::max(support.lo(), x - h);
                const double right = std::min(support.hi(), x + h);
                sup = std::max(sup, std::abs((represented(right) - represented(left)) / (right - left)));
            }
        }
        diag.max_represented_derivative = std::max(diag.max_represented_derivative, sup);
    }
    diag.delta_c_holds = diag.max_represented_derivative <= config.c_bound;

    diag.jacobian_bound = jacobian_norm_bound(functionals, config.c_bound);
    const double floor = density.lower_floor();
    diag.delta_l_holds = diag.jacobian_bound / floor <= config.l_target;
    if (!diag.delta_l_holds && config.empirical_jacobian) {
        double worst = 0.0;
        for (const auto& theta : iterates) worst = std::max(worst, operator_norm(functionals.jacobian(theta)));
        diag.empirical_jacobian = worst;
        diag.delta_l_holds = worst / floor <= config.l_target;
    }
    return diag;
}

// ---------------------------------------------------------------------------
// Estimates

Coefficients EstimateResult::reported_coefficients() const {
    if (truncated) return Coefficients::Zero(theta_star.size());
    return theta_star;
}

DriftEstimate::DriftEstimate(const TrigBasis& basis, Coefficients theta, const DensityModel& density)
    : basis_(&basis), theta_(std::move(theta)), density_(&density) {}

double DriftEstimate::operator()(double x) const {
    if (!basis_->support().contains(x)) return 0.0;
    return basis_->combination(theta_, x) / (*density_)(x);
}

EstimateResult fixed_point_solve(const EstimatorConfig& config, const EnsembleFunctionals& functionals,
                                 const DensityModel& density, std::optional<Coefficients> theta0) {
    config.validate();
    EstimateResult result;
    Coefficients theta = theta0 ? std::move(*theta0) : functionals.pathwise_coefficients();
    if (theta.size() != idx(functionals.dimension())) throw DomainError("theta0 has wrong dimension");

    std::vector<Coefficients> iterates{theta};
    {
        const DeltaDiagnostics start = delta_event_check(iterates, config, functionals, density);
        if (start.max_coefficient_derivative > config.c_bound) {
            result.warnings.push_back("initial iterate lies outside the derivative ball of radius c");
        }
    }

    for (std::size_t it = 0; it < config.max_iter; ++it) {
        Coefficients next = functionals.step(theta);
        const double residual = (next - theta).norm();
        result.iteration_trace.push_back(residual);
        theta = std::move(next);
        iterates.push_back(theta);
        result.iterations = it + 1;
        if (residual <= config.tol) {
            result.converged = true;
            break;
        }
    }
    result.diverged = !result.converged;
    result.theta_star = theta;

    const double noise_floor = 1e-11 * (1.0 + theta.norm());
    const auto& trace = result.iteration_trace;
    for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
        if (trace[k] > noise_floor) result.contraction_estimate = std::max(result.contraction_estimate, trace[k + 1] / trace[k]);
    }

    const DeltaDiagnostics diag = delta_event_check(iterates, config, functionals, density);
    result.delta_c_holds = diag.delta_c_holds;
    result.delta_l_holds = diag.delta_l_holds;
    result.truncated = !(diag.delta_c_holds && diag.delta_l_holds);
    result.jacobian_bound = diag.jacobian_bound;
    result.empirical_jacobian = diag.empirical_jacobian;
    result.max_represented_derivative = diag.max_represented_derivative;
    result.max_coefficient_derivative = diag.max_coefficient_derivative;
    result.analytic_contraction_bound = analytic_contraction_bound(functionals, config.c_bound);
    result.estimated_density = density.is_estimated();
    return result;
}

Coefficients oracle_hat_b(const SdeEnsemble& ensemble, const TrigBasis& basis, const KernelGrid& kernel,
                          const DriftSpec& drift) {
    if (ensemble.paths.empty()) throw DomainError("empty ensemble");
    require_long_memory(ensemble.hurst);
    const std::size_t m = basis.size();
    std::vector<Coefficients> per_path(ensemble.size());
    parallel_for(ensemble.size(), [&](std::size_t i) {
        Coefficients c(idx(m));
        for (std::size_t j = 0; j < m; ++j) {
            c[idx(j)] = skorokhod_integral(ensemble.paths[i], basis_integrand(basis, j), drift.b0_prime,
                                           ensemble.sigma, kernel);
        }
        per_path[i] = std::move(c);
    });
    Coefficients total = Coefficients::Zero(idx(m));
    for (const auto& c : per_path) total += c;
    return total / (static_cast<double>(ensemble.size()) * ensemble.horizon());
}

Coefficients density_projection(const SdeEnsemble& ensemble, const TrigBasis& basis) {
    if (ensemble.paths.empty()) throw DomainError("empty ensemble");
    const std::size_t m = basis.size();
    Coefficients total = Coefficients::Zero(idx(m));
    for (const auto& path : ensemble.paths) {
        for (std::size_t j = 0; j < m; ++j) {
            total[idx(j)] += path_time_integral(path, [&](double x) { return basis.value(j, x); });
        }
    }
    return total / (static_cast<double>(ensemble.size()) * ensemble.horizon());
}

DensityModel estimated_density(const SdeEnsemble& ensemble, const TrigBasis& basis, double lower_floor) {
    return DensityModel::estimated(basis, density_projection(ensemble, basis), lower_floor);
}

EstimateResult practical_estimate(const EnsembleFunctionals& functionals, const EstimatorConfig& config,
                                  DensityMode mode, const DensityModel& known_density,
                                  double estimated_floor) {
    if (mode == DensityMode::known) return fixed_point_solve(config, functionals, known_density);

    const DensityModel density = estimated_density(functionals.ensemble(), functionals.basis(), estimated_floor);
    EstimateResult result = fixed_point_solve(config, functionals, density);
    const IntervalSupport& support = functionals.basis().support();
    for (std::size_t p = 0; p < config.sup_grid_points; ++p) {
        if (density.raw(support.point(p, config.sup_grid_points)) <= 0.0) {
            result.warnings.push_back("estimated density is non-positive somewhere on I; floor applied");
            break;
        }
    }
    return result;
}

double weighted_l2_error(const RealFunction& estimate, const RealFunction& reference,
                         const DensityModel& density, const IntervalSupport& support,
                         std::size_t quadrature_points) {
    return simpson_integral(
        [&](double x) {
            const double diff = estimate(x) - reference(x);
            const double f = density(x);
            return diff * diff * f * f;
        },
        support.lo(), support.hi(), quadrature_points);
}

double projection_bias(const RealFunction& b0, const DensityModel& density, const TrigBasis& basis,
                       std::size_t quadrature_points) {
    auto weighted_drift = [&](double x) { return b0(x) * density(x); };
    const Coefficients c = project_function(weighted_drift, basis, quadrature_points);
    const IntervalSupport& support = basis.support();
    return simpson_integral(
        [&](double x) {
            const double diff = basis.combination(c, x) - weighted_drift(x);
            return diff * diff;
        },
        support.lo(), support.hi(), quadrature_points);
}

}  // namespace fracdrift
