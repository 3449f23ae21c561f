#include "fracdrift/basis.hpp"

#include "fracdrift/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

namespace fracdrift {

IntervalSupport::IntervalSupport(double lo, double hi) : lo_(lo), hi_(hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
        throw DomainError("interval support needs finite lo < hi");
    }
}

double IntervalSupport::point(std::size_t k, std::size_t count) const noexcept {
    if (count < 2) return lo_;
    return lo_ + length() * static_cast<double>(k) / static_cast<double>(count - 1);
}

TrigBasis::TrigBasis(IntervalSupport support, std::size_t m)
    : support_(support), m_(m), amplitude_(std::sqrt(2.0 / support.length())) {
    if (m == 0) throw DomainError("basis dimension must be at least 1");
}

TrigBasis::Kind TrigBasis::kind(std::size_t j) const noexcept {
    if (j == 0) return Kind::constant;
    return (j % 2 == 1) ? Kind::cosine : Kind::sine;
}

double TrigBasis::frequency(std::size_t j) const noexcept {
    const auto harmonic = static_cast<double>((j + 1) / 2);
    return 2.0 * std::numbers::pi * harmonic / support_.length();
}

double TrigBasis::value(std::size_t j, double x) const {
    if (!support_.contains(x)) return 0.0;
    const double u = x - support_.lo();
    switch (kind(j)) {
        case Kind::constant: return 1.0 / std::sqrt(support_.length());
        case Kind::cosine: return amplitude_ * std::cos(frequency(j) * u);
        case Kind::sine: return amplitude_ * std::sin(frequency(j) * u);
    }
    return 0.0;
}

double TrigBasis::derivative(std::size_t j, double x) const {
    if (!support_.contains(x)) return 0.0;
    const double u = x - support_.lo();
    const double w = frequency(j);
    switch (kind(j)) {
        case Kind::constant: return 0.0;
        case Kind::cosine: return -amplitude_ * w * std::sin(w * u);
        case Kind::sine: return amplitude_ * w * std::cos(w * u);
    }
    return 0.0;
}

double TrigBasis::antiderivative(std::size_t j, double x) const {
    const double u = std::clamp(x, support_.lo(), support_.hi()) - support_.lo();
    const double w = frequency(j);
    switch (kind(j)) {
        case Kind::constant: return u / std::sqrt(support_.length());
        case Kind::cosine: return amplitude_ / w * std::sin(w * u);
        case Kind::sine: return amplitude_ / w * (1.0 - std::cos(w * u));
    }
    return 0.0;
}

double TrigBasis::value_sup(std::size_t j) const {
    return kind(j) == Kind::constant ? 1.0 / std::sqrt(support_.length()) : amplitude_;
}

double TrigBasis::derivative_sup(std::size_t j) const {
    return kind(j) == Kind::constant ? 0.0 : amplitude_ * frequency(j);
}

double TrigBasis::antiderivative_sup(std::size_t j) const {
    switch (kind(j)) {
        case Kind::constant: return std::sqrt(support_.length());
        case Kind::cosine: return amplitude_ / frequency(j);
        case Kind::sine: return 2.0 * amplitude_ / frequency(j);
    }
    return 0.0;
}

void TrigBasis::values(double x, std::span<double> out) const {
    for (std::size_t j = 0; j < m_; ++j) out[j] = value(j, x);
}

void TrigBasis::derivatives(double x, std::span<double> out) const {
    for (std::size_t j = 0; j < m_; ++j) out[j] = derivative(j, x);
}

void TrigBasis::antiderivatives(double x, std::span<double> out) const {
    for (std::size_t j = 0; j < m_; ++j) out[j] = antiderivative(j, x);
}

double TrigBasis::combination(const Coefficients& theta, double x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < m_; ++j) acc += theta[static_cast<Eigen::Index>(j)] * value(j, x);
    return acc;
}

double TrigBasis::combination_derivative(const Coefficients& theta, double x) const {
    double acc = 0.0;
    for (std::size_t j = 0; j < m_; ++j) {
        acc += theta[static_cast<Eigen::Index>(j)] * derivative(j, x);
    }
    return acc;
}

BasisConstants TrigBasis::constants() const {
    BasisConstants c;
    for (std::size_t j = 0; j < m_; ++j) {
        c.values += value_sup(j) * value_sup(j);
        c.derivatives += derivative_sup(j) * derivative_sup(j);
        c.antiderivatives += antiderivative_sup(j) * antiderivative_sup(j);
    }
    return c;
}

double simpson_integral(const std::function<double(double)>& g, double lo, double hi,
                        std::size_t points) {
    std::size_t n = std::max<std::size_t>(points, 3);
    if (n % 2 == 0) ++n;
    const std::size_t intervals = n - 1;
    const double h = (hi - lo) / static_cast<double>(intervals);
    double acc = 0.0;
    for (std::size_t k = 0; k <= intervals; ++k) {
        const double x = (k == intervals) ? hi : lo + h * static_cast<double>(k);
        const double gx = g(x);
        if (!std::isfinite(gx)) throw NonFiniteError("integrand", k);
        const double weight = (k == 0 || k == intervals) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        acc += weight * gx;
    }
    return acc * h / 3.0;
}

Coefficients project_function(const std::function<double(double)>& g, const TrigBasis& basis,
                              std::size_t quadrature_points) {
    std::size_t n = std::max<std::size_t>(quadrature_points, 3);
    if (n % 2 == 0) ++n;
    const IntervalSupport& I = basis.support();
    const std::size_t m = basis.size();
    const double h = I.length() / static_cast<double>(n - 1);

    Coefficients theta = Coefficients::Zero(static_cast<Eigen::Index>(m));
    std::vector<double> phi(m);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = I.point(k, n);
        const double gx = g(x);
        if (!std::isfinite(gx)) throw NonFiniteError("projected function", k);
        const double weight = (k == 0 || k == n - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        basis.values(x, phi);
        for (std::size_t j = 0; j < m; ++j) theta[static_cast<Eigen::Index>(j)] += weight * gx * phi[j];
    }
    return theta * (h / 3.0);
}

}  // namespace fracdrift
