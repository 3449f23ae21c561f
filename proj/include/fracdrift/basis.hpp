#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <span>

namespace fracdrift {

/// Coordinates of sum_j theta_j phi_j in a basis of size m.
using Coefficients = Eigen::VectorXd;

/// Compact interval I = [lo, hi] on which the drift is estimated.
class IntervalSupport {
public:
    IntervalSupport(double lo, double hi);
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }
    double length() const noexcept { return hi_ - lo_; }
    bool contains(double x) const noexcept { return x >= lo_ && x <= hi_; }
    /// k-th of `count` equispaced points from lo to hi inclusive.
    double point(std::size_t k, std::size_t count) const noexcept;

private:
    double lo_;
    double hi_;
};

/// Sums of squared sup-norms over the first m basis functions, their derivatives
/// and their antiderivatives.
struct BasisConstants {
    double values = 0.0;           ///< L(m)
    double derivatives = 0.0;      ///< R(m)
    double antiderivatives = 0.0;  ///< I(m)
};

/// I-supported orthonormal trigonometric family, 0-based:
///   index 0        constant 1/sqrt(L)
///   index 2j - 1   sqrt(2/L) cos(2 pi j (x - lo)/L)
///   index 2j       sqrt(2/L) sin(2 pi j (x - lo)/L)
/// Values and derivatives vanish off I. Antiderivatives are anchored at lo
/// and extended as constants outside I.
class TrigBasis {
public:
    TrigBasis(IntervalSupport support, std::size_t m);

    std::size_t size() const noexcept { return m_; }
    const IntervalSupport& support() const noexcept { return support_; }

    double value(std::size_t j, double x) const;
    double derivative(std::size_t j, double x) const;
    double antiderivative(std::size_t j, double x) const;

    double value_sup(std::size_t j) const;
    double derivative_sup(std::size_t j) const;
    double antiderivative_sup(std::size_t j) const;

    /// Fill out[j] for all j < size() at once.
    void values(double x, std::span<double> out) const;
    void derivatives(double x, std::span<double> out) const;
    void antiderivatives(double x, std::span<double> out) const;

    double combination(const Coefficients& theta, double x) const;
    double combination_derivative(const Coefficients& theta, double x) const;

    BasisConstants constants() const;

private:
    enum class Kind { constant, cosine, sine };
    Kind kind(std::size_t j) const noexcept;
    double frequency(std::size_t j) const noexcept;  // angular, 2 pi k / L

    IntervalSupport support_;
    std::size_t m_;
    double amplitude_;  // sqrt(2/L)
};

using BasisSpec = TrigBasis;

inline TrigBasis trig_basis(IntervalSupport support, std::size_t m) { return {support, m}; }
inline BasisConstants basis_constants(const TrigBasis& basis) { return basis.constants(); }

/// Composite Simpson rule with `points` nodes (rounded up to an odd count >= 3).
double simpson_integral(const std::function<double(double)>& g, double lo, double hi,
                        std::size_t points);

/// theta_j = int_I g phi_j by composite Simpson quadrature.
Coefficients project_function(const std::function<double(double)>& g, const TrigBasis& basis,
                              std::size_t quadrature_points = 10001);

}  // namespace fracdrift
