#include "doctest.h"

#include "fracdrift/basis.hpp"
#include "fracdrift/errors.hpp"

#include <cmath>
#include <limits>

using namespace fracdrift;

TEST_CASE("trigonometric family on [0, 1]") {
    const TrigBasis basis(IntervalSupport(0.0, 1.0), 5);
    CHECK(basis.value(0, 0.37) == doctest::Approx(1.0));
    CHECK(basis.value(1, 0.0) == doctest::Approx(1.414214).epsilon(1e-6));
    CHECK(basis.value(2, 0.0) == doctest::Approx(0.0));
    CHECK(basis.value(2, 0.25) == doctest::Approx(std::sqrt(2.0)));
    CHECK(basis.value(3, 0.25) == doctest::Approx(-std::sqrt(2.0)));
    CHECK_THROWS_AS(TrigBasis(IntervalSupport(0.0, 1.0), 0), DomainError);
    CHECK_THROWS_AS(IntervalSupport(1.0, 1.0), DomainError);
}

TEST_CASE("Gram matrix is the identity") {
    const TrigBasis basis(IntervalSupport(-1.0, 2.0), 5);
    for (std::size_t j = 0; j < 5; ++j) {
        for (std::size_t k = 0; k < 5; ++k) {
            const double g = simpson_integral([&](double x) { return basis.value(j, x) * basis.value(k, x); },
                                              -1.0, 2.0, 10001);
            CHECK(std::abs(g - (j == k ? 1.0 : 0.0)) < 1e-8);
        }
    }
}

TEST_CASE("behaviour off the support") {
    const TrigBasis basis(IntervalSupport(-1.0, 2.0), 6);
    for (std::size_t j = 0; j < 6; ++j) {
        CHECK(basis.value(j, -1.5) == 0.0);
        CHECK(basis.value(j, 2.5) == 0.0);
        CHECK(basis.derivative(j, 3.0) == 0.0);
        CHECK(basis.antiderivative(j, -1.0) == 0.0);
        CHECK(basis.antiderivative(j, -7.0) == 0.0);
        CHECK(basis.antiderivative(j, 9.0) == basis.antiderivative(j, 2.0));
    }
}

TEST_CASE("antiderivative and derivative are consistent") {
    const TrigBasis basis(IntervalSupport(-1.0, 2.0), 7);
    const double h = 1e-4;
    for (std::size_t j = 0; j < 7; ++j) {
        for (double x : {-0.7, 0.1, 0.9, 1.6}) {
            const double dphibar = (basis.antiderivative(j, x + h) - basis.antiderivative(j, x - h)) / (2 * h);
            const double dphi = (basis.value(j, x + h) - basis.value(j, x - h)) / (2 * h);
            CHECK(dphibar == doctest::Approx(basis.value(j, x)).epsilon(1e-6));
            CHECK(dphi == doctest::Approx(basis.derivative(j, x)).epsilon(1e-6));
        }
    }
}

TEST_CASE("closed-form sup norms match dense sampling") {
    const TrigBasis basis(IntervalSupport(-1.0, 2.0), 7);
    for (std::size_t j = 0; j < 7; ++j) {
        double v = 0.0, d = 0.0, a = 0.0;
        for (std::size_t k = 0; k <= 30000; ++k) {
            const double x = -1.0 + 3.0 * static_cast<double>(k) / 30000.0;
            v = std::max(v, std::abs(basis.value(j, x)));
            d = std::max(d, std::abs(basis.derivative(j, x)));
            a = std::max(a, std::abs(basis.antiderivative(j, x)));
        }
        CHECK(basis.value_sup(j) == doctest::Approx(v).epsilon(1e-6));
        CHECK(basis.derivative_sup(j) == doctest::Approx(d).epsilon(1e-6));
        CHECK(basis.antiderivative_sup(j) == doctest::Approx(a).epsilon(1e-6));
    }
}

TEST_CASE("basis constants") {
    const auto c1 = basis_constants(TrigBasis(IntervalSupport(0.0, 1.0), 1));
    CHECK(c1.values == doctest::Approx(1.0));
    CHECK(c1.derivatives == 0.0);
    CHECK(c1.antiderivatives == doctest::Approx(1.0));
    CHECK(basis_constants(TrigBasis(IntervalSupport(0.0, 1.0), 3)).values == doctest::Approx(5.0));

    const IntervalSupport I(-1.0, 2.0);
    for (std::size_t m : {8, 16, 32}) {
        const double ratio = TrigBasis(I, 2 * m).constants().derivatives / TrigBasis(I, m).constants().derivatives;
        CHECK(std::abs(ratio / 8.0 - 1.0) < 0.15);
    }

    const double lambda = I.length();
    const auto c2 = TrigBasis(I, 2).constants();
    const double l_ratio_2 = c2.values / c2.derivatives;
    const double i_ratio_2 = c2.antiderivatives / c2.derivatives;
    for (std::size_t m = 2; m <= 64; ++m) {
        const auto c = TrigBasis(I, m).constants();
        CHECK(c.antiderivatives <= lambda * lambda * c.values);
        CHECK(c.values / c.derivatives <= l_ratio_2 * (1 + 1e-12));
        CHECK(c.antiderivatives / c.derivatives <= i_ratio_2 * (1 + 1e-12));
    }
}

TEST_CASE("projection") {
    const TrigBasis basis(IntervalSupport(-1.0, 2.0), 5);
    const Coefficients e = project_function([&](double x) { return basis.value(1, x); }, basis);
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(std::abs(e[j] - (j == 1 ? 1.0 : 0.0)) < 1e-8);
    CHECK(project_function([](double) { return 0.0; }, basis).norm() == 0.0);

    auto g = [](double x) { return std::exp(-x * x) * (1.0 + x); };
    const Coefficients c = project_function(g, basis);
    const double energy = simpson_integral([&](double x) { return g(x) * g(x); }, -1.0, 2.0, 10001);
    CHECK(c.squaredNorm() <= energy + 1e-6);

    CHECK_THROWS_AS(project_function([](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; },
                                     basis),
                    NonFiniteError);
}

TEST_CASE("combinations") {
    const TrigBasis basis(IntervalSupport(0.0, 2.0), 4);
    Coefficients theta(4);
    theta << 0.5, -1.0, 2.0, 0.25;
    double v = 0.0, d = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
        v += theta[static_cast<Eigen::Index>(j)] * basis.value(j, 0.3);
        d += theta[static_cast<Eigen::Index>(j)] * basis.derivative(j, 0.3);
    }
    CHECK(basis.combination(theta, 0.3) == doctest::Approx(v));
    CHECK(basis.combination_derivative(theta, 0.3) == doctest::Approx(d));
}
