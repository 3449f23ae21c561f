#include "doctest.h"

#include "fracdrift/errors.hpp"
#include "fracdrift/fbm.hpp"
#include "support.hpp"

#include <cmath>

using namespace fracdrift;
using testing_support::moments;

TEST_CASE("fbm_covariance closed form") {
    const HurstIndex h(0.7);
    CHECK(fbm_covariance(1.3, 1.3, h) == doctest::Approx(std::pow(1.3, 1.4)));
    CHECK(fbm_covariance(1.0, 2.0, HurstIndex(0.5)) == doctest::Approx(1.0));
    CHECK(fbm_covariance(1.0, 2.0, HurstIndex(0.75)) == doctest::Approx(1.414214).epsilon(1e-6));
    CHECK(fbm_covariance(0.4, 2.5, h) == fbm_covariance(2.5, 0.4, h));
    CHECK_THROWS_AS(fbm_covariance(-0.1, 1.0, h), DomainError);
}

TEST_CASE("Hurst index and grid validation") {
    CHECK_THROWS_AS(HurstIndex(0.0), DomainError);
    CHECK_THROWS_AS(HurstIndex(1.0), DomainError);
    CHECK_FALSE(HurstIndex(0.5).long_memory());
    CHECK(HurstIndex(0.51).long_memory());
    CHECK_THROWS_AS(TimeGrid(0.0, 10), DomainError);
    CHECK_THROWS_AS(TimeGrid(1.0, 0), DomainError);
    const TimeGrid grid(2.0, 8);
    CHECK(grid.n_nodes() == 9);
    CHECK(grid.node(8) == doctest::Approx(2.0));
}

TEST_CASE("samplers are deterministic and start at zero") {
    const TimeGrid grid(1.0, 32);
    const HurstIndex h(0.7);
    const auto a = sample_fbm_cholesky(grid, h, 17);
    const auto b = sample_fbm_cholesky(grid, h, 17);
    const auto c = sample_fbm_circulant(grid, h, 17);
    const auto d = sample_fbm_circulant(grid, h, 17);
    CHECK(a.values == b.values);
    CHECK(c.values == d.values);
    CHECK(a.values.size() == 33);
    CHECK(a.values[0] == 0.0);
    CHECK(c.values[0] == 0.0);
    CHECK(sample_fbm_circulant(grid, h, 18).values != c.values);
}

TEST_CASE("Cholesky cap is enforced") {
    CHECK_THROWS_AS(CholeskyFbmSampler(TimeGrid(1.0, 100), HurstIndex(0.7), 50), DomainError);
}

TEST_CASE("circulant embedding size is twice the padded length") {
    CHECK(CirculantFbmSampler(TimeGrid(1.0, 64), HurstIndex(0.7)).embedding_size() == 128);
    CHECK(CirculantFbmSampler(TimeGrid(1.0, 100), HurstIndex(0.7)).embedding_size() == 256);
}

namespace {

// Max over grid entries of |empirical cov - closed form| / SE.
template <typename Sampler>
double covariance_z_score(const Sampler& sampler, HurstIndex h, std::size_t n_paths) {
    const TimeGrid& grid = sampler.grid();
    const std::size_t n = grid.n_steps();
    std::vector<std::vector<double>> samples(n_paths);
    for (std::size_t p = 0; p < n_paths; ++p) samples[p] = sampler.sample(derive_seed(99, p)).values;
    double worst = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = i; j <= n; ++j) {
            std::vector<double> products(n_paths);
            for (std::size_t p = 0; p < n_paths; ++p) products[p] = samples[p][i] * samples[p][j];
            const auto m = moments(products);
            const double exact = fbm_covariance(grid.node(i), grid.node(j), h);
            worst = std::max(worst, std::abs(m.mean - exact) / m.standard_error);
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("both samplers reproduce the fBm covariance") {
    const TimeGrid grid(1.0, 16);
    const HurstIndex h(0.7);
    CHECK(covariance_z_score(CholeskyFbmSampler(grid, h), h, 2000) < 5.0);
    CHECK(covariance_z_score(CirculantFbmSampler(grid, h), h, 2000) < 5.0);
}

TEST_CASE("H = 1/2 increments are uncorrelated") {
    const TimeGrid grid(1.0, 64);
    const CirculantFbmSampler sampler(grid, HurstIndex(0.5));
    std::vector<double> lag1;
    for (std::size_t p = 0; p < 500; ++p) {
        const auto path = sampler.sample(derive_seed(5, p)).values;
        for (std::size_t k = 1; k + 1 < path.size(); ++k) {
            lag1.push_back((path[k] - path[k - 1]) * (path[k + 1] - path[k]) * 64.0);
        }
    }
    const auto m = moments(lag1);
    CHECK(std::abs(m.mean) < 4.0 * m.standard_error);
}

TEST_CASE("self-similar marginal passes Kolmogorov-Smirnov") {
    const double horizon = 2.0;
    const HurstIndex h(0.7);
    const CirculantFbmSampler sampler(TimeGrid(horizon, 128), h);
    std::vector<double> scaled;
    for (std::size_t p = 0; p < 2000; ++p) {
        scaled.push_back(sampler.sample(derive_seed(11, p)).values.back() / std::pow(horizon, h.value()));
    }
    // Asymptotic 1% critical value 1.628 / sqrt(n).
    CHECK(testing_support::ks_distance_normal(scaled) < 1.628 / std::sqrt(2000.0));
}

TEST_CASE("variance scales like t^{2H}") {
    const HurstIndex h(0.7);
    const CirculantFbmSampler sampler(TimeGrid(2.0, 64), h);
    std::vector<double> ratio_top, ratio_mid;
    for (std::size_t p = 0; p < 3000; ++p) {
        const auto v = sampler.sample(derive_seed(21, p)).values;
        ratio_top.push_back(v[64] * v[64]);
        ratio_mid.push_back(v[32] * v[32]);
    }
    const auto top = moments(ratio_top);
    const auto mid = moments(ratio_mid);
    // Var(B_2) / Var(B_1) = 2^{2H}; allow 5 combined standard errors.
    const double se = std::hypot(top.standard_error, std::pow(2.0, 1.4) * mid.standard_error);
    CHECK(std::abs(top.mean - std::pow(2.0, 1.4) * mid.mean) < 5.0 * se);
}

TEST_CASE("increments are stationary") {
    const HurstIndex h(0.7);
    const CirculantFbmSampler sampler(TimeGrid(1.0, 64), h);
    std::vector<double> early, late;
    for (std::size_t p = 0; p < 3000; ++p) {
        const auto v = sampler.sample(derive_seed(31, p)).values;
        early.push_back((v[8] - v[0]) * (v[8] - v[0]));
        late.push_back((v[60] - v[52]) * (v[60] - v[52]));
    }
    const auto a = moments(early);
    const auto b = moments(late);
    CHECK(std::abs(a.mean - b.mean) < 5.0 * std::hypot(a.standard_error, b.standard_error));
}
