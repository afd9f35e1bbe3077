#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "parunc/errors.hpp"
#include "parunc/estimation.hpp"
#include "parunc/sampling.hpp"

using namespace parunc;

TEST_CASE("known-mean estimator") {
    CHECK(estimate_known_mean(std::vector<double>{3, 4}).sigma2_hat == 12.5);
    CHECK(estimate_known_mean(std::vector<double>{0, 0, 0}).sigma2_hat == 0.0);
    const double c = -1.75;
    const ParamEstimate e = estimate_known_mean(std::vector<double>{c});
    CHECK(e.sigma2_hat == c * c);
    CHECK(e.mu_hat == 0.0);
    CHECK(e.n == 1);
    CHECK(e.mode == EstimatorMode::known_mean_mle);
    CHECK_THROWS_AS(estimate_known_mean(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("mean and variance estimators") {
    const std::vector<double> d{0, 2};
    const ParamEstimate u = estimate_mean_var(d, EstimatorMode::unbiased);
    CHECK(u.mu_hat == 1.0);
    CHECK(u.sigma2_hat == 2.0);
    const ParamEstimate m = estimate_mean_var(d, EstimatorMode::mle);
    CHECK(m.mu_hat == 1.0);
    CHECK(m.sigma2_hat == 1.0);

    const ParamEstimate k = estimate_mean_var(std::vector<double>{4.2, 4.2, 4.2}, EstimatorMode::unbiased);
    CHECK(k.mu_hat == doctest::Approx(4.2));
    CHECK(k.sigma2_hat == doctest::Approx(0.0));

    CHECK_THROWS_AS(estimate_mean_var(std::vector<double>{1.0}, EstimatorMode::unbiased), InvalidArgument);
    CHECK_THROWS_AS(estimate_mean_var(d, EstimatorMode::known_mean_mle), InvalidArgument);
}

TEST_CASE("dispatch and mode strings") {
    const std::vector<double> d{1, 2, 6};
    CHECK(estimate(d, EstimatorMode::known_mean_mle).sigma2_hat == doctest::Approx(41.0 / 3.0));
    CHECK(estimate(d, EstimatorMode::unbiased).sigma2_hat == doctest::Approx(7.0));
    for (auto mode : {EstimatorMode::known_mean_mle, EstimatorMode::unbiased, EstimatorMode::mle})
        CHECK(parse_estimator_mode(to_string(mode)) == mode);
    CHECK_THROWS_AS(parse_estimator_mode("median"), InvalidArgument);
}

TEST_CASE("mle equals rescaled unbiased estimate") {
    RngStream s(5, 5);
    for (int n = 2; n < 40; ++n) {
        std::vector<double> d(n);
        for (double& x : d) x = 3.0 + 2.0 * std_normal(s);
        const double u = estimate_mean_var(d, EstimatorMode::unbiased).sigma2_hat;
        const double m = estimate_mean_var(d, EstimatorMode::mle).sigma2_hat;
        CHECK(m == doctest::Approx(u * (n - 1) / n).epsilon(1e-13));
    }
}

TEST_CASE("sampling distribution of the estimators") {
    const double mu = 1.5;
    const double sigma = 2.0;
    const int n = 8;
    const int reps = 100000;
    RngStream s(31, 0);
    std::vector<double> d(n);
    double s_z = 0, s_zz = 0, s_v = 0, s_vv = 0, s_zv = 0;
    for (int r = 0; r < reps; ++r) {
        for (double& x : d) x = mu + sigma * std_normal(s);
        const ParamEstimate e = estimate_mean_var(d, EstimatorMode::unbiased);
        const double z = (e.mu_hat - mu) * std::sqrt(n) / sigma;
        const double v = (n - 1) * e.sigma2_hat / (sigma * sigma);
        s_z += z;
        s_zz += z * z;
        s_v += v;
        s_vv += v * v;
        s_zv += z * v;
    }
    const double mz = s_z / reps;
    const double vz = s_zz / reps - mz * mz;
    const double mv = s_v / reps;
    const double vv = s_vv / reps - mv * mv;
    const double corr = (s_zv / reps - mz * mv) / std::sqrt(vz * vv);
    CHECK(std::abs(mz) < 0.013);
    CHECK(std::abs(vz - 1.0) < 0.02);
    CHECK(std::abs(mv - (n - 1)) <= 4.0 * std::sqrt(2.0 * (n - 1) / reps));
    CHECK(std::abs(corr) < 0.013);
}
