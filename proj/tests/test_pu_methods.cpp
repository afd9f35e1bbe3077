#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "parunc/errors.hpp"
#include "parunc/pu_methods.hpp"

using namespace parunc;

namespace {

ParamEstimate known(double sigma2, int n) { return {0.0, sigma2, n, EstimatorMode::known_mean_mle}; }

std::vector<double> draw_sample(std::uint64_t seed, int n, double mu, double sigma) {
    RngStream s(seed, 0);
    std::vector<double> d(n);
    for (double& x : d) x = mu + sigma * s.normal();
    return d;
}

}  // namespace

TEST_CASE("pivot law follows the estimator") {
    CHECK(pivot_law(EstimatorMode::known_mean_mle, 10).df == 10);
    CHECK(pivot_law(EstimatorMode::known_mean_mle, 10).divisor == 10);
    CHECK(pivot_law(EstimatorMode::unbiased, 10).df == 9);
    CHECK(pivot_law(EstimatorMode::unbiased, 10).divisor == 9);
    CHECK(pivot_law(EstimatorMode::mle, 10).df == 9);
    CHECK(pivot_law(EstimatorMode::mle, 10).divisor == 10);
}

TEST_CASE("modelled parameter examples") {
    PivotDraw p;
    p.m_prime = 1.0;
    const ModelledParams inv = draw_modelled_params(known(1.0, 10), Method::inversion, p);
    CHECK(inv.sigma_sim * inv.sigma_sim == doctest::Approx(1.0));
    CHECK(inv.mu_sim == 0.0);

    p.m_prime = 0.5;
    const ModelledParams nv = draw_modelled_params(known(2.0, 10), Method::naive_chisq, p);
    CHECK(nv.sigma_sim * nv.sigma_sim == doctest::Approx(1.0));

    const ParamEstimate est{0.0, 1.0, 4, EstimatorMode::unbiased};
    p.m_prime = 1.0;
    p.zeta_prime = 1.0;
    const ModelledParams um = draw_modelled_params(est, Method::inversion, p);
    CHECK(um.sigma_sim == doctest::Approx(1.0));
    CHECK(um.mu_sim == doctest::Approx(-0.5));

    const ModelledParams pl = draw_modelled_params({2.0, 9.0, 5, EstimatorMode::unbiased}, Method::plugin, p);
    CHECK(pl.mu_sim == 2.0);
    CHECK(pl.sigma_sim == 3.0);

    p.m_prime = 0.0;
    CHECK_THROWS_AS(draw_modelled_params(known(1.0, 10), Method::inversion, p), InvalidArgument);
}

TEST_CASE("modelled subrisk sample") {
    CHECK(modelled_subrisk_sample({0.0, 1.0}, 2.5) == 2.5);
    CHECK(modelled_subrisk_sample({3.0, 0.0}, -17.0) == 3.0);
    CHECK(modelled_subrisk_sample({1.0, 2.0}, -1.0) == -1.0);
}

TEST_CASE("method strings round-trip") {
    for (auto m : {Method::plugin, Method::naive_chisq, Method::inversion})
        CHECK(parse_method(to_string(m)) == m);
    CHECK_THROWS_AS(parse_method("bayes"), InvalidArgument);
}

TEST_CASE("rc_single against closed forms") {
    SUBCASE("inversion is the Student t quantile") {
        const double rc = rc_single(known(1.0, 10), Method::inversion, 0.99, 1'000'000, RngStream(1, 0));
        CHECK(std::abs(rc - 2.76377) < 0.03);
    }
    SUBCASE("plug-in is the normal quantile") {
        const double rc = rc_single(known(4.0, 10), Method::plugin, 0.95, 1'000'000, RngStream(2, 0));
        // sd of the quantile estimator: sqrt(a(1-a)/N) / density at the quantile
        const double se = std::sqrt(0.95 * 0.05 / 1e6) / (std::exp(-0.5 * 1.644854 * 1.644854) / std::sqrt(2 * M_PI)) * 2.0;
        CHECK(std::abs(rc - 3.289707) < 4.0 * se);
    }
    SUBCASE("constant data gives the mean") {
        const ParamEstimate est = estimate(std::vector<double>{2.5, 2.5, 2.5, 2.5}, EstimatorMode::unbiased);
        for (auto m : {Method::plugin, Method::naive_chisq, Method::inversion}) {
            CHECK(rc_single(est, m, 0.99, 2000, RngStream(3, 0)) == doctest::Approx(2.5).epsilon(1e-12));
        }
        CHECK(rc_single(known(0.0, 5), Method::inversion, 0.9, 2000, RngStream(3, 1)) == 0.0);
    }
    CHECK_THROWS_AS(rc_single(known(1.0, 10), Method::inversion, 0.99, 999, RngStream(1, 0)),
                    InvalidArgument);
}

TEST_CASE("rc_single is scale equivariant under replayed streams") {
    const double k = 7.3;
    const std::vector<double> d = draw_sample(10, 12, 0.0, 1.3);
    std::vector<double> dk = d;
    for (double& x : dk) x *= k;
    for (auto mode : {EstimatorMode::known_mean_mle, EstimatorMode::unbiased, EstimatorMode::mle}) {
        for (auto m : {Method::plugin, Method::naive_chisq, Method::inversion}) {
            CAPTURE(to_string(m));
            const RngStream s(20, 3);
            const double a = rc_single(estimate(d, mode), m, 0.99, 5000, s);
            const double b = rc_single(estimate(dk, mode), m, 0.99, 5000, s);
            CHECK(std::abs(b - k * a) <= 1e-9 * std::abs(k * a));
        }
    }
}

TEST_CASE("rc_single is translation equivariant with estimated means") {
    const double c = -4.2;
    const std::vector<double> d = draw_sample(11, 9, 1.0, 0.8);
    std::vector<double> dc = d;
    for (double& x : dc) x += c;
    for (auto mode : {EstimatorMode::unbiased, EstimatorMode::mle}) {
        for (auto m : {Method::plugin, Method::naive_chisq, Method::inversion}) {
            CAPTURE(to_string(m));
            const RngStream s(21, 3);
            const double a = rc_single(estimate(d, mode), m, 0.995, 5000, s);
            const double b = rc_single(estimate(dc, mode), m, 0.995, 5000, s);
            CHECK(std::abs(b - (a + c)) <= 1e-9 * std::max(1.0, std::abs(a + c)));
        }
    }
}

TEST_CASE("streams for skipped pivots do not shift the others") {
    const ParamEstimate est{0.0, 1.0, 10, EstimatorMode::unbiased};
    std::vector<double> plug(1000);
    std::vector<double> direct(1000);
    modelled_samples(SubriskModel(est, Method::plugin), RngStream(4, 4), plug);
    PivotStreams st(RngStream(4, 4));
    for (double& z : direct) z = st.z.normal();
    CHECK(plug == direct);
}

TEST_CASE("subrisk model rejects degenerate inputs") {
    CHECK_THROWS_AS(SubriskModel({0.0, 1.0, 1, EstimatorMode::unbiased}, Method::inversion), InvalidArgument);
    CHECK_THROWS_AS(SubriskModel({0.0, -1.0, 5, EstimatorMode::unbiased}, Method::inversion), InvalidArgument);
    CHECK_FALSE(SubriskModel(known(1.0, 3), Method::inversion).uses_zeta());
    CHECK(SubriskModel({0.0, 1.0, 3, EstimatorMode::unbiased}, Method::inversion).uses_zeta());
    CHECK_FALSE(SubriskModel({0.0, 1.0, 3, EstimatorMode::unbiased}, Method::plugin).uses_m_prime());
}
