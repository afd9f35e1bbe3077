#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "parunc/errors.hpp"
#include "parunc/harness.hpp"

using namespace parunc;

namespace {

PortfolioSpec single_known(double sigma, int n) {
    PortfolioSpec s;
    s.subrisks = {{0.0, sigma, n}};
    s.mean_mode = MeanMode::known_zero;
    s.estimator_mode = EstimatorMode::known_mean_mle;
    return s;
}

PortfolioSpec pair_estimated(SubriskSpec a, SubriskSpec b) {
    PortfolioSpec s;
    s.subrisks = {a, b};
    s.mean_mode = MeanMode::estimated;
    s.estimator_mode = EstimatorMode::unbiased;
    return s;
}

CorrelationMatrix rho2(double r) { return CorrelationMatrix(SquareMatrix(2, {1.0, r, r, 1.0})); }

ExperimentConfig small(int n_outer = 2000, int n_inner = 2000) {
    ExperimentConfig c;
    c.n_outer = n_outer;
    c.n_inner = n_inner;
    c.seed = 123;
    return c;
}

void require_identical(const std::vector<SolvencyResult>& a, const std::vector<SolvencyResult>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].p_hat == b[i].p_hat);
        CHECK(a[i].std_err == b[i].std_err);
    }
}

}  // namespace

TEST_CASE("mode strings") {
    CHECK(parse_mean_mode("known-zero") == MeanMode::known_zero);
    CHECK(parse_mean_mode("estimated") == MeanMode::estimated);
    CHECK(parse_exceedance_mode("draw-x") == ExceedanceMode::draw_x);
    CHECK(to_string(ExceedanceMode::conditional_cdf) == "conditional-cdf");
    CHECK_THROWS_AS(parse_mean_mode("zero"), InvalidArgument);
}

TEST_CASE("portfolio validation") {
    PortfolioSpec s = single_known(1.0, 10);
    CHECK_NOTHROW(s.validate());
    s.subrisks[0].sigma = 0.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = single_known(1.0, 10);
    s.subrisks[0].mu = 1.0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = single_known(1.0, 10);
    s.estimator_mode = EstimatorMode::unbiased;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = pair_estimated({0.0, 1.0, 10}, {0.0, 1.0, 10});
    s.rho = CorrelationMatrix::identity(3);
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    CHECK_THROWS_AS(generate_data(single_known(-1.0, 5), RngStream(1, 1)), InvalidArgument);

    PortfolioSpec c = pair_estimated({1.0, 1.0, 10}, {2.0, 2.0, 10});
    c.rho = rho2(0.5);
    CHECK(c.total_mean() == 3.0);
    CHECK(c.total_sigma() == doctest::Approx(std::sqrt(1.0 + 4.0 + 2.0)));
}

TEST_CASE("identity correlation reproduces independent data") {
    PortfolioSpec a = pair_estimated({0.5, 1.0, 5}, {-1.0, 3.0, 12});
    PortfolioSpec b = a;
    b.rho = CorrelationMatrix::identity(2);
    for (std::uint64_t r = 0; r < 50; ++r) {
        const auto da = generate_data(a, RngStream(9, r));
        const auto db = generate_data(b, RngStream(9, r));
        REQUIRE(da == db);
    }
}

TEST_CASE("generated data covariances") {
    const int reps = 100000;
    auto corr_of_means = [&](const PortfolioSpec& spec) {
        double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
        for (int r = 0; r < reps; ++r) {
            const auto d = generate_data(spec, RngStream(17, static_cast<std::uint64_t>(r)));
            const auto e = estimate_all(spec, d);
            const double a = (e[0].mu_hat - spec.subrisks[0].mu) * std::sqrt(spec.subrisks[0].n) / spec.subrisks[0].sigma;
            const double b = (e[1].mu_hat - spec.subrisks[1].mu) * std::sqrt(spec.subrisks[1].n) / spec.subrisks[1].sigma;
            s1 += a;
            s2 += b;
            s11 += a * a;
            s22 += b * b;
            s12 += a * b;
        }
        // standardised means have unit variance, so this is their covariance
        return s12 / reps - (s1 / reps) * (s2 / reps);
    };
    SUBCASE("identity, equal n") {
        PortfolioSpec s = pair_estimated({0.0, 1.0, 10}, {0.0, 2.0, 10});
        s.rho = CorrelationMatrix::identity(2);
        CHECK(std::abs(corr_of_means(s)) < 0.013);
    }
    SUBCASE("overlapping windows") {
        PortfolioSpec s = pair_estimated({1.0, 1.0, 5}, {-2.0, 3.0, 10});
        s.rho = rho2(0.5);
        const double expected = 0.5 * 5.0 / std::sqrt(50.0);
        // Var of a product of bivariate normals with correlation r is 1 + r^2
        const double se = std::sqrt((1.0 + expected * expected) / reps);
        CHECK(std::abs(corr_of_means(s) - expected) <= 4.0 * se);
    }
}

TEST_CASE("inversion is exact for a single subrisk") {
    for (int n : {5, 20}) {
        ExperimentConfig c = small(4000, 2000);
        const auto res = solvency_probabilities(single_known(2.0, n), c);
        for (const auto& r : res) {
            CAPTURE(n);
            CAPTURE(r.alpha);
            CHECK(std::abs(r.p_hat - r.alpha) <= 4.0 * r.std_err);
        }
    }
}

TEST_CASE("naive method falls short of the target") {
    ExperimentConfig c = small(4000, 2000);
    c.method = Method::naive_chisq;
    for (const auto& r : solvency_probabilities(single_known(1.0, 10), c)) {
        CHECK(r.p_hat + 4.0 * r.std_err < r.alpha);
    }
}

TEST_CASE("parallel kernel matches the serial reference bit for bit") {
    SUBCASE("single subrisk") {
        ExperimentConfig c = small(300, 1000);
        c.method = Method::naive_chisq;
        require_identical(solvency_probabilities(single_known(1.0, 10), c),
                          solvency_probabilities_reference(single_known(1.0, 10), c));
    }
    SUBCASE("corrected aggregate") {
        ExperimentConfig c = small(200, 1000);
        c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
        const PortfolioSpec s = pair_estimated({1.0, 1.0, 5}, {0.0, 0.3, 10});
        require_identical(solvency_probabilities(s, c), solvency_probabilities_reference(s, c));
    }
    SUBCASE("correlated, true weights, draw-x") {
        ExperimentConfig c = small(200, 1000);
        c.exceedance = ExceedanceMode::draw_x;
        c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::true_lambda};
        PortfolioSpec s = pair_estimated({0.0, 1.0, 10}, {0.0, 2.0, 20});
        s.rho = rho2(0.4);
        require_identical(solvency_probabilities(s, c), solvency_probabilities_reference(s, c));
    }
}

TEST_CASE("results do not depend on the worker count") {
    ExperimentConfig c = small(500, 1000);
    c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
    const PortfolioSpec s = pair_estimated({0.0, 1.0, 10}, {0.0, 2.0, 10});
    c.workers = 1;
    const auto one = solvency_probabilities(s, c);
    c.workers = 5;
    require_identical(one, solvency_probabilities(s, c));
}

TEST_CASE("exceedance scoring modes agree") {
    const PortfolioSpec s = pair_estimated({0.0, 1.0, 10}, {0.0, 1.0, 5});
    ExperimentConfig c = small(6000, 1000);
    c.aggregation = AggregationMode{Combine::sum_uncorrected, WeightSource::estimated_lambda};
    c.method = Method::plugin;
    const auto cc = solvency_probabilities(s, c);
    c.exceedance = ExceedanceMode::draw_x;
    const auto dx = solvency_probabilities(s, c);
    for (std::size_t k = 0; k < cc.size(); ++k) {
        const double se = std::sqrt(cc[k].std_err * cc[k].std_err + dx[k].std_err * dx[k].std_err);
        CHECK(std::abs(cc[k].p_hat - dx[k].p_hat) <= 4.0 * se);
        CHECK(dx[k].std_err == doctest::Approx(std::sqrt(dx[k].p_hat * (1 - dx[k].p_hat) / 6000)));
    }
}

TEST_CASE("p_hat is monotone in alpha") {
    ExperimentConfig c = small(500, 1000);
    c.alphas = {0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};
    for (auto mode : {ExceedanceMode::conditional_cdf, ExceedanceMode::draw_x}) {
        c.exceedance = mode;
        const auto res = solvency_probabilities(single_known(1.0, 10), c);
        for (std::size_t k = 1; k < res.size(); ++k) CHECK(res[k].p_hat >= res[k - 1].p_hat);
    }
}

TEST_CASE("p_hat is invariant under scaling and shifting the true model") {
    ExperimentConfig c = small(300, 1000);
    c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
    const PortfolioSpec base = pair_estimated({0.0, 1.0, 10}, {0.0, 0.5, 5});
    PortfolioSpec moved = base;
    for (auto& r : moved.subrisks) {
        r.mu -= 4.2;
        r.sigma *= 7.3;
    }
    const auto a = solvency_probabilities(base, c);
    const auto b = solvency_probabilities(moved, c);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k].p_hat - b[k].p_hat) <= 1e-9);

    const auto ra = replicate_risk_capital(base, c, 11);
    const auto rb = replicate_risk_capital(moved, c, 11);
    for (std::size_t k = 0; k < ra.size(); ++k) {
        const double expected = 7.3 * ra[k] - 8.4;
        CHECK(std::abs(rb[k] - expected) <= 1e-9 * std::abs(expected));
    }
}

TEST_CASE("experiment checks") {
    const PortfolioSpec pair = pair_estimated({0.0, 1.0, 10}, {0.0, 1.0, 10});
    ExperimentConfig c = small();
    CHECK_THROWS_AS(check_experiment(pair, c), InvalidArgument);  // aggregation required
    c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
    CHECK_NOTHROW(check_experiment(pair, c));
    c.method = Method::naive_chisq;
    CHECK_THROWS_AS(check_experiment(pair, c), Unsupported);
    c.method = Method::inversion;
    PortfolioSpec neg = pair;
    neg.rho = rho2(-0.3);
    CHECK_THROWS_AS(check_experiment(neg, c), Unsupported);
    c.n_outer = 10;
    CHECK_THROWS_AS(check_experiment(pair, c), InvalidArgument);
    c = small();
    c.alphas = {1.0};
    CHECK_THROWS_AS(check_experiment(single_known(1.0, 5), c), InvalidArgument);
}

TEST_CASE("single alpha entry point") {
    ExperimentConfig c = small(300, 1000);
    const auto all = solvency_probabilities(single_known(1.0, 10), c);
    const SolvencyResult one = solvency_probability(single_known(1.0, 10), c, 0.99);
    CHECK(one.alpha == 0.99);
    CHECK(one.p_hat == all[2].p_hat);
    CHECK(one.seed == 123);
    CHECK(normal_cdf(0.0) == 0.5);
}
