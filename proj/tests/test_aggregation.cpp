#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "parunc/aggregation.hpp"
#include "parunc/errors.hpp"

using namespace parunc;

namespace {

CorrelationMatrix rho2(double r) { return CorrelationMatrix(SquareMatrix(2, {1.0, r, r, 1.0})); }

std::vector<ParamEstimate> unbiased_estimates(std::uint64_t seed, std::vector<int> ns,
                                              std::vector<double> sigmas) {
    RngStream s(seed, 0);
    std::vector<ParamEstimate> out;
    for (std::size_t j = 0; j < ns.size(); ++j) {
        std::vector<double> d(ns[j]);
        for (double& x : d) x = sigmas[j] * s.normal();
        out.push_back(estimate(d, EstimatorMode::unbiased));
    }
    return out;
}

const AggregationMode kCorrectedEstimated{Combine::sum_corrected, WeightSource::estimated_lambda,
                                          Correlation::independent};

}  // namespace

TEST_CASE("independent weights") {
    const std::vector<int> n10{10, 10};
    const Weights w = compute_weights(std::vector<double>{1.0, 4.0}, n10);
    CHECK(w[0] == doctest::Approx(0.2));
    CHECK(w[1] == doctest::Approx(0.8));
    CHECK(compute_weights(std::vector<double>{3.0}, std::vector<int>{7})[0] == doctest::Approx(1.0));
    const Weights eq = compute_weights(std::vector<double>{1.0, 1.0}, n10);
    CHECK(eq[0] == doctest::Approx(0.5));
    CHECK(eq[1] == doctest::Approx(0.5));
    // unequal n enters through (n+1)/n
    const Weights un = compute_weights(std::vector<double>{1.0, 1.0}, std::vector<int>{5, 10});
    CHECK(un[0] == doctest::Approx(1.2 / 2.3));
    CHECK_THROWS_AS(compute_weights(std::vector<double>{0.0, 0.0}, n10), InvalidArgument);
}

TEST_CASE("correlated weights") {
    const std::vector<int> n10{10, 10};
    const Weights id = compute_weights_correlated(std::vector<double>{1.0, 2.0}, n10,
                                                  CorrelationMatrix::identity(2));
    CHECK(id(0, 0) == doctest::Approx(0.2));
    CHECK(id(1, 1) == doctest::Approx(0.8));
    CHECK(id(0, 1) == 0.0);
    CHECK(id(1, 0) == 0.0);
    CHECK(compute_weights_correlated(std::vector<double>{2.0}, std::vector<int>{4},
                                     CorrelationMatrix::identity(1))(0, 0) == doctest::Approx(1.0));

    const Weights w = compute_weights_correlated(std::vector<double>{1.0, 1.0}, std::vector<int>{5, 10}, rho2(0.5));
    // 1.2 + 1.1 + 2 * 0.5 * 1.1
    CHECK(w(0, 0) == doctest::Approx(1.2 / 3.4));
    CHECK(w(1, 1) == doctest::Approx(1.1 / 3.4));
    CHECK(w(0, 1) == doctest::Approx(0.55 / 3.4));
    CHECK(w.total() == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(compute_weights_correlated(std::vector<double>{1.0, 1.0}, n10, rho2(-0.3)), Unsupported);
}

TEST_CASE("weights are normalised") {
    RngStream s(8, 0);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> s2(1 + trial % 5);
        std::vector<int> n(s2.size());
        for (std::size_t j = 0; j < s2.size(); ++j) {
            s2[j] = 0.01 + 10.0 * s.uniform();
            n[j] = 2 + static_cast<int>(s() % 40);
        }
        CHECK(std::abs(compute_weights(s2, n).total() - 1.0) <= 1e-12);
    }
}

TEST_CASE("adjusted mean-pivot correlation") {
    const CorrelationMatrix r = rho2(0.5);
    CHECK(adjusted_zeta_correlation(r, std::vector<int>{10, 10}).matrix() == r.matrix());
    CHECK(adjusted_zeta_correlation(r, std::vector<int>{5, 10})(0, 1) == doctest::Approx(0.35355).epsilon(1e-5));
    CHECK(adjusted_zeta_correlation(CorrelationMatrix::identity(3), std::vector<int>{3, 5, 9}).is_identity());
}

TEST_CASE("correction factor") {
    const Weights one = Weights::independent({1.0});
    CHECK(correction_factor(one, one, std::vector<double>{0.37}) == 1.0);
    const Weights half = Weights::independent({0.5, 0.5});
    CHECK(correction_factor(half, half, std::vector<double>{1.0, 1.0}) == 1.0);
    CHECK(correction_factor(half, half, std::vector<double>{0.5, 2.0}) == doctest::Approx(0.8));
    CHECK(correction_factor(half, half, std::vector<double>{1.7, 1.7}) == 1.0);

    const Weights other = Weights::independent({0.3, 0.7});
    CHECK(correction_factor(half, other, std::vector<double>{1.0, 1.0}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(correction_factor(half, half, std::vector<double>{0.0, 1.0}), InvalidArgument);
}

TEST_CASE("correction factor never exceeds one when lambda equals lambda-hat") {
    RngStream s(9, 0);
    for (int trial = 0; trial < 2000; ++trial) {
        const std::size_t m = 2 + trial % 4;
        std::vector<double> lam(m);
        std::vector<double> mp(m);
        double tot = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            lam[j] = s.uniform();
            tot += lam[j];
            mp[j] = scaled_chi_square(3, 3, s);
        }
        for (double& l : lam) l /= tot;
        const Weights w = Weights::independent(lam);
        REQUIRE(correction_factor(w, w, mp) <= 1.0 + 1e-15);
    }
}

TEST_CASE("modelled overall sample") {
    CHECK(modelled_overall_sample(std::vector<double>{1.0, 2.0}, std::vector<double>{0.25, 4.0}, 1.0) == 4.25);
    CHECK(modelled_overall_sample(std::vector<double>{0.0, 0.0}, std::vector<double>{2.0, 3.0}, 0.8) ==
          doctest::Approx(4.0));
    CHECK(modelled_overall_sample(std::vector<double>{9.0}, std::vector<double>{1.5}, 1.0) == 1.5);
}

TEST_CASE("single subrisk aggregate equals rc_single pathwise") {
    const auto ests = unbiased_estimates(3, {10}, {1.5});
    for (auto method : {Method::plugin, Method::inversion}) {
        for (auto alpha : {0.9, 0.995}) {
            const RngStream s(55, 2);
            const double single = rc_single(ests[0], method, alpha, 4000, s);
            const double agg = rc_overall(ests, method, kCorrectedEstimated, alpha, 4000, s);
            CHECK(single == agg);
        }
    }
    const auto known = std::vector<ParamEstimate>{{0.0, 1.3, 10, EstimatorMode::known_mean_mle}};
    const AggregationMode unc{Combine::sum_uncorrected, WeightSource::estimated_lambda, Correlation::independent};
    for (auto method : {Method::naive_chisq, Method::inversion}) {
        const RngStream s(56, 2);
        CHECK(rc_single(known[0], method, 0.99, 3000, s) == rc_overall(known, method, unc, 0.99, 3000, s));
    }
}

TEST_CASE("identity correlation matches independent mode pathwise") {
    const auto ests = unbiased_estimates(4, {5, 10, 7}, {1.0, 0.5, 2.0});
    const std::vector<double> truth{1.0, 0.25, 4.0};
    for (auto ws : {WeightSource::estimated_lambda, WeightSource::true_lambda}) {
        AggregationMode ind{Combine::sum_corrected, ws, Correlation::independent};
        AggregationMode cor{Combine::sum_corrected, ws, Correlation::correlated};
        std::optional<std::span<const double>> t;
        if (ws == WeightSource::true_lambda) t = std::span<const double>(truth);
        AggregateModel a(ests, Method::inversion, ind, t);
        AggregateModel b(ests, Method::inversion, cor, t, CorrelationMatrix::identity(3));
        std::vector<double> ya(5000);
        std::vector<double> yb(5000);
        aggregate_samples(a, RngStream(6, 1), ya);
        aggregate_samples(b, RngStream(6, 1), yb);
        for (std::size_t i = 0; i < ya.size(); ++i) {
            REQUIRE(std::abs(ya[i] - yb[i]) <= 1e-12 * std::max(1.0, std::abs(ya[i])));
        }
    }
}

TEST_CASE("aggregate model validation") {
    const auto ests = unbiased_estimates(5, {10, 10}, {1.0, 1.0});
    const std::vector<double> truth{1.0, 1.0};
    const AggregationMode true_w{Combine::sum_corrected, WeightSource::true_lambda, Correlation::independent};
    CHECK_THROWS_AS(AggregateModel(ests, Method::inversion, true_w), InvalidArgument);
    CHECK_NOTHROW(AggregateModel(ests, Method::inversion, true_w, std::span<const double>(truth)));
    CHECK_THROWS_AS(AggregateModel(ests, Method::naive_chisq, kCorrectedEstimated), Unsupported);
    const AggregationMode cor{Combine::sum_corrected, WeightSource::estimated_lambda, Correlation::correlated};
    CHECK_THROWS_AS(AggregateModel(ests, Method::inversion, cor), InvalidArgument);
    CHECK_THROWS_AS(AggregateModel(ests, Method::inversion, kCorrectedEstimated, std::nullopt, rho2(0.2)),
                    InvalidArgument);
    CHECK_THROWS_AS(AggregateModel(ests, Method::inversion, cor, std::nullopt, rho2(-0.2)), Unsupported);

    const std::vector<ParamEstimate> known{{0.0, 1.0, 10, EstimatorMode::known_mean_mle},
                                           {0.0, 1.0, 10, EstimatorMode::known_mean_mle}};
    CHECK_THROWS_AS(AggregateModel(known, Method::inversion, kCorrectedEstimated), Unsupported);
    CHECK_THROWS_AS(rc_overall(ests, Method::inversion, kCorrectedEstimated, 0.9, 10, RngStream(1, 1)),
                    InvalidArgument);
}

TEST_CASE("plug-in aggregate has a = 1") {
    const auto ests = unbiased_estimates(6, {10, 5}, {1.0, 3.0});
    const AggregationMode unc{Combine::sum_uncorrected, WeightSource::estimated_lambda, Correlation::independent};
    const RngStream s(7, 7);
    CHECK(rc_overall(ests, Method::plugin, kCorrectedEstimated, 0.99, 2000, s) ==
          rc_overall(ests, Method::plugin, unc, 0.99, 2000, s));
}
