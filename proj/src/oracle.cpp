#include "parunc/oracle.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/tools/roots.hpp>

#include "parunc/errors.hpp"
#include "parunc/harness.hpp"

namespace parunc::oracle {

double t_cdf(int df, double t) {
    if (df < 1) {
        throw InvalidArgument("t_cdf: df must be >= 1");
    }
    if (t == 0.0) return 0.5;
    const double nu = df;
    const double x = nu / (nu + t * t);
    const double tail = 0.5 * boost::math::ibeta(0.5 * nu, 0.5, x);
    return t > 0.0 ? 1.0 - tail : tail;
}

double t_quantile(int df, double alpha) {
    if (df < 1) {
        throw InvalidArgument("t_quantile: df must be >= 1");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("t_quantile: alpha must lie in (0, 1)");
    }
    if (alpha == 0.5) return 0.0;
    const bool upper = alpha > 0.5;
    const double p = upper ? alpha : 1.0 - alpha;
    double lo = 0.0;
    double hi = 1.0;
    while (t_cdf(df, hi) < p) hi *= 2.0;
    for (int iter = 0; iter < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        (t_cdf(df, mid) < p ? lo : hi) = mid;
    }
    const double q = 0.5 * (lo + hi);
    return upper ? q : -q;
}

double normal_quantile(double alpha) {
    return boost::math::quantile(boost::math::normal_distribution<double>(), alpha);
}

double rc_inversion_exact(double sigma_hat, int n, double alpha) {
    if (!(sigma_hat >= 0.0)) {
        throw InvalidArgument("rc_inversion_exact: sigma_hat must be >= 0");
    }
    return sigma_hat * t_quantile(n, alpha);
}

void gauss_legendre(std::size_t count, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(count, 0.0);
    weights.assign(count, 0.0);
    const std::size_t half = (count + 1) / 2;
    for (std::size_t i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(count) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (std::size_t k = 2; k <= count; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = count * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0;
        double p1 = x;
        for (std::size_t k = 2; k <= count; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = count * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
}

QuadratureRule QuadratureRule::chi_square(int df, std::size_t count) {
    if (df < 1) {
        throw InvalidArgument("QuadratureRule: df must be >= 1");
    }
    if (count < 200) {
        throw InvalidArgument("QuadratureRule: need at least 200 nodes");
    }
    std::vector<double> x;
    std::vector<double> w;
    gauss_legendre(count, x, w);
    const boost::math::chi_squared_distribution<double> dist(df);
    QuadratureRule rule;
    rule.nodes_.resize(count);
    rule.weights_.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = 0.5 * (x[i] + 1.0);
        rule.nodes_[i] = boost::math::quantile(dist, u);
        rule.weights_[i] = 0.5 * w[i];
    }
    return rule;
}

double QuadratureRule::integrate(const std::function<double(double)>& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        s += weights_[i] * g(nodes_[i]);
    }
    return s;
}

namespace {

// E_C[Phi(k * sqrt(C / n))]
double expected_phi(const QuadratureRule& rule, int n, double k) {
    return rule.integrate([&](double c) { return normal_cdf(k * std::sqrt(c / n)); });
}

double naive_multiplier(const QuadratureRule& rule, int n, double alpha) {
    // CDF of sqrt(C/n) * Z' at k: E_C[Phi(k / sqrt(C/n))]
    auto f = [&](double k) {
        return rule.integrate([&](double c) { return normal_cdf(k / std::sqrt(c / n)); }) - alpha;
    };
    const bool upper = alpha > 0.5;
    double lo = upper ? 0.0 : -1.0;
    double hi = upper ? 1.0 : 0.0;
    if (upper) {
        while (f(hi) < 0.0) hi *= 2.0;
    } else {
        while (f(lo) > 0.0) lo *= 2.0;
    }
    std::uintmax_t max_iter = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        f, lo, hi, boost::math::tools::eps_tolerance<double>(50), max_iter);
    return 0.5 * (a + b);
}

}  // namespace

double rc_multiplier(Method method, int n, double alpha) {
    switch (method) {
        case Method::plugin: return normal_quantile(alpha);
        case Method::inversion: return t_quantile(n, alpha);
        case Method::naive_chisq: return naive_multiplier(QuadratureRule::chi_square(n), n, alpha);
    }
    throw InvalidArgument("rc_multiplier: bad method");
}

double solvency_prob_exact(Method method, int n, double alpha, EstimatorMode mode) {
    if (mode != EstimatorMode::known_mean_mle) {
        throw Unsupported("solvency_prob_exact covers the known-mean setting only");
    }
    if (n < 1) {
        throw InvalidArgument("solvency_prob_exact: n must be >= 1");
    }
    const QuadratureRule rule = QuadratureRule::chi_square(n);
    const double k = method == Method::naive_chisq ? naive_multiplier(rule, n, alpha)
                                                   : rc_multiplier(method, n, alpha);
    return expected_phi(rule, n, k);
}

}  // namespace parunc::oracle
