#pragma once

// Closed-form and quadrature ground truth for a single subrisk with known
// mean zero and sigma2_hat = sum x^2 / n. With C ~ chi2(n) and sigma_hat =
// sigma * sqrt(C / n), a method whose capital is k * sigma_hat has solvency
// probability E_C[Phi(k * sqrt(C / n))]. No Monte Carlo anywhere.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "parunc/pu_methods.hpp"

namespace parunc::oracle {

double t_cdf(int df, double t);

// Bisection on the incomplete-beta form of the Student-t CDF.
double t_quantile(int df, double alpha);

double normal_quantile(double alpha);

double rc_inversion_exact(double sigma_hat, int n, double alpha);

// Gauss-Legendre on u in (0, 1) pulled back through the chi-square quantile:
// integral g dF = integral_0^1 g(F^{-1}(u)) du.
class QuadratureRule {
public:
    static QuadratureRule chi_square(int df, std::size_t nodes = 512);

    std::span<const double> nodes() const noexcept { return nodes_; }
    std::span<const double> weights() const noexcept { return weights_; }

    double integrate(const std::function<double(double)>& g) const;

private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(std::size_t count, std::vector<double>& nodes, std::vector<double>& weights);

// RC / sigma_hat for the method: z_alpha, t_n^{-1}(alpha), or the naive
// multiplier from root-finding the quadrature CDF of sqrt(C/n) * Z'.
double rc_multiplier(Method method, int n, double alpha);

// Throws Unsupported for any estimator other than known-mean-mle.
double solvency_prob_exact(Method method, int n, double alpha,
                           EstimatorMode mode = EstimatorMode::known_mean_mle);

}  // namespace parunc::oracle
