#pragma once

#include <span>
#include <string_view>
#include <vector>

namespace parunc {

// Which estimator produced sigma2_hat. The mode also fixes the law of the
// variance pivot used downstream (see pu_methods.hpp).
enum class EstimatorMode {
    known_mean_mle,  // mean known to be 0, sigma2 = sum x^2 / n
    unbiased,        // sample mean, divisor n - 1
    mle,             // sample mean, divisor n
};

std::string_view to_string(EstimatorMode mode);
EstimatorMode parse_estimator_mode(std::string_view text);

using Sample = std::vector<double>;

struct ParamEstimate {
    double mu_hat = 0.0;
    double sigma2_hat = 0.0;
    int n = 0;
    EstimatorMode mode = EstimatorMode::unbiased;
};

ParamEstimate estimate_known_mean(std::span<const double> sample);
ParamEstimate estimate_mean_var(std::span<const double> sample, EstimatorMode mode);

// Dispatches on mode (known_mean_mle -> estimate_known_mean).
ParamEstimate estimate(std::span<const double> sample, EstimatorMode mode);

}  // namespace parunc
