#include "parunc/estimation.hpp"

#include <string>

#include "parunc/errors.hpp"

namespace parunc {

std::string_view to_string(EstimatorMode mode) {
    switch (mode) {
        case EstimatorMode::known_mean_mle: return "known-mean-mle";
        case EstimatorMode::unbiased: return "unbiased";
        case EstimatorMode::mle: return "mle";
    }
    return "?";
}

EstimatorMode parse_estimator_mode(std::string_view text) {
    if (text == "known-mean-mle") return EstimatorMode::known_mean_mle;
    if (text == "unbiased") return EstimatorMode::unbiased;
    if (text == "mle") return EstimatorMode::mle;
    throw InvalidArgument("unknown estimator mode '" + std::string(text) + "'");
}

ParamEstimate estimate_known_mean(std::span<const double> sample) {
    if (sample.empty()) {
        throw InvalidArgument("estimate_known_mean: empty sample");
    }
    double ss = 0.0;
    for (double x : sample) {
        ss += x * x;
    }
    const int n = static_cast<int>(sample.size());
    return {0.0, ss / n, n, EstimatorMode::known_mean_mle};
}

ParamEstimate estimate_mean_var(std::span<const double> sample, EstimatorMode mode) {
    if (mode == EstimatorMode::known_mean_mle) {
        throw InvalidArgument("estimate_mean_var: use estimate_known_mean for known-mean data");
    }
    const int n = static_cast<int>(sample.size());
    if (n < 1 || (mode == EstimatorMode::unbiased && n < 2)) {
        throw InvalidArgument("estimate_mean_var: sample of length " + std::to_string(n) +
                              " is too short for mode " + std::string(to_string(mode)));
    }
    double sum = 0.0;
    for (double x : sample) {
        sum += x;
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (double x : sample) {
        const double d = x - mean;
        ss += d * d;
    }
    const int divisor = mode == EstimatorMode::unbiased ? n - 1 : n;
    return {mean, ss / divisor, n, mode};
}

ParamEstimate estimate(std::span<const double> sample, EstimatorMode mode) {
    return mode == EstimatorMode::known_mean_mle ? estimate_known_mean(sample)
                                                 : estimate_mean_var(sample, mode);
}

}  // namespace parunc
