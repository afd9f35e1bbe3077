#include "parunc/pu_methods.hpp"

#include <cmath>
#include <string>

#include "parunc/errors.hpp"

namespace parunc {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::plugin: return "plugin";
        case Method::naive_chisq: return "naive-chisq";
        case Method::inversion: return "inversion";
    }
    return "?";
}

Method parse_method(std::string_view text) {
    if (text == "plugin") return Method::plugin;
    if (text == "naive-chisq") return Method::naive_chisq;
    if (text == "inversion") return Method::inversion;
    throw InvalidArgument("unknown method '" + std::string(text) + "'");
}

PivotLaw pivot_law(EstimatorMode mode, int n) {
    switch (mode) {
        case EstimatorMode::known_mean_mle: return {n, n};
        case EstimatorMode::unbiased: return {n - 1, n - 1};
        case EstimatorMode::mle: return {n - 1, n};
    }
    throw InvalidArgument("pivot_law: bad estimator mode");
}

ModelledParams draw_modelled_params(const ParamEstimate& est, Method method,
                                    const PivotDraw& pivot) {
    const bool known_mean = est.mode == EstimatorMode::known_mean_mle;
    switch (method) {
        case Method::plugin:
            return {est.mu_hat, std::sqrt(est.sigma2_hat)};
        case Method::naive_chisq: {
            if (!(pivot.m_prime > 0.0)) {
                throw InvalidArgument("draw_modelled_params: m_prime must be positive");
            }
            const double sigma = std::sqrt(est.sigma2_hat * pivot.m_prime);
            const double mu =
                known_mean ? 0.0 : est.mu_hat + sigma / std::sqrt(est.n) * pivot.zeta_prime;
            return {mu, sigma};
        }
        case Method::inversion: {
            if (!(pivot.m_prime > 0.0)) {
                throw InvalidArgument("draw_modelled_params: m_prime must be positive");
            }
            const double sigma = std::sqrt(est.sigma2_hat / pivot.m_prime);
            const double mu =
                known_mean ? 0.0 : est.mu_hat - sigma / std::sqrt(est.n) * pivot.zeta_prime;
            return {mu, sigma};
        }
    }
    throw InvalidArgument("draw_modelled_params: bad method");
}

namespace {

ScaledChiSquare make_pivot_sampler(const ParamEstimate& est) {
    const PivotLaw law = pivot_law(est.mode, est.n);
    if (law.df < 1) {
        throw InvalidArgument("sample length " + std::to_string(est.n) +
                              " leaves no degrees of freedom for the variance pivot");
    }
    return ScaledChiSquare(law.df, law.divisor);
}

}  // namespace

SubriskModel::SubriskModel(const ParamEstimate& est, Method method)
    : est_(est), method_(method), chi_(make_pivot_sampler(est)) {
    if (!(est.sigma2_hat >= 0.0)) {
        throw InvalidArgument("SubriskModel: sigma2_hat must be non-negative");
    }
}

bool SubriskModel::uses_zeta() const noexcept {
    return method_ != Method::plugin && est_.mode != EstimatorMode::known_mean_mle;
}

PivotDraw SubriskModel::draw_parameter_pivots(PivotStreams& streams) const {
    PivotDraw p;
    if (uses_m_prime()) {
        p.m_prime = chi_(streams.chi);
    }
    if (uses_zeta()) {
        p.zeta_prime = streams.zeta.normal();
    }
    return p;
}

void modelled_samples(const SubriskModel& model, const RngStream& stream, std::span<double> out) {
    PivotStreams streams(stream);
    for (double& y : out) {
        PivotDraw pivot = model.draw_parameter_pivots(streams);
        pivot.z_prime = streams.z.normal();
        const ModelledParams params = draw_modelled_params(model.estimate(), model.method(), pivot);
        y = modelled_subrisk_sample(params, pivot.z_prime);
    }
}

double rc_single(const ParamEstimate& est, Method method, double alpha, int n_inner,
                 const RngStream& stream) {
    if (n_inner < kMinInnerSamples) {
        throw InvalidArgument("rc_single: n_inner must be >= " +
                              std::to_string(kMinInnerSamples));
    }
    const SubriskModel model(est, method);
    std::vector<double> samples(static_cast<std::size_t>(n_inner));
    modelled_samples(model, stream, samples);
    return empirical_quantile(samples, alpha);
}

}  // namespace parunc
