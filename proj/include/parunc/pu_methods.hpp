#pragma once

// Per-subrisk parameter-uncertainty methods.
//
// Each method turns a ParamEstimate plus one joint pivot realization into
// modelled parameters (mu_sim, sigma_sim) and a modelled subrisk sample
// Y = mu_sim + sigma_sim * Z'.

#include <span>
#include <string_view>
#include <vector>

#include "parunc/estimation.hpp"
#include "parunc/sampling.hpp"

namespace parunc {

enum class Method {
    plugin,       // parameters frozen at their estimates
    naive_chisq,  // estimator sampling law applied forward: sigma_sim^2 = sigma2_hat * M'
    inversion,    // pivot solved for the parameter: sigma_sim^2 = sigma2_hat / M'
};

std::string_view to_string(Method method);
Method parse_method(std::string_view text);

// Law of the variance pivot M = chi2(df) / divisor implied by an estimator:
// known-mean-mle -> chi2(n)/n, unbiased -> chi2(n-1)/(n-1), mle -> chi2(n-1)/n.
struct PivotLaw {
    int df;
    int divisor;
};
PivotLaw pivot_law(EstimatorMode mode, int n);

struct PivotDraw {
    double zeta_prime = 0.0;  // standard normal, mean pivot
    double m_prime = 1.0;     // scaled chi-square, variance pivot
    double z_prime = 0.0;     // standard normal, risk driver
};

struct ModelledParams {
    double mu_sim = 0.0;
    double sigma_sim = 0.0;
};

// One substream per pivot component, so skipping a component (e.g. M' under
// plug-in) never shifts the others.
struct PivotStreams {
    explicit PivotStreams(const RngStream& inner)
        : chi(inner.substream(0)), zeta(inner.substream(1)), z(inner.substream(2)) {}

    RngStream chi;
    RngStream zeta;
    RngStream z;
};

ModelledParams draw_modelled_params(const ParamEstimate& est, Method method,
                                    const PivotDraw& pivot);

inline double modelled_subrisk_sample(const ModelledParams& params, double z_prime) {
    return params.mu_sim + params.sigma_sim * z_prime;
}

inline constexpr int kMinInnerSamples = 1000;

// Bundles an estimate with its method and pivot sampler for repeated draws.
class SubriskModel {
public:
    SubriskModel(const ParamEstimate& est, Method method);

    const ParamEstimate& estimate() const noexcept { return est_; }
    Method method() const noexcept { return method_; }

    // Draws M' (and zeta' in estimated-mean inversion/naive); z_prime left at 0.
    PivotDraw draw_parameter_pivots(PivotStreams& streams) const;

    double draw_m_prime(PivotStreams& streams) const { return chi_(streams.chi); }

    bool uses_zeta() const noexcept;
    bool uses_m_prime() const noexcept { return method_ != Method::plugin; }

private:
    ParamEstimate est_;
    Method method_;
    ScaledChiSquare chi_;
};

// Fills `out` with independent modelled-risk samples, fresh pivots per sample.
void modelled_samples(const SubriskModel& model, const RngStream& stream, std::span<double> out);

double rc_single(const ParamEstimate& est, Method method, double alpha, int n_inner,
                 const RngStream& stream);

}  // namespace parunc
