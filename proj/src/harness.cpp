#include "parunc/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include <omp.h>

#include "parunc/errors.hpp"

namespace parunc {

std::string_view to_string(MeanMode mode) {
    return mode == MeanMode::known_zero ? "known-zero" : "estimated";
}

std::string_view to_string(ExceedanceMode mode) {
    return mode == ExceedanceMode::draw_x ? "draw-x" : "conditional-cdf";
}

MeanMode parse_mean_mode(std::string_view text) {
    if (text == "known-zero") return MeanMode::known_zero;
    if (text == "estimated") return MeanMode::estimated;
    throw InvalidArgument("unknown mean mode '" + std::string(text) + "'");
}

ExceedanceMode parse_exceedance_mode(std::string_view text) {
    if (text == "draw-x") return ExceedanceMode::draw_x;
    if (text == "conditional-cdf") return ExceedanceMode::conditional_cdf;
    throw InvalidArgument("unknown exceedance mode '" + std::string(text) + "'");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// ---------------------------------------------------------------------------

void PortfolioSpec::validate() const {
    if (subrisks.empty()) {
        throw InvalidArgument("portfolio has no subrisks");
    }
    for (std::size_t j = 0; j < subrisks.size(); ++j) {
        const auto& s = subrisks[j];
        const std::string where = "subrisk " + std::to_string(j) + ": ";
        if (!std::isfinite(s.mu) || !std::isfinite(s.sigma)) {
            throw InvalidArgument(where + "parameters must be finite");
        }
        if (!(s.sigma > 0.0)) {
            throw InvalidArgument(where + "sigma must be > 0");
        }
        if (s.n < 2) {
            throw InvalidArgument(where + "sample length n must be >= 2");
        }
        if (mean_mode == MeanMode::known_zero && s.mu != 0.0) {
            throw InvalidArgument(where + "known-zero mean mode requires mu = 0");
        }
    }
    const bool known = mean_mode == MeanMode::known_zero;
    if (known != (estimator_mode == EstimatorMode::known_mean_mle)) {
        throw InvalidArgument("estimator mode " + std::string(to_string(estimator_mode)) +
                              " does not match mean mode " + std::string(to_string(mean_mode)));
    }
    if (rho && rho->dim() != subrisks.size()) {
        throw InvalidArgument("correlation matrix dimension does not match subrisk count");
    }
}

double PortfolioSpec::total_mean() const {
    double s = 0.0;
    for (const auto& r : subrisks) s += r.mu;
    return s;
}

double PortfolioSpec::total_sigma() const {
    double var = 0.0;
    const std::size_t m = subrisks.size();
    for (std::size_t i = 0; i < m; ++i) {
        var += subrisks[i].sigma * subrisks[i].sigma;
        if (rho) {
            for (std::size_t j = i + 1; j < m; ++j) {
                var += 2.0 * (*rho)(i, j) * subrisks[i].sigma * subrisks[j].sigma;
            }
        }
    }
    return std::sqrt(var);
}

std::vector<double> PortfolioSpec::true_variances() const {
    std::vector<double> v;
    for (const auto& r : subrisks) v.push_back(r.sigma * r.sigma);
    return v;
}

void ExperimentConfig::validate() const {
    if (alphas.empty()) {
        throw InvalidArgument("no confidence levels given");
    }
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0)) {
            throw InvalidArgument("confidence level " + std::to_string(a) + " outside (0, 1)");
        }
    }
    if (n_outer < kMinOuterReplicates) {
        throw InvalidArgument("n_outer must be >= " + std::to_string(kMinOuterReplicates));
    }
    if (n_inner < kMinInnerSamples) {
        throw InvalidArgument("n_inner must be >= " + std::to_string(kMinInnerSamples));
    }
    if (workers < 0) {
        throw InvalidArgument("workers must be >= 0");
    }
}

// ---------------------------------------------------------------------------

std::vector<Sample> generate_data(const PortfolioSpec& spec, const RngStream& stream) {
    spec.validate();
    const std::size_t m = spec.size();
    std::vector<Sample> data(m);
    if (!spec.rho) {
        for (std::size_t j = 0; j < m; ++j) {
            RngStream s = stream.substream(j);
            const auto& r = spec.subrisks[j];
            data[j].resize(static_cast<std::size_t>(r.n));
            for (double& x : data[j]) {
                x = r.mu + r.sigma * s.normal();
            }
        }
        return data;
    }

    // t = 0 is the most recent time point
    int horizon = 0;
    for (const auto& r : spec.subrisks) horizon = std::max(horizon, r.n);
    std::vector<std::vector<double>> z(m, std::vector<double>(static_cast<std::size_t>(horizon)));
    for (std::size_t k = 0; k < m; ++k) {
        RngStream s = stream.substream(k);
        for (double& v : z[k]) v = s.normal();
    }
    const CholeskyFactor factor = cholesky(spec.rho->matrix());
    const SquareMatrix& l = factor.lower();
    for (std::size_t j = 0; j < m; ++j) {
        const auto& r = spec.subrisks[j];
        data[j].resize(static_cast<std::size_t>(r.n));
        for (std::size_t t = 0; t < data[j].size(); ++t) {
            double mixed = 0.0;
            for (std::size_t k = 0; k <= j; ++k) {
                mixed += l(j, k) * z[k][t];
            }
            data[j][t] = r.mu + r.sigma * mixed;
        }
    }
    return data;
}

std::vector<ParamEstimate> estimate_all(const PortfolioSpec& spec, std::span<const Sample> data) {
    std::vector<ParamEstimate> ests;
    ests.reserve(data.size());
    for (const auto& d : data) {
        ests.push_back(estimate(d, spec.estimator_mode));
    }
    return ests;
}

namespace {

// Substream offsets inside one outer replicate.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kLossStream = 1;
constexpr std::uint64_t kInnerStream = 2;

bool is_aggregate(const PortfolioSpec& spec, const ExperimentConfig& config) {
    if (config.aggregation) return true;
    if (spec.size() > 1) {
        throw InvalidArgument("portfolios with more than one subrisk need an aggregation mode");
    }
    return false;
}

AggregationMode effective_mode(const PortfolioSpec& spec, const ExperimentConfig& config) {
    AggregationMode mode = *config.aggregation;
    mode.correlation = spec.rho ? Correlation::correlated : Correlation::independent;
    return mode;
}

std::optional<std::vector<double>> true_variances_for(const PortfolioSpec& spec,
                                                      const AggregationMode& mode) {
    if (mode.combine == Combine::sum_corrected && mode.weight_source == WeightSource::true_lambda) {
        return spec.true_variances();
    }
    return std::nullopt;
}

std::optional<std::span<const double>> as_span(const std::optional<std::vector<double>>& v) {
    if (!v) return std::nullopt;
    return std::span<const double>(*v);
}

// Per-replicate score for each alpha: indicator or conditional probability.
void score(const PortfolioSpec& spec, const ExperimentConfig& config, const RngStream& base,
           std::span<const double> rc, std::span<double> out) {
    if (config.exceedance == ExceedanceMode::draw_x) {
        RngStream loss_stream = base.substream(kLossStream);
        const double x = spec.total_mean() + spec.total_sigma() * loss_stream.normal();
        for (std::size_t a = 0; a < rc.size(); ++a) {
            out[a] = x <= rc[a] ? 1.0 : 0.0;
        }
    } else {
        const double mu = spec.total_mean();
        const double sigma = spec.total_sigma();
        for (std::size_t a = 0; a < rc.size(); ++a) {
            out[a] = normal_cdf((rc[a] - mu) / sigma);
        }
    }
}

std::vector<SolvencyResult> reduce(const ExperimentConfig& config,
                                   const std::vector<double>& scores) {
    const std::size_t n_alpha = config.alphas.size();
    const auto n = static_cast<std::size_t>(config.n_outer);
    std::vector<SolvencyResult> results;
    for (std::size_t a = 0; a < n_alpha; ++a) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += scores[i * n_alpha + a];
        const double p = sum / static_cast<double>(n);
        double se;
        if (config.exceedance == ExceedanceMode::draw_x) {
            se = std::sqrt(p * (1.0 - p) / static_cast<double>(n));
        } else {
            double ss = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double d = scores[i * n_alpha + a] - p;
                ss += d * d;
            }
            se = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
        }
        results.push_back({config.alphas[a], p, se, config.n_outer, config.n_inner, config.seed,
                           config.exceedance});
    }
    return results;
}

std::vector<double> risk_capital_kernel(const PortfolioSpec& spec, const ExperimentConfig& config,
                                        const RngStream& base, std::vector<double>& samples) {
    const std::vector<Sample> data = generate_data(spec, base.substream(kDataStream));
    const std::vector<ParamEstimate> ests = estimate_all(spec, data);
    const RngStream inner = base.substream(kInnerStream);
    samples.resize(static_cast<std::size_t>(config.n_inner));
    if (is_aggregate(spec, config)) {
        const AggregationMode mode = effective_mode(spec, config);
        const auto true_s2 = true_variances_for(spec, mode);
        AggregateModel model(ests, config.method, mode, as_span(true_s2), spec.rho);
        aggregate_samples(model, inner, samples);
    } else {
        modelled_samples(SubriskModel(ests[0], config.method), inner, samples);
    }
    return empirical_quantiles_inplace(samples, config.alphas);
}

}  // namespace

void check_experiment(const PortfolioSpec& spec, const ExperimentConfig& config) {
    spec.validate();
    config.validate();
    if (!is_aggregate(spec, config)) return;
    const AggregationMode mode = effective_mode(spec, config);
    if (mode.combine == Combine::sum_corrected && config.method != Method::plugin) {
        if (config.method != Method::inversion) {
            throw Unsupported("sum-corrected aggregation is defined for inversion subrisks only");
        }
        if (spec.estimator_mode == EstimatorMode::known_mean_mle) {
            throw Unsupported("sum-corrected aggregation requires estimated means");
        }
        if (spec.rho) {
            const std::size_t m = spec.size();
            for (std::size_t i = 0; i < m; ++i) {
                for (std::size_t j = 0; j < m; ++j) {
                    if ((*spec.rho)(i, j) < 0.0) {
                        throw Unsupported("unsupported-negative-correlation: rho(" +
                                          std::to_string(i) + "," + std::to_string(j) + ") < 0");
                    }
                }
            }
        }
    }
    if (spec.rho && config.method != Method::plugin &&
        spec.estimator_mode != EstimatorMode::known_mean_mle) {
        std::vector<int> ns;
        for (const auto& r : spec.subrisks) ns.push_back(r.n);
        (void)adjusted_zeta_correlation(*spec.rho, ns);
    }
}

std::vector<double> replicate_risk_capital(const PortfolioSpec& spec,
                                           const ExperimentConfig& config,
                                           std::uint64_t replicate) {
    spec.validate();
    config.validate();
    std::vector<double> samples;
    return risk_capital_kernel(spec, config, RngStream(config.seed, replicate), samples);
}

std::vector<SolvencyResult> solvency_probabilities(const PortfolioSpec& spec,
                                                   const ExperimentConfig& config) {
    check_experiment(spec, config);

    const std::size_t n_alpha = config.alphas.size();
    const int n_outer = config.n_outer;
    std::vector<double> scores(static_cast<std::size_t>(n_outer) * n_alpha);
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_outer));

    const int threads = config.workers > 0 ? config.workers : omp_get_max_threads();
#pragma omp parallel num_threads(threads)
    {
        std::vector<double> samples;
#pragma omp for schedule(dynamic, 8)
        for (int i = 0; i < n_outer; ++i) {
            try {
                const RngStream base(config.seed, static_cast<std::uint64_t>(i));
                const std::vector<double> rc = risk_capital_kernel(spec, config, base, samples);
                score(spec, config, base, rc,
                      std::span<double>(scores).subspan(static_cast<std::size_t>(i) * n_alpha,
                                                        n_alpha));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    // first failing replicate, independent of scheduling
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
    return reduce(config, scores);
}

std::vector<SolvencyResult> solvency_probabilities_reference(const PortfolioSpec& spec,
                                                             const ExperimentConfig& config) {
    check_experiment(spec, config);
    const bool aggregate = is_aggregate(spec, config);
    const std::size_t n_alpha = config.alphas.size();
    std::vector<double> scores(static_cast<std::size_t>(config.n_outer) * n_alpha);

    for (int i = 0; i < config.n_outer; ++i) {
        const RngStream base(config.seed, static_cast<std::uint64_t>(i));
        std::vector<double> rc(n_alpha);
        for (std::size_t a = 0; a < n_alpha; ++a) {
            const auto data = generate_data(spec, base.substream(kDataStream));
            const auto ests = estimate_all(spec, data);
            const RngStream inner = base.substream(kInnerStream);
            if (aggregate) {
                const AggregationMode mode = effective_mode(spec, config);
                const auto true_s2 = true_variances_for(spec, mode);
                rc[a] = rc_overall(ests, config.method, mode, config.alphas[a], config.n_inner,
                                   inner, as_span(true_s2), spec.rho);
            } else {
                rc[a] = rc_single(ests[0], config.method, config.alphas[a], config.n_inner, inner);
            }
        }
        score(spec, config, base, rc,
              std::span<double>(scores).subspan(static_cast<std::size_t>(i) * n_alpha, n_alpha));
    }
    return reduce(config, scores);
}

SolvencyResult solvency_probability(const PortfolioSpec& spec, const ExperimentConfig& config,
                                    double alpha) {
    ExperimentConfig single = config;
    single.alphas = {alpha};
    return solvency_probabilities(spec, single).front();
}

}  // namespace parunc
