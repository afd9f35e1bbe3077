#include "parunc/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "parunc/errors.hpp"

namespace parunc {

Weights Weights::independent(std::vector<double> values) {
    const std::size_t m = values.size();
    return Weights(m, false, std::move(values));
}

Weights Weights::correlated(std::size_t dim, std::vector<double> values) {
    if (values.size() != dim * dim) {
        throw InvalidArgument("Weights::correlated: expected dim*dim values");
    }
    return Weights(dim, true, std::move(values));
}

double Weights::total() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

std::string_view to_string(Combine c) {
    return c == Combine::sum_corrected ? "sum-corrected" : "sum-uncorrected";
}
std::string_view to_string(WeightSource w) {
    return w == WeightSource::true_lambda ? "true-lambda" : "estimated-lambda";
}
std::string_view to_string(Correlation c) {
    return c == Correlation::correlated ? "correlated" : "independent";
}

Combine parse_combine(std::string_view text) {
    if (text == "sum-corrected") return Combine::sum_corrected;
    if (text == "sum-uncorrected") return Combine::sum_uncorrected;
    throw InvalidArgument("unknown aggregation '" + std::string(text) + "'");
}

WeightSource parse_weight_source(std::string_view text) {
    if (text == "true-lambda") return WeightSource::true_lambda;
    if (text == "estimated-lambda") return WeightSource::estimated_lambda;
    throw InvalidArgument("unknown weight source '" + std::string(text) + "'");
}

Weights compute_weights(std::span<const double> sigma2, std::span<const int> n) {
    if (sigma2.size() != n.size() || sigma2.empty()) {
        throw InvalidArgument("compute_weights: sigma2 and n must be non-empty and equal length");
    }
    std::vector<double> raw(sigma2.size());
    double total = 0.0;
    for (std::size_t j = 0; j < sigma2.size(); ++j) {
        if (!(sigma2[j] >= 0.0) || n[j] < 1) {
            throw InvalidArgument("compute_weights: need sigma2 >= 0 and n >= 1");
        }
        raw[j] = sigma2[j] * (n[j] + 1.0) / n[j];
        total += raw[j];
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("compute_weights: all variances are zero");
    }
    for (double& w : raw) {
        w /= total;
    }
    return Weights::independent(std::move(raw));
}

Weights compute_weights_correlated(std::span<const double> sigma, std::span<const int> n,
                                   const CorrelationMatrix& rho) {
    const std::size_t m = sigma.size();
    if (n.size() != m || rho.dim() != m || m == 0) {
        throw InvalidArgument("compute_weights_correlated: dimension mismatch");
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (!(sigma[j] >= 0.0) || n[j] < 1) {
            throw InvalidArgument("compute_weights_correlated: need sigma >= 0 and n >= 1");
        }
    }
    std::vector<double> raw(m * m);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (rho(i, j) < 0.0) {
                throw Unsupported("unsupported-negative-correlation: rho(" + std::to_string(i) +
                                  "," + std::to_string(j) + ") < 0");
            }
            const double overlap =
                static_cast<double>(std::min(n[i], n[j])) / (static_cast<double>(n[i]) * n[j]);
            raw[i * m + j] = rho(i, j) * sigma[i] * sigma[j] * (1.0 + overlap);
            total += raw[i * m + j];
        }
    }
    if (!(total > 0.0)) {
        throw InvalidArgument("compute_weights_correlated: zero denominator");
    }
    for (double& w : raw) {
        w /= total;
    }
    return Weights::correlated(m, std::move(raw));
}

CorrelationMatrix adjusted_zeta_correlation(const CorrelationMatrix& rho, std::span<const int> n) {
    const std::size_t m = rho.dim();
    if (n.size() != m) {
        throw InvalidArgument("adjusted_zeta_correlation: dimension mismatch");
    }
    SquareMatrix adj(m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i == j) {
                adj(i, j) = 1.0;
                continue;
            }
            adj(i, j) = rho(i, j) * std::min(n[i], n[j]) /
                        std::sqrt(static_cast<double>(n[i]) * static_cast<double>(n[j]));
        }
    }
    return CorrelationMatrix(std::move(adj));
}

double correction_factor(const Weights& lambda, const Weights& lambda_hat,
                         std::span<const double> m_primes) {
    const std::size_t m = m_primes.size();
    if (lambda.dim() != m || lambda_hat.dim() != m ||
        lambda.is_correlated() != lambda_hat.is_correlated()) {
        throw InvalidArgument("correction_factor: weight/pivot dimension mismatch");
    }
    for (double mp : m_primes) {
        if (!(mp > 0.0)) {
            throw InvalidArgument("correction_factor: m_prime must be positive");
        }
    }
    if (m == 1) {
        return 1.0;
    }
    const bool constant_pivot =
        std::all_of(m_primes.begin(), m_primes.end(), [&](double v) { return v == m_primes[0]; });
    if (constant_pivot && std::ranges::equal(lambda.values(), lambda_hat.values())) {
        return 1.0;
    }

    double hat_term = 0.0;
    double true_term = 0.0;
    if (!lambda.is_correlated()) {
        for (std::size_t j = 0; j < m; ++j) {
            hat_term += lambda_hat[j] / m_primes[j];
            true_term += lambda[j] * m_primes[j];
        }
    } else {
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                const double root = std::sqrt(m_primes[i] * m_primes[j]);
                hat_term += lambda_hat(i, j) / root;
                true_term += lambda(i, j) * root;
            }
        }
    }
    const double radicand = hat_term * true_term;
    if (!(radicand > 0.0) || !std::isfinite(radicand)) {
        throw NumericDomainError("correction_factor: non-positive radicand");
    }
    return 1.0 / std::sqrt(radicand);
}

double modelled_overall_sample(std::span<const double> mu_hats,
                               std::span<const double> subrisk_samples, double a) {
    if (mu_hats.size() != subrisk_samples.size() || mu_hats.empty()) {
        throw InvalidArgument("modelled_overall_sample: length mismatch");
    }
    double mu_sum = mu_hats[0];
    double y_sum = subrisk_samples[0];
    for (std::size_t j = 1; j < mu_hats.size(); ++j) {
        mu_sum += mu_hats[j];
        y_sum += subrisk_samples[j];
    }
    if (a == 1.0) {
        return y_sum;
    }
    return (1.0 - a) * mu_sum + a * y_sum;
}

// ---------------------------------------------------------------------------

AggregateModel::AggregateModel(std::span<const ParamEstimate> ests, Method method,
                               const AggregationMode& mode,
                               std::optional<std::span<const double>> true_sigma2,
                               const std::optional<CorrelationMatrix>& rho)
    : method_(method), mode_(mode) {
    const std::size_t m = ests.size();
    if (m == 0) {
        throw InvalidArgument("AggregateModel: no subrisks");
    }
    const bool correlated = mode.correlation == Correlation::correlated;
    if (correlated != rho.has_value()) {
        throw InvalidArgument("AggregateModel: correlation matrix required iff correlated mode");
    }
    if (rho && rho->dim() != m) {
        throw InvalidArgument("AggregateModel: correlation matrix dimension mismatch");
    }
    const bool need_true = mode.combine == Combine::sum_corrected &&
                           mode.weight_source == WeightSource::true_lambda;
    if (need_true != true_sigma2.has_value()) {
        throw InvalidArgument("AggregateModel: true variances required iff true-lambda weights");
    }
    if (true_sigma2 && true_sigma2->size() != m) {
        throw InvalidArgument("AggregateModel: true variance list length mismatch");
    }

    const EstimatorMode est_mode = ests[0].mode;
    std::vector<int> ns;
    std::vector<double> sigma2_hat;
    for (const auto& e : ests) {
        if (e.mode != est_mode) {
            throw InvalidArgument("AggregateModel: subrisks mix estimator modes");
        }
        subrisks_.emplace_back(e, method);
        mu_hats_.push_back(e.mu_hat);
        ns.push_back(e.n);
        sigma2_hat.push_back(e.sigma2_hat);
    }
    uses_zeta_ = subrisks_[0].uses_zeta();

    if (mode.combine == Combine::sum_corrected && method != Method::plugin) {
        if (method != Method::inversion) {
            throw Unsupported("sum-corrected aggregation is defined for inversion subrisks only");
        }
        if (est_mode == EstimatorMode::known_mean_mle) {
            throw Unsupported("sum-corrected aggregation requires estimated means");
        }
        const std::vector<double> true_s2 =
            true_sigma2 ? std::vector<double>(true_sigma2->begin(), true_sigma2->end())
                        : sigma2_hat;
        if (correlated) {
            auto roots = [](const std::vector<double>& v) {
                std::vector<double> r(v.size());
                std::transform(v.begin(), v.end(), r.begin(), [](double x) { return std::sqrt(x); });
                return r;
            };
            lambda_hat_ = compute_weights_correlated(roots(sigma2_hat), ns, *rho);
            lambda_ = compute_weights_correlated(roots(true_s2), ns, *rho);
        } else {
            lambda_hat_ = compute_weights(sigma2_hat, ns);
            lambda_ = compute_weights(true_s2, ns);
        }
    }

    if (correlated) {
        z_factor_ = cholesky(rho->matrix());
        if (uses_zeta_) {
            zeta_factor_ = cholesky(adjusted_zeta_correlation(*rho, ns).matrix());
        }
    }

    m_primes_.assign(m, 1.0);
    zetas_.assign(m, 0.0);
    zs_.assign(m, 0.0);
    ys_.assign(m, 0.0);
}

double AggregateModel::draw(PivotStreams& streams) {
    const std::size_t m = dim();
    for (std::size_t j = 0; j < m; ++j) {
        if (subrisks_[j].uses_m_prime()) {
            m_primes_[j] = subrisks_[j].draw_m_prime(streams);
        }
    }
    if (uses_zeta_) {
        if (zeta_factor_) {
            correlated_normals(*zeta_factor_, streams.zeta, zetas_);
        } else {
            for (auto& v : zetas_) v = streams.zeta.normal();
        }
    }
    if (z_factor_) {
        correlated_normals(*z_factor_, streams.z, zs_);
    } else {
        for (auto& v : zs_) v = streams.z.normal();
    }
    for (std::size_t j = 0; j < m; ++j) {
        const PivotDraw pivot{zetas_[j], m_primes_[j], zs_[j]};
        const ModelledParams params =
            draw_modelled_params(subrisks_[j].estimate(), method_, pivot);
        ys_[j] = modelled_subrisk_sample(params, pivot.z_prime);
    }
    double a = 1.0;
    if (lambda_) {
        a = correction_factor(*lambda_, *lambda_hat_, m_primes_);
    }
    return modelled_overall_sample(mu_hats_, ys_, a);
}

void aggregate_samples(AggregateModel& model, const RngStream& stream, std::span<double> out) {
    PivotStreams streams(stream);
    for (double& y : out) {
        y = model.draw(streams);
    }
}

double rc_overall(std::span<const ParamEstimate> ests, Method method, const AggregationMode& mode,
                  double alpha, int n_inner, const RngStream& stream,
                  std::optional<std::span<const double>> true_sigma2,
                  const std::optional<CorrelationMatrix>& rho) {
    if (n_inner < kMinInnerSamples) {
        throw InvalidArgument("rc_overall: n_inner must be >= " + std::to_string(kMinInnerSamples));
    }
    AggregateModel model(ests, method, mode, true_sigma2, rho);
    std::vector<double> samples(static_cast<std::size_t>(n_inner));
    aggregate_samples(model, stream, samples);
    return empirical_quantile(samples, alpha);
}

}  // namespace parunc
