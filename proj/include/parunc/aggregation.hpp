#pragma once

// Modelled overall risk built from per-subrisk modelled risks.
//
// The corrected model rescales the sum of inversion-modelled subrisks by a
// stochastic factor a_sim around the sum of estimated means:
//     Y_mod = (1 - a_sim) * sum(mu_hat) + a_sim * sum(Y_j).
// a_sim is evaluated on the same pivot draw (M'_j) that produced the Y_j.

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parunc/estimation.hpp"
#include "parunc/pu_methods.hpp"
#include "parunc/sampling.hpp"

namespace parunc {

// Variance-proportional mixing weights. Independent mode holds m values,
// correlated mode an m x m row-major matrix.
class Weights {
public:
    static Weights independent(std::vector<double> values);
    static Weights correlated(std::size_t dim, std::vector<double> values);

    std::size_t dim() const noexcept { return dim_; }
    bool is_correlated() const noexcept { return correlated_; }
    std::span<const double> values() const noexcept { return values_; }

    double operator[](std::size_t j) const { return values_[j]; }
    double operator()(std::size_t i, std::size_t j) const { return values_[i * dim_ + j]; }

    double total() const;

private:
    Weights(std::size_t dim, bool correlated, std::vector<double> values)
        : dim_(dim), correlated_(correlated), values_(std::move(values)) {}

    std::size_t dim_;
    bool correlated_;
    std::vector<double> values_;
};

enum class Combine { sum_uncorrected, sum_corrected };
enum class WeightSource { true_lambda, estimated_lambda };
enum class Correlation { independent, correlated };

struct AggregationMode {
    Combine combine = Combine::sum_corrected;
    WeightSource weight_source = WeightSource::estimated_lambda;
    Correlation correlation = Correlation::independent;

    bool operator==(const AggregationMode&) const = default;
};

std::string_view to_string(Combine c);
std::string_view to_string(WeightSource w);
std::string_view to_string(Correlation c);
Combine parse_combine(std::string_view text);
WeightSource parse_weight_source(std::string_view text);

// lambda_j = sigma2_j (n_j + 1)/n_j / sum_k sigma2_k (n_k + 1)/n_k
Weights compute_weights(std::span<const double> sigma2, std::span<const int> n);

// lambda_ij = rho_ij s_i s_j (1 + min(n_i, n_j)/(n_i n_j)), normalized to sum 1.
// Negative correlations are rejected with Unsupported.
Weights compute_weights_correlated(std::span<const double> sigma, std::span<const int> n,
                                   const CorrelationMatrix& rho);

// Correlation of the mean pivots zeta'_j: rho_ij * min(n_i, n_j) / sqrt(n_i n_j).
// Throws NotPsdError when the adjusted matrix has no Cholesky factor.
CorrelationMatrix adjusted_zeta_correlation(const CorrelationMatrix& rho, std::span<const int> n);

// a_sim = (sum lh_j / M'_j * sum l_j M'_j)^(-1/2), or the sqrt(M'_i M'_j)
// form for correlated weights. Exactly 1 for m = 1 and for a constant M'
// vector with lambda == lambda_hat.
double correction_factor(const Weights& lambda, const Weights& lambda_hat,
                         std::span<const double> m_primes);

double modelled_overall_sample(std::span<const double> mu_hats,
                               std::span<const double> subrisk_samples, double a);

// Everything a single data replicate needs to draw pathwise-coupled samples
// of the modelled overall risk.
class AggregateModel {
public:
    AggregateModel(std::span<const ParamEstimate> ests, Method method, const AggregationMode& mode,
                   std::optional<std::span<const double>> true_sigma2 = std::nullopt,
                   const std::optional<CorrelationMatrix>& rho = std::nullopt);

    std::size_t dim() const noexcept { return subrisks_.size(); }
    const AggregationMode& mode() const noexcept { return mode_; }
    const std::optional<Weights>& lambda() const noexcept { return lambda_; }
    const std::optional<Weights>& lambda_hat() const noexcept { return lambda_hat_; }

    // One coupled draw of (pivots, Y_j, a_sim) -> Y_mod (or sum Y_j).
    double draw(PivotStreams& streams);

private:
    std::vector<SubriskModel> subrisks_;
    std::vector<double> mu_hats_;
    Method method_;
    AggregationMode mode_;
    std::optional<Weights> lambda_;
    std::optional<Weights> lambda_hat_;
    std::optional<CholeskyFactor> z_factor_;
    std::optional<CholeskyFactor> zeta_factor_;
    bool uses_zeta_ = false;
    // per-draw scratch
    std::vector<double> m_primes_;
    std::vector<double> zetas_;
    std::vector<double> zs_;
    std::vector<double> ys_;
};

void aggregate_samples(AggregateModel& model, const RngStream& stream, std::span<double> out);

double rc_overall(std::span<const ParamEstimate> ests, Method method, const AggregationMode& mode,
                  double alpha, int n_inner, const RngStream& stream,
                  std::optional<std::span<const double>> true_sigma2 = std::nullopt,
                  const std::optional<CorrelationMatrix>& rho = std::nullopt);

}  // namespace parunc
