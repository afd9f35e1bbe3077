#pragma once

// Nested Monte Carlo measurement of the solvency probability P(X <= RC).
//
// Outer loop: replicate i draws a data set D_i from the true model, estimates
// parameters and computes RC_i from n_inner modelled-risk samples. The
// exceedance is scored either by one fresh loss X (draw-x) or by the exact
// conditional probability Phi((RC_i - mu_sum) / sigma_sum) (conditional-cdf).
//
// Replicate i uses RngStream(seed, i) exclusively, so results are identical
// for every worker count.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "parunc/aggregation.hpp"
#include "parunc/estimation.hpp"
#include "parunc/pu_methods.hpp"
#include "parunc/sampling.hpp"

namespace parunc {

enum class MeanMode { known_zero, estimated };
enum class ExceedanceMode { draw_x, conditional_cdf };

std::string_view to_string(MeanMode mode);
std::string_view to_string(ExceedanceMode mode);
MeanMode parse_mean_mode(std::string_view text);
ExceedanceMode parse_exceedance_mode(std::string_view text);

struct SubriskSpec {
    double mu = 0.0;
    double sigma = 1.0;
    int n = 10;
};

struct PortfolioSpec {
    std::vector<SubriskSpec> subrisks;
    std::optional<CorrelationMatrix> rho;
    MeanMode mean_mode = MeanMode::estimated;
    EstimatorMode estimator_mode = EstimatorMode::unbiased;

    // Throws InvalidArgument on: empty list, sigma <= 0, n < 2, non-zero mean
    // under known_zero, estimator/mean-mode mismatch, rho dimension mismatch.
    void validate() const;

    std::size_t size() const noexcept { return subrisks.size(); }
    double total_mean() const;
    // sqrt(sum sigma_j^2 + 2 sum_{i<j} rho_ij sigma_i sigma_j)
    double total_sigma() const;
    std::vector<double> true_variances() const;
};

struct ExperimentConfig {
    std::vector<double> alphas{0.90, 0.95, 0.99, 0.995};
    Method method = Method::inversion;
    std::optional<AggregationMode> aggregation;
    int n_outer = 20000;
    int n_inner = 10000;
    std::uint64_t seed = 42;
    ExceedanceMode exceedance = ExceedanceMode::conditional_cdf;
    int workers = 0;  // 0: OpenMP default; never affects results

    void validate() const;
};

inline constexpr int kMinOuterReplicates = 100;

struct SolvencyResult {
    double alpha = 0.0;
    double p_hat = 0.0;
    double std_err = 0.0;
    int n_outer = 0;
    int n_inner = 0;
    std::uint64_t seed = 0;
    ExceedanceMode exceedance = ExceedanceMode::conditional_cdf;
};

// Correlated mode uses a common time axis of length max n_j: time point t
// carries one joint normal vector and subrisk j observes the n_j most recent
// points. Subrisk j's standard normals come from stream.substream(j) in both
// modes, so an identity rho reproduces the independent data exactly.
std::vector<Sample> generate_data(const PortfolioSpec& spec, const RngStream& stream);

std::vector<ParamEstimate> estimate_all(const PortfolioSpec& spec, std::span<const Sample> data);

// Rejects method/aggregation/estimator combinations that cannot run, before
// any sampling happens (Unsupported, NotPsdError, InvalidArgument).
void check_experiment(const PortfolioSpec& spec, const ExperimentConfig& config);

// Parallel kernel over outer replicates; all alphas share each replicate's
// inner samples. Results are ordered like config.alphas.
std::vector<SolvencyResult> solvency_probabilities(const PortfolioSpec& spec,
                                                   const ExperimentConfig& config);

// Straight serial loop calling rc_single / rc_overall once per (replicate,
// alpha). Slow; kept as the reference the kernel must match bit for bit.
std::vector<SolvencyResult> solvency_probabilities_reference(const PortfolioSpec& spec,
                                                             const ExperimentConfig& config);

SolvencyResult solvency_probability(const PortfolioSpec& spec, const ExperimentConfig& config,
                                    double alpha);

// RC_i for every alpha of replicate i; exposed for equivariance checks.
std::vector<double> replicate_risk_capital(const PortfolioSpec& spec,
                                           const ExperimentConfig& config,
                                           std::uint64_t replicate);

double normal_cdf(double x);

}  // namespace parunc
