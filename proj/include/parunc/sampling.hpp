#pragma once

// Random variate generation and quantile utilities shared by every module.
//
// Every random quantity in the library is drawn from an RngStream keyed by
// (seed, stream_id). Outer Monte Carlo replicates own one stream each and
// derive fixed substreams from it, so results never depend on scheduling.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace parunc {

class RngStream {
public:
    using result_type = std::uint64_t;

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    // Independent child stream; the same offset always yields the same child.
    RngStream substream(std::uint64_t offset) const;

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    // xoshiro256++ step.
    result_type operator()() noexcept {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal();

private:
    RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t key);
    void init_state(std::uint64_t key) noexcept;

    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t key_;
    std::array<std::uint64_t, 4> state_{};
};

double std_normal(RngStream& stream);

// Draws C / divisor with C ~ chi-square(df). Constants of the gamma
// rejection sampler are computed once so the object can sit in a hot loop.
class ScaledChiSquare {
public:
    ScaledChiSquare(int df, int divisor);

    double operator()(RngStream& stream) const;

    int df() const noexcept { return df_; }
    int divisor() const noexcept { return divisor_; }

private:
    int df_;
    int divisor_;
    bool boost_shape_;  // shape < 1: sample shape + 1 and rescale
    double inv_shape_;
    double d_;
    double c_;
    double scale_;
};

double scaled_chi_square(int df, int divisor, RngStream& stream);

// Dense row-major square matrix.
class SquareMatrix {
public:
    SquareMatrix() = default;
    explicit SquareMatrix(std::size_t dim, double fill = 0.0);
    SquareMatrix(std::size_t dim, std::vector<double> row_major);

    static SquareMatrix identity(std::size_t dim);

    std::size_t dim() const noexcept { return dim_; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * dim_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * dim_ + j]; }
    std::span<const double> data() const noexcept { return data_; }

    double norm_inf() const;
    bool operator==(const SquareMatrix&) const = default;

private:
    std::size_t dim_ = 0;
    std::vector<double> data_;
};

// Symmetric, unit diagonal, entries in [-1, 1], positive semidefinite.
// Construction validates all of these and throws InvalidArgument or
// NotPsdError.
class CorrelationMatrix {
public:
    explicit CorrelationMatrix(SquareMatrix entries);

    static CorrelationMatrix identity(std::size_t dim);

    std::size_t dim() const noexcept { return entries_.dim(); }
    double operator()(std::size_t i, std::size_t j) const { return entries_(i, j); }
    const SquareMatrix& matrix() const noexcept { return entries_; }

    bool is_identity() const;

private:
    SquareMatrix entries_;
};

class CholeskyFactor {
public:
    const SquareMatrix& lower() const noexcept { return lower_; }
    std::size_t dim() const noexcept { return lower_.dim(); }

    // out = L * z
    void apply(std::span<const double> z, std::span<double> out) const;

private:
    friend CholeskyFactor cholesky(const SquareMatrix& matrix);
    explicit CholeskyFactor(SquareMatrix lower) : lower_(std::move(lower)) {}

    SquareMatrix lower_;
};

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPsdTolerance = 1e-12;

// Pivots in [-kPsdTolerance, 0] are clamped to zero; anything lower is rejected.
CholeskyFactor cholesky(const SquareMatrix& matrix);

// Fills out (size = factor.dim()) with L * z, z i.i.d. standard normal.
void correlated_normals(const CholeskyFactor& factor, RngStream& stream, std::span<double> out);
std::vector<double> correlated_normals(const CholeskyFactor& factor, RngStream& stream);

// 1-based rank of the ceil(alpha * n)-th order statistic.
std::size_t quantile_rank(std::size_t n, double alpha);

// Lower empirical quantile: the ceil(alpha * N)-th ascending order statistic.
double empirical_quantile(std::span<const double> samples, double alpha);

// Same convention for an ascending alpha grid, permuting `samples` in place.
// Each returned quantile is read from one partially ordered array, so the
// result is non-decreasing in alpha.
std::vector<double> empirical_quantiles_inplace(std::span<double> samples,
                                                std::span<const double> alphas);

}  // namespace parunc
