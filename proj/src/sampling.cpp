#include "parunc/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <boost/random/normal_distribution.hpp>

#include "parunc/errors.hpp"

namespace parunc {

namespace {

constexpr std::uint64_t splitmix64(std::uint64_t& x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
    std::uint64_t s = a ^ (b * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL);
    std::uint64_t h = splitmix64(s);
    return h ^ splitmix64(s);
}

}  // namespace

NotPsdError::NotPsdError(std::size_t pivot_index, double pivot_value)
    : std::domain_error("matrix is not positive semidefinite: pivot " +
                        std::to_string(pivot_index) + " is " + std::to_string(pivot_value)),
      pivot_index_(pivot_index),
      pivot_value_(pivot_value) {}

// ---------------------------------------------------------------------------
// RngStream

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : RngStream(seed, stream_id, mix(mix(seed, 0x5eedULL), stream_id)) {}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t key)
    : seed_(seed), stream_id_(stream_id), key_(key) {
    init_state(key);
}

void RngStream::init_state(std::uint64_t key) noexcept {
    std::uint64_t x = key;
    for (auto& word : state_) {
        word = splitmix64(x);
    }
    // xoshiro's only forbidden state; unreachable in practice
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 1;
    }
}

RngStream RngStream::substream(std::uint64_t offset) const {
    return RngStream(seed_, stream_id_, mix(key_, offset + 1));
}

double RngStream::normal() {
    // Ziggurat; the distribution object is stateless.
    boost::random::normal_distribution<double> dist;
    return dist(*this);
}

double std_normal(RngStream& stream) { return stream.normal(); }

// ---------------------------------------------------------------------------
// Chi-square via Marsaglia-Tsang gamma(shape = df / 2, scale = 2)

ScaledChiSquare::ScaledChiSquare(int df, int divisor) : df_(df), divisor_(divisor) {
    if (df < 1) {
        throw InvalidArgument("scaled_chi_square: df must be >= 1, got " + std::to_string(df));
    }
    if (divisor < 1) {
        throw InvalidArgument("scaled_chi_square: divisor must be >= 1, got " +
                              std::to_string(divisor));
    }
    const double shape = 0.5 * df;
    boost_shape_ = shape < 1.0;
    inv_shape_ = 1.0 / shape;
    const double a = boost_shape_ ? shape + 1.0 : shape;
    d_ = a - 1.0 / 3.0;
    c_ = 1.0 / std::sqrt(9.0 * d_);
    scale_ = 2.0 / divisor;
}

double ScaledChiSquare::operator()(RngStream& stream) const {
    double g;
    for (;;) {
        double x;
        double v;
        do {
            x = stream.normal();
            v = 1.0 + c_ * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = stream.uniform();
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) {
            g = d_ * v;
            break;
        }
        if (std::log(u) < 0.5 * x2 + d_ * (1.0 - v + std::log(v))) {
            g = d_ * v;
            break;
        }
    }
    if (boost_shape_) {
        g *= std::pow(stream.uniform(), inv_shape_);
    }
    return g * scale_;
}

double scaled_chi_square(int df, int divisor, RngStream& stream) {
    return ScaledChiSquare(df, divisor)(stream);
}

// ---------------------------------------------------------------------------
// Matrices

SquareMatrix::SquareMatrix(std::size_t dim, double fill) : dim_(dim), data_(dim * dim, fill) {}

SquareMatrix::SquareMatrix(std::size_t dim, std::vector<double> row_major)
    : dim_(dim), data_(std::move(row_major)) {
    if (data_.size() != dim * dim) {
        throw InvalidArgument("matrix data has " + std::to_string(data_.size()) +
                              " entries, expected " + std::to_string(dim * dim));
    }
}

SquareMatrix SquareMatrix::identity(std::size_t dim) {
    SquareMatrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

double SquareMatrix::norm_inf() const {
    double best = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) {
            row += std::abs((*this)(i, j));
        }
        best = std::max(best, row);
    }
    return best;
}

CorrelationMatrix::CorrelationMatrix(SquareMatrix entries) : entries_(std::move(entries)) {
    const std::size_t m = entries_.dim();
    if (m == 0) {
        throw InvalidArgument("correlation matrix must have dimension >= 1");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (entries_(i, i) != 1.0) {
            throw InvalidArgument("correlation matrix diagonal entry " + std::to_string(i) +
                                  " is not 1");
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double v = entries_(i, j);
            if (!std::isfinite(v) || v < -1.0 || v > 1.0) {
                throw InvalidArgument("correlation entry (" + std::to_string(i) + "," +
                                      std::to_string(j) + ") outside [-1, 1]");
            }
        }
    }
    // symmetry and PSD
    (void)cholesky(entries_);
}

CorrelationMatrix CorrelationMatrix::identity(std::size_t dim) {
    return CorrelationMatrix(SquareMatrix::identity(dim));
}

bool CorrelationMatrix::is_identity() const {
    return entries_ == SquareMatrix::identity(dim());
}

CholeskyFactor cholesky(const SquareMatrix& a) {
    const std::size_t m = a.dim();
    if (m == 0) {
        throw InvalidArgument("cholesky: empty matrix");
    }
    const double scale = std::max(1.0, a.norm_inf());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (std::abs(a(i, j) - a(j, i)) > kSymmetryTolerance * scale) {
                throw InvalidArgument("cholesky: matrix is not symmetric at (" +
                                      std::to_string(i) + "," + std::to_string(j) + ")");
            }
        }
    }

    SquareMatrix l(m);
    for (std::size_t j = 0; j < m; ++j) {
        double pivot = a(j, j);
        for (std::size_t k = 0; k < j; ++k) {
            pivot -= l(j, k) * l(j, k);
        }
        if (pivot < -kPsdTolerance) {
            throw NotPsdError(j, pivot);
        }
        const double diag = pivot > 0.0 ? std::sqrt(pivot) : 0.0;
        l(j, j) = diag;
        for (std::size_t i = j + 1; i < m; ++i) {
            double s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) {
                s -= l(i, k) * l(j, k);
            }
            if (diag > 0.0) {
                l(i, j) = s / diag;
            } else if (std::abs(s) > kPsdTolerance) {
                // zero pivot with a non-zero coupling: no real factor exists
                throw NotPsdError(j, pivot);
            }
        }
    }
    return CholeskyFactor(std::move(l));
}

void CholeskyFactor::apply(std::span<const double> z, std::span<double> out) const {
    const std::size_t m = dim();
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k <= i; ++k) {
            s += lower_(i, k) * z[k];
        }
        out[i] = s;
    }
}

void correlated_normals(const CholeskyFactor& factor, RngStream& stream, std::span<double> out) {
    const std::size_t m = factor.dim();
    if (out.size() != m) {
        throw InvalidArgument("correlated_normals: output size mismatch");
    }
    // m <= a handful in practice; avoid heap traffic in the inner loop
    constexpr std::size_t kStack = 16;
    double stack_buf[kStack];
    std::vector<double> heap_buf;
    std::span<double> z;
    if (m <= kStack) {
        z = std::span<double>(stack_buf, m);
    } else {
        heap_buf.resize(m);
        z = heap_buf;
    }
    for (auto& v : z) {
        v = stream.normal();
    }
    factor.apply(z, out);
}

std::vector<double> correlated_normals(const CholeskyFactor& factor, RngStream& stream) {
    std::vector<double> out(factor.dim());
    correlated_normals(factor, stream, out);
    return out;
}

// ---------------------------------------------------------------------------
// Quantiles

std::size_t quantile_rank(std::size_t n, double alpha) {
    if (n == 0) {
        throw InvalidArgument("empirical_quantile: empty sample");
    }
    if (!(alpha > 0.0 && alpha < 1.0)) {
        throw InvalidArgument("empirical_quantile: alpha must lie in (0, 1)");
    }
    // absorb representation error in alpha * n (e.g. 0.9 * 100)
    const double scaled = alpha * static_cast<double>(n);
    auto rank = static_cast<std::size_t>(std::ceil(scaled - 1e-9 * std::max(1.0, scaled)));
    return std::clamp<std::size_t>(rank, 1, n);
}

double empirical_quantile(std::span<const double> samples, double alpha) {
    const std::size_t k = quantile_rank(samples.size(), alpha);
    std::vector<double> work(samples.begin(), samples.end());
    std::nth_element(work.begin(), work.begin() + static_cast<std::ptrdiff_t>(k - 1), work.end());
    return work[k - 1];
}

std::vector<double> empirical_quantiles_inplace(std::span<double> samples,
                                                std::span<const double> alphas) {
    const std::size_t n = samples.size();
    std::vector<std::size_t> order(alphas.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<std::size_t> ranks(alphas.size());
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        ranks[i] = quantile_rank(n, alphas[i]);
    }
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ranks[a] < ranks[b]; });

    std::vector<double> out(alphas.size());
    auto first = samples.begin();
    for (std::size_t idx : order) {
        auto target = samples.begin() + static_cast<std::ptrdiff_t>(ranks[idx] - 1);
        if (target >= first) {
            std::nth_element(first, target, samples.end());
            first = target;
        }
        out[idx] = *target;
    }
    return out;
}

}  // namespace parunc
