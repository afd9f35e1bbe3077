#pragma once

// Command implementations behind the `parunc` executable. Standard output
// carries CSV only; progress and diagnostics go to the error stream.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "parunc/harness.hpp"
#include "parunc/tables.hpp"

namespace parunc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumericDomain = 3;

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

struct RunConfig {
    PortfolioSpec spec;
    ExperimentConfig experiment;
    std::vector<Method> methods{Method::inversion};
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> n_outer;
    std::optional<int> n_inner;
    std::optional<int> workers;
    std::optional<ExceedanceMode> exceedance;
};

// Seed from PARUNC_SEED, if set and parseable.
std::optional<std::uint64_t> env_seed();

// Precedence: overrides > document > env_seed > defaults. Throws ConfigError
// listing every problem found, or NotPsdError when rho (or the derived mean
// pivot correlation) has no Cholesky factor. Nothing is sampled before this returns.
RunConfig parse_run_config(const nlohmann::json& doc, const RunOverrides& overrides,
                           std::optional<std::uint64_t> fallback_seed = std::nullopt);

std::string format_probability(double p);

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err);

int cmd_table(TableId id, const TableOverrides& overrides, std::ostream& out, std::ostream& err);

int cmd_oracle_check(std::ostream& out, std::ostream& err);

}  // namespace parunc::cli
