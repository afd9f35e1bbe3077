#pragma once

// Reproduction runners for the three published solvency tables.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "parunc/harness.hpp"

namespace parunc {

enum class TableId { table1, table2, table3 };

TableId parse_table_id(std::string_view text);
std::string_view to_string(TableId id);

struct TableOverrides {
    std::optional<int> n_outer;
    std::optional<int> n_inner;
    std::optional<std::uint64_t> seed;
    std::optional<ExceedanceMode> exceedance;
    std::optional<int> workers;
    // table3 only: "n10n10", "n5n10" or "n10n20"
    std::optional<std::string> block;
};

struct TableRow {
    std::string table;
    int row_id = 0;
    std::vector<double> sigma;
    std::vector<int> n;
    double alpha = 0.0;
    std::string method;
    SolvencyResult result;
    double reference_value = 0.0;  // probability, not percent
    double min_tolerance = 0.0;
    double tolerance = 0.0;
    double abs_diff = 0.0;
    bool pass = false;
};

// Assumed Monte Carlo noise of a published value: 10,000 outer replicates.
inline constexpr double kReferenceReplicates = 10000.0;

// max(min_tolerance, 4 * sqrt(se^2 + p(1-p)/10^4))
double table_tolerance(double min_tolerance, double std_err, double reference_value);

using ProgressFn = std::function<void(std::string_view)>;

// Rows come back in published order. Configurations sharing an alpha grid
// are run once.
std::vector<TableRow> run_table(TableId id, const TableOverrides& overrides,
                                const ProgressFn& progress = {});

// Portfolio/config pairs behind each table, exposed for tests and benchmarks.
struct TableCase {
    PortfolioSpec spec;
    ExperimentConfig config;
    std::string method_label;
    std::vector<int> row_ids;
    std::vector<double> reference_values;
    std::vector<double> min_tolerances;
};
std::vector<TableCase> table_cases(TableId id, const TableOverrides& overrides);

}  // namespace parunc
