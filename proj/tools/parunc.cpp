// parunc: risk capital under parameter uncertainty, measured by nested Monte Carlo.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "parunc/cli.hpp"
#include "parunc/errors.hpp"

namespace {

template <typename T>
std::optional<T> if_set(const CLI::Option* opt, const T& value) {
    return opt->count() ? std::optional<T>(value) : std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Risk capital under parameter uncertainty for sums of normal subrisks"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    int n_outer = 0;
    int n_inner = 0;
    int workers = 0;
    std::string mode;
    std::string config_path;
    std::string table_name;
    std::string block;

    const auto positive = CLI::Range(1, 100'000'000);
    const auto mode_check = CLI::IsMember({"draw-x", "conditional-cdf"});

    auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
    run->add_option("config", config_path, "JSON config file")->required();
    auto* run_seed = run->add_option("--seed", seed, "Master seed");
    auto* run_outer = run->add_option("--n-outer", n_outer, "Outer replicates")->check(positive);
    auto* run_inner = run->add_option("--n-inner", n_inner, "Inner samples")->check(positive);
    auto* run_workers =
        run->add_option("--workers", workers, "Thread cap (results do not depend on it)")
            ->check(CLI::Range(1, 4096));
    auto* run_mode = run->add_option("--mode", mode, "Exceedance scoring")->check(mode_check);

    auto* table = app.add_subcommand("table", "Reproduce a published table");
    table->add_option("table", table_name, "table1, table2 or table3")
        ->required()
        ->check(CLI::IsMember({"table1", "table2", "table3"}));
    auto* tab_seed = table->add_option("--seed", seed, "Master seed");
    auto* tab_outer = table->add_option("--n-outer", n_outer, "Outer replicates")->check(positive);
    auto* tab_inner = table->add_option("--n-inner", n_inner, "Inner samples")->check(positive);
    auto* tab_workers =
        table->add_option("--workers", workers, "Thread cap (results do not depend on it)")
            ->check(CLI::Range(1, 4096));
    auto* tab_mode = table->add_option("--mode", mode, "Exceedance scoring")->check(mode_check);
    auto* tab_block = table->add_option("--block", block, "table3 block: n10n10, n5n10 or n10n20");

    auto* oracle = app.add_subcommand("oracle-check", "Run the analytic self-checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : parunc::cli::kExitInvalidConfig;
    }

    try {
        if (run->parsed()) {
            parunc::cli::RunOverrides o;
            o.seed = if_set(run_seed, seed);
            o.n_outer = if_set(run_outer, n_outer);
            o.n_inner = if_set(run_inner, n_inner);
            o.workers = if_set(run_workers, workers);
            if (run_mode->count()) o.exceedance = parunc::parse_exceedance_mode(mode);
            return parunc::cli::cmd_run(config_path, o, std::cout, std::cerr);
        }
        if (table->parsed()) {
            parunc::TableOverrides o;
            o.seed = if_set(tab_seed, seed);
            o.n_outer = if_set(tab_outer, n_outer);
            o.n_inner = if_set(tab_inner, n_inner);
            o.workers = if_set(tab_workers, workers);
            o.block = if_set(tab_block, block);
            if (tab_mode->count()) o.exceedance = parunc::parse_exceedance_mode(mode);
            return parunc::cli::cmd_table(parunc::parse_table_id(table_name), o, std::cout,
                                          std::cerr);
        }
        if (oracle->parsed()) {
            return parunc::cli::cmd_oracle_check(std::cout, std::cerr);
        }
    } catch (const parunc::InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return parunc::cli::kExitInvalidConfig;
    } catch (const parunc::Unsupported& e) {
        std::cerr << "error: " << e.what() << '\n';
        return parunc::cli::kExitInvalidConfig;
    } catch (const parunc::NotPsdError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return parunc::cli::kExitNumericDomain;
    } catch (const parunc::NumericDomainError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return parunc::cli::kExitNumericDomain;
    }
    return parunc::cli::kExitOk;
}
