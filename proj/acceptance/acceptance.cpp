// Acceptance run at default Monte Carlo sizes. Prints detail lines followed by
// one summary line per criterion; exits non-zero if any criterion fails.
// Pass criterion numbers as arguments to run a subset.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "parunc/harness.hpp"
#include "parunc/oracle.hpp"
#include "parunc/tables.hpp"

#ifndef PARUNC_EXE
#error "PARUNC_EXE must name the parunc executable"
#endif

using namespace parunc;

namespace {

constexpr std::array<double, 4> kAlphas{0.90, 0.95, 0.99, 0.995};

class Report {
public:
    void detail(bool ok, const std::string& text) {
        std::cout << "    " << (ok ? "ok   " : "MISS ") << text << '\n';
        all_ &= ok;
    }
    void note(const std::string& text) { std::cout << "    " << text << '\n'; }
    bool ok() const { return all_; }

private:
    bool all_ = true;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

PortfolioSpec known_single(double sigma, int n) {
    PortfolioSpec s;
    s.subrisks = {{0.0, sigma, n}};
    s.mean_mode = MeanMode::known_zero;
    s.estimator_mode = EstimatorMode::known_mean_mle;
    return s;
}

PortfolioSpec estimated_pair(double s1, double s2, int n1, int n2) {
    PortfolioSpec s;
    s.subrisks = {{0.5, s1, n1}, {-1.0, s2, n2}};
    s.mean_mode = MeanMode::estimated;
    s.estimator_mode = EstimatorMode::unbiased;
    return s;
}

void table_details(Report& r, const std::vector<TableRow>& rows) {
    for (const auto& row : rows) {
        std::string label = row.table + " row " + std::to_string(row.row_id) + " " + row.method;
        r.detail(row.pass, label + fmt(": alpha=%.3f p_hat=%.6f published=%.4f |diff|=%.5f", row.alpha,
                                       row.result.p_hat, row.reference_value, row.abs_diff) +
                               fmt(" tol=%.5f", row.tolerance));
    }
}

std::vector<TableRow> criterion1_rows;

bool criterion1(Report& r) {
    TableOverrides o;
    o.workers = 1;
    const auto t0 = std::chrono::steady_clock::now();
    criterion1_rows = run_table(TableId::table1, o);
    const double secs = seconds_since(t0);
    table_details(r, criterion1_rows);
    r.detail(secs <= 120.0, fmt("runtime %.1f s single-threaded (limit 120 s)", secs));
    return r.ok();
}

bool criterion2(Report& r) {
    if (criterion1_rows.empty()) criterion1_rows = run_table(TableId::table1, {});
    for (const auto& row : criterion1_rows) {
        const double exact = oracle::solvency_prob_exact(Method::naive_chisq, 10, row.alpha);
        const double mc = row.result.p_hat;
        const double se = row.result.std_err;
        r.detail(std::abs(exact - mc) <= 4.0 * se,
                 fmt("alpha=%.3f exact=%.6f mc=%.6f |diff|/SE=%.2f", row.alpha, exact, mc,
                     std::abs(exact - mc) / se));
        const double band = 4.0 * std::sqrt(row.reference_value * (1.0 - row.reference_value) / kReferenceReplicates);
        r.detail(std::abs(exact - row.reference_value) <= band,
                 fmt("alpha=%.3f exact=%.6f published=%.4f band=%.5f", row.alpha, exact, row.reference_value, band));
    }
    return r.ok();
}

bool criterion3(Report& r) {
    for (int n : {5, 10, 30}) {
        ExperimentConfig c;
        c.method = Method::inversion;
        const auto res = solvency_probabilities(known_single(1.0, n), c);
        for (const auto& x : res) {
            r.detail(std::abs(x.p_hat - x.alpha) <= 4.0 * x.std_err,
                     fmt("n=%.0f alpha=%.3f p_hat=%.6f (p-alpha)/SE=%+.2f", n, x.alpha, x.p_hat,
                         (x.p_hat - x.alpha) / x.std_err));
            const double exact = oracle::solvency_prob_exact(Method::inversion, n, x.alpha);
            r.detail(std::abs(exact - x.alpha) <= 1e-6,
                     fmt("n=%.0f alpha=%.3f analytic |p-alpha|=%.2e", n, x.alpha, std::abs(exact - x.alpha)));
        }
    }
    return r.ok();
}

bool criterion4(Report& r) {
    const auto rows = run_table(TableId::table2, {});
    table_details(r, rows);
    for (const auto& row : rows) {
        r.detail(row.result.p_hat > row.alpha,
                 "table2 row " + std::to_string(row.row_id) +
                     fmt(": p_hat=%.6f exceeds alpha=%.3f", row.result.p_hat, row.alpha));
    }
    return r.ok();
}

bool criterion5(Report& r) {
    const std::array<std::array<double, 2>, 3> sigmas{{{1, 1}, {1, 2}, {1, 10}}};
    const std::array<std::array<int, 2>, 3> ns{{{10, 10}, {5, 10}, {10, 20}}};
    for (const auto& s : sigmas) {
        for (const auto& n : ns) {
            ExperimentConfig c;
            c.alphas = {0.90, 0.99, 0.995};
            c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::true_lambda};
            const auto res = solvency_probabilities(estimated_pair(s[0], s[1], n[0], n[1]), c);
            for (const auto& x : res) {
                r.detail(std::abs(x.p_hat - x.alpha) <= 4.0 * x.std_err,
                         fmt("sigma=(%.0f,%.0f) ", s[0], s[1]) + fmt("n=(%.0f,%.0f) ", n[0], n[1]) +
                             fmt("alpha=%.3f p_hat=%.6f (p-alpha)/SE=%+.2f", x.alpha, x.p_hat,
                                 (x.p_hat - x.alpha) / x.std_err));
            }
        }
    }
    return r.ok();
}

bool criterion6(Report& r) {
    const auto t0 = std::chrono::steady_clock::now();
    for (const char* block : {"n10n10", "n5n10"}) {
        TableOverrides o;
        o.block = block;
        table_details(r, run_table(TableId::table3, o));
    }
    const double secs = seconds_since(t0);
    r.detail(secs <= 900.0, fmt("runtime %.1f s for both blocks (limit 900 s)", secs));
    return r.ok();
}

bool criterion7(Report& r) {
    // identity rho against independent mode, replayed seeds
    for (const auto& n : std::vector<std::array<int, 2>>{{10, 10}, {5, 10}}) {
        PortfolioSpec ind = estimated_pair(1.0, 2.0, n[0], n[1]);
        PortfolioSpec cor = ind;
        cor.rho = CorrelationMatrix::identity(2);
        for (auto ws : {WeightSource::true_lambda, WeightSource::estimated_lambda}) {
            ExperimentConfig c;
            c.n_outer = 2000;
            c.aggregation = AggregationMode{Combine::sum_corrected, ws};
            double worst_rc = 0.0;
            for (std::uint64_t i = 0; i < 50; ++i) {
                const auto a = replicate_risk_capital(ind, c, i);
                const auto b = replicate_risk_capital(cor, c, i);
                for (std::size_t k = 0; k < a.size(); ++k)
                    worst_rc = std::max(worst_rc, std::abs(a[k] - b[k]) / std::max(1.0, std::abs(a[k])));
            }
            const auto pa = solvency_probabilities(ind, c);
            const auto pb = solvency_probabilities(cor, c);
            double worst_p = 0.0;
            for (std::size_t k = 0; k < pa.size(); ++k)
                worst_p = std::max(worst_p, std::abs(pa[k].p_hat - pb[k].p_hat));
            r.detail(worst_rc <= 1e-12 && worst_p <= 1e-12,
                     fmt("identity rho n=(%.0f,%.0f) ", n[0], n[1]) + std::string(to_string(ws)) +
                         fmt(": max rel RC diff %.1e, max p_hat diff %.1e", worst_rc, worst_p));
        }
    }
    // rho12 = 0.5 exactness
    PortfolioSpec spec = estimated_pair(1.0, 1.0, 10, 10);
    spec.rho = CorrelationMatrix(SquareMatrix(2, {1.0, 0.5, 0.5, 1.0}));
    ExperimentConfig c;
    c.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::true_lambda};
    for (const auto& x : solvency_probabilities(spec, c)) {
        r.detail(std::abs(x.p_hat - x.alpha) <= 4.0 * x.std_err,
                 fmt("rho=0.5 n=(10,10) true-lambda alpha=%.3f p_hat=%.6f (p-alpha)/SE=%+.2f", x.alpha,
                     x.p_hat, (x.p_hat - x.alpha) / x.std_err));
    }
    return r.ok();
}

bool criterion8(Report& r) {
    const double k = 7.3;
    const double c = -4.2;
    struct Case {
        std::string name;
        PortfolioSpec spec;
        ExperimentConfig config;
    };
    std::vector<Case> cases;
    for (auto m : {Method::plugin, Method::naive_chisq, Method::inversion}) {
        ExperimentConfig cfg;
        cfg.method = m;
        PortfolioSpec s = known_single(1.3, 10);
        cases.push_back({"known-mean " + std::string(to_string(m)), s, cfg});
        s.mean_mode = MeanMode::estimated;
        s.estimator_mode = EstimatorMode::unbiased;
        s.subrisks[0].mu = 2.0;
        cases.push_back({"estimated-mean " + std::string(to_string(m)), s, cfg});
        s.estimator_mode = EstimatorMode::mle;
        cases.push_back({"mle " + std::string(to_string(m)), s, cfg});
    }
    {
        ExperimentConfig cfg;
        cfg.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::estimated_lambda};
        cases.push_back({"aggregate corrected estimated-lambda", estimated_pair(1.0, 0.1, 5, 10), cfg});
        cfg.aggregation = AggregationMode{Combine::sum_corrected, WeightSource::true_lambda};
        PortfolioSpec s = estimated_pair(1.0, 2.0, 10, 20);
        s.rho = CorrelationMatrix(SquareMatrix(2, {1.0, 0.5, 0.5, 1.0}));
        cases.push_back({"aggregate correlated true-lambda", s, cfg});
    }
    for (const auto& tc : cases) {
        PortfolioSpec scaled = tc.spec;
        PortfolioSpec shifted = tc.spec;
        const bool known = tc.spec.mean_mode == MeanMode::known_zero;
        for (auto& s : scaled.subrisks) {
            s.mu *= k;
            s.sigma *= k;
        }
        for (auto& s : shifted.subrisks) s.mu += c;
        const double total_shift = c * static_cast<double>(tc.spec.size());
        double worst_scale = 0.0;
        double worst_shift = 0.0;
        for (std::uint64_t i = 0; i < 20; ++i) {
            const auto base = replicate_risk_capital(tc.spec, tc.config, i);
            const auto sc = replicate_risk_capital(scaled, tc.config, i);
            for (std::size_t a = 0; a < base.size(); ++a)
                worst_scale = std::max(worst_scale, std::abs(sc[a] - k * base[a]) / std::abs(k * base[a]));
            if (!known) {
                const auto sh = replicate_risk_capital(shifted, tc.config, i);
                for (std::size_t a = 0; a < base.size(); ++a) {
                    const double expected = base[a] + total_shift;
                    worst_shift = std::max(worst_shift, std::abs(sh[a] - expected) /
                                                            std::max(std::abs(expected), std::abs(base[a])));
                }
            }
        }
        r.detail(worst_scale <= 1e-9, tc.name + fmt(": scale k=7.3 max rel err %.2e", worst_scale));
        if (!known) r.detail(worst_shift <= 1e-9, tc.name + fmt(": shift c=-4.2 max rel err %.2e", worst_shift));
    }
    return r.ok();
}

std::string run_capture(const std::string& cmd, int& status) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        status = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    status = pclose(pipe);
    return out;
}

bool criterion9(Report& r) {
    const std::string exe = PARUNC_EXE;
    int s1 = 0;
    int s8 = 0;
    const auto t0 = std::chrono::steady_clock::now();
    const std::string a = run_capture("'" + exe + "' table table3 --seed 7 --workers 1 2>/dev/null", s1);
    const std::string b = run_capture("'" + exe + "' table table3 --seed 7 --workers 8 2>/dev/null", s8);
    r.note(fmt("two full table3 runs took %.1f s", seconds_since(t0)));
    r.detail(s1 == 0 && s8 == 0, "both runs exited 0");
    const std::size_t lines = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
    r.detail(lines == 73, "table3 CSV has header + 72 lines (" + std::to_string(lines) + ")");
    r.detail(!a.empty() && a == b, "CSV byte-identical across --workers 1 and --workers 8 (" +
                                       std::to_string(a.size()) + " bytes)");
    return r.ok();
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<bool(Report&)>>> criteria{
        {"table 1 reproduction (naive, known mean, n=10)", criterion1},
        {"naive closed form vs simulation and published table 1", criterion2},
        {"inversion exactness, single subrisk", criterion3},
        {"table 2 reproduction (uncorrected inversion sum)", criterion4},
        {"corrected aggregate with true weights is exact", criterion5},
        {"table 3 reproduction, blocks (10,10) and (5,10)", criterion6},
        {"correlated mode: identity reduction and rho=0.5 exactness", criterion7},
        {"scale and translation equivariance of RC", criterion8},
        {"table3 CSV determinism across worker counts", criterion9},
    };
    std::set<int> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));

    std::vector<std::string> summary;
    bool all = true;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!selected.empty() && !selected.contains(id)) continue;
        std::cout << "criterion " << id << ": " << criteria[i].first << '\n' << std::flush;
        Report report;
        bool ok = false;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            ok = criteria[i].second(report);
        } catch (const std::exception& e) {
            report.detail(false, std::string("exception: ") + e.what());
        }
        ok = ok && report.ok();
        std::ostringstream line;
        line << (ok ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << criteria[i].first
             << fmt(" (%.0f s)", seconds_since(t0));
        std::cout << line.str() << "\n\n" << std::flush;
        summary.push_back(line.str());
        all &= ok;
    }
    std::cout << "summary\n";
    for (const auto& s : summary) std::cout << s << '\n';
    return all ? 0 : 1;
}
