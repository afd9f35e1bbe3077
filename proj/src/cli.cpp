#include "parunc/cli.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "parunc/errors.hpp"
#include "parunc/oracle.hpp"

namespace parunc::cli {

using nlohmann::json;

namespace {

std::string join_lines(const std::vector<std::string>& lines) {
    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += "; ";
        out += l;
    }
    return out;
}

template <typename... Args>
std::string sformat(const char* fmt, Args... args) {
    char buf[128];
    const int len = std::snprintf(buf, sizeof buf, fmt, args...);
    if (len < static_cast<int>(sizeof buf)) return std::string(buf, static_cast<std::size_t>(len));
    std::string big(static_cast<std::size_t>(len) + 1, '\0');
    std::snprintf(big.data(), big.size(), fmt, args...);
    big.resize(static_cast<std::size_t>(len));
    return big;
}

std::string fmt_number(double v) { return sformat("%.10g", v); }
std::string fmt_alpha(double a) { return sformat("%.4f", a); }

template <typename T, typename F>
std::string join_list(const std::vector<T>& values, F&& f) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ';';
        out += f(values[i]);
    }
    return out;
}

// Collects schema problems instead of failing on the first one.
class Validator {
public:
    void error(std::string msg) { errors_.push_back(std::move(msg)); }
    bool ok() const { return errors_.empty(); }
    const std::vector<std::string>& errors() const { return errors_; }

    void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                        const std::string& where) {
        for (const auto& [key, _] : obj.items()) {
            if (!allowed.contains(key)) error(where + ": unknown key '" + key + "'");
        }
    }

    std::optional<double> number(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number()) {
            error(where + "." + key + " must be a number");
            return std::nullopt;
        }
        return v.get<double>();
    }

    std::optional<long long> integer(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_number_integer()) {
            error(where + "." + key + " must be an integer");
            return std::nullopt;
        }
        return v.get<long long>();
    }

    std::optional<std::string> string(const json& obj, const char* key, const std::string& where) {
        if (!obj.contains(key)) return std::nullopt;
        const auto& v = obj.at(key);
        if (!v.is_string()) {
            error(where + "." + key + " must be a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    template <typename F>
    auto parse_enum(const std::optional<std::string>& text, F&& parser, const std::string& where)
        -> std::optional<decltype(parser(std::string_view{}))> {
        if (!text) return std::nullopt;
        try {
            return parser(*text);
        } catch (const InvalidArgument& e) {
            error(where + ": " + e.what());
            return std::nullopt;
        }
    }

private:
    std::vector<std::string> errors_;
};

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diagnostics)
    : std::runtime_error("invalid configuration: " + join_lines(diagnostics)),
      diagnostics_(std::move(diagnostics)) {}

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("PARUNC_SEED");
    if (!raw || !*raw) return std::nullopt;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(raw, &end, 10);
    if (end == raw || *end != '\0') return std::nullopt;
    return static_cast<std::uint64_t>(v);
}

std::string format_probability(double p) { return sformat("%.6f", p); }

RunConfig parse_run_config(const json& doc, const RunOverrides& overrides,
                           std::optional<std::uint64_t> fallback_seed) {
    Validator v;
    RunConfig cfg;
    if (!doc.is_object()) {
        throw ConfigError({"config must be a JSON object"});
    }
    v.reject_unknown(doc,
                     {"subrisks", "rho", "mean_mode", "estimator_mode", "methods", "method",
                      "aggregation", "alphas", "n_outer", "n_inner", "seed", "exceedance_mode",
                      "workers"},
                     "config");

    // portfolio
    if (auto mm = v.parse_enum(v.string(doc, "mean_mode", "config"), parse_mean_mode, "mean_mode")) {
        cfg.spec.mean_mode = *mm;
    }
    cfg.spec.estimator_mode = cfg.spec.mean_mode == MeanMode::known_zero
                                  ? EstimatorMode::known_mean_mle
                                  : EstimatorMode::unbiased;
    if (auto em = v.parse_enum(v.string(doc, "estimator_mode", "config"), parse_estimator_mode,
                               "estimator_mode")) {
        cfg.spec.estimator_mode = *em;
    }

    if (!doc.contains("subrisks") || !doc.at("subrisks").is_array() || doc.at("subrisks").empty()) {
        v.error("config.subrisks must be a non-empty array");
    } else {
        std::size_t j = 0;
        for (const auto& item : doc.at("subrisks")) {
            const std::string where = "subrisks[" + std::to_string(j++) + "]";
            if (!item.is_object()) {
                v.error(where + " must be an object");
                continue;
            }
            v.reject_unknown(item, {"mu", "sigma", "n"}, where);
            SubriskSpec s;
            s.mu = v.number(item, "mu", where).value_or(0.0);
            if (auto sigma = v.number(item, "sigma", where)) {
                s.sigma = *sigma;
                if (!(s.sigma > 0.0)) v.error(where + ".sigma must be > 0");
            } else if (!item.contains("sigma")) {
                v.error(where + ".sigma is required");
            }
            if (auto n = v.integer(item, "n", where)) {
                if (*n < 2 || *n > 1'000'000) {
                    v.error(where + ".n must be in [2, 1000000]");
                } else {
                    s.n = static_cast<int>(*n);
                }
            } else if (!item.contains("n")) {
                v.error(where + ".n is required");
            }
            cfg.spec.subrisks.push_back(s);
        }
    }

    if (doc.contains("rho")) {
        const auto& r = doc.at("rho");
        const std::size_t m = cfg.spec.subrisks.size();
        bool shape_ok = r.is_array() && r.size() == m;
        std::vector<double> entries;
        if (shape_ok) {
            for (const auto& row : r) {
                if (!row.is_array() || row.size() != m) {
                    shape_ok = false;
                    break;
                }
                for (const auto& e : row) {
                    if (!e.is_number()) {
                        shape_ok = false;
                        break;
                    }
                    entries.push_back(e.get<double>());
                }
            }
        }
        if (!shape_ok) {
            v.error("config.rho must be an m x m numeric matrix (m = number of subrisks)");
        } else {
            try {
                cfg.spec.rho = CorrelationMatrix(SquareMatrix(m, std::move(entries)));
            } catch (const NotPsdError&) {
                throw;
            } catch (const std::exception& e) {
                v.error(std::string("config.rho: ") + e.what());
            }
        }
    }

    // experiment
    ExperimentConfig& ex = cfg.experiment;
    if (doc.contains("methods") && doc.contains("method")) {
        v.error("config: give either 'method' or 'methods', not both");
    }
    if (auto m = v.parse_enum(v.string(doc, "method", "config"), parse_method, "method")) {
        cfg.methods = {*m};
    }
    if (doc.contains("methods")) {
        const auto& ms = doc.at("methods");
        if (!ms.is_array() || ms.empty()) {
            v.error("config.methods must be a non-empty array of strings");
        } else {
            cfg.methods.clear();
            for (const auto& m : ms) {
                if (!m.is_string()) {
                    v.error("config.methods entries must be strings");
                    continue;
                }
                if (auto parsed = v.parse_enum(m.get<std::string>(), parse_method, "methods")) {
                    cfg.methods.push_back(*parsed);
                }
            }
        }
    }
    ex.method = cfg.methods.empty() ? Method::inversion : cfg.methods.front();

    if (doc.contains("aggregation")) {
        const auto& agg = doc.at("aggregation");
        if (!agg.is_object()) {
            v.error("config.aggregation must be an object");
        } else {
            v.reject_unknown(agg, {"combine", "weights"}, "aggregation");
            AggregationMode mode;
            if (auto c = v.parse_enum(v.string(agg, "combine", "aggregation"), parse_combine,
                                      "aggregation.combine")) {
                mode.combine = *c;
            }
            if (auto w = v.parse_enum(v.string(agg, "weights", "aggregation"), parse_weight_source,
                                      "aggregation.weights")) {
                mode.weight_source = *w;
            }
            ex.aggregation = mode;
        }
    } else if (cfg.spec.subrisks.size() > 1) {
        ex.aggregation = AggregationMode{cfg.spec.mean_mode == MeanMode::known_zero
                                             ? Combine::sum_uncorrected
                                             : Combine::sum_corrected,
                                         WeightSource::estimated_lambda};
    }

    if (doc.contains("alphas")) {
        const auto& a = doc.at("alphas");
        if (!a.is_array() || a.empty()) {
            v.error("config.alphas must be a non-empty array");
        } else {
            ex.alphas.clear();
            for (const auto& x : a) {
                if (!x.is_number() || !(x.get<double>() > 0.0 && x.get<double>() < 1.0)) {
                    v.error("config.alphas entries must be numbers in (0, 1)");
                } else {
                    ex.alphas.push_back(x.get<double>());
                }
            }
        }
    }
    if (auto n = v.integer(doc, "n_outer", "config")) {
        if (*n < kMinOuterReplicates || *n > 100'000'000) {
            v.error("config.n_outer must be >= " + std::to_string(kMinOuterReplicates));
        } else {
            ex.n_outer = static_cast<int>(*n);
        }
    }
    if (auto n = v.integer(doc, "n_inner", "config")) {
        if (*n < kMinInnerSamples || *n > 100'000'000) {
            v.error("config.n_inner must be >= " + std::to_string(kMinInnerSamples));
        } else {
            ex.n_inner = static_cast<int>(*n);
        }
    }
    if (fallback_seed) ex.seed = *fallback_seed;
    if (doc.contains("seed")) {
        const auto& s = doc.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            v.error("config.seed must be a non-negative integer");
        } else {
            ex.seed = s.get<std::uint64_t>();
        }
    }
    if (auto mode = v.parse_enum(v.string(doc, "exceedance_mode", "config"),
                                 parse_exceedance_mode, "exceedance_mode")) {
        ex.exceedance = *mode;
    }
    if (auto w = v.integer(doc, "workers", "config")) {
        if (*w < 0 || *w > 4096) {
            v.error("config.workers must be in [0, 4096]");
        } else {
            ex.workers = static_cast<int>(*w);
        }
    }

    if (overrides.seed) ex.seed = *overrides.seed;
    if (overrides.n_outer) ex.n_outer = *overrides.n_outer;
    if (overrides.n_inner) ex.n_inner = *overrides.n_inner;
    if (overrides.workers) ex.workers = *overrides.workers;
    if (overrides.exceedance) ex.exceedance = *overrides.exceedance;

    if (!v.ok()) {
        throw ConfigError(v.errors());
    }

    // semantic checks across fields
    std::vector<std::string> semantic;
    for (Method m : cfg.methods) {
        ExperimentConfig probe = ex;
        probe.method = m;
        try {
            check_experiment(cfg.spec, probe);
        } catch (const InvalidArgument& e) {
            semantic.emplace_back(e.what());
        } catch (const Unsupported& e) {
            semantic.emplace_back(e.what());
        }
    }
    if (!semantic.empty()) {
        throw ConfigError(semantic);
    }
    return cfg;
}

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err) {
    RunConfig cfg;
    try {
        std::ifstream in(config_path);
        if (!in) {
            err << "error: cannot read config file '" << config_path << "'\n";
            return kExitInvalidConfig;
        }
        json doc;
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            err << "error: config is not valid JSON: " << e.what() << '\n';
            return kExitInvalidConfig;
        }
        cfg = parse_run_config(doc, overrides, env_seed());
    } catch (const ConfigError& e) {
        for (const auto& d : e.diagnostics()) {
            err << "config error: " << d << '\n';
        }
        return kExitInvalidConfig;
    } catch (const NotPsdError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumericDomain;
    }

    const PortfolioSpec& spec = cfg.spec;
    const char* combine = "none";
    const char* weights = "none";
    std::string combine_s;
    std::string weights_s;
    if (cfg.experiment.aggregation) {
        combine_s = std::string(to_string(cfg.experiment.aggregation->combine));
        weights_s = cfg.experiment.aggregation->combine == Combine::sum_corrected
                        ? std::string(to_string(cfg.experiment.aggregation->weight_source))
                        : "none";
        combine = combine_s.c_str();
        weights = weights_s.c_str();
    }
    std::vector<double> mus;
    std::vector<double> sigmas;
    std::vector<int> ns;
    for (const auto& s : spec.subrisks) {
        mus.push_back(s.mu);
        sigmas.push_back(s.sigma);
        ns.push_back(s.n);
    }
    const std::string mu_list = join_list(mus, fmt_number);
    const std::string sigma_list = join_list(sigmas, fmt_number);
    const std::string n_list = join_list(ns, [](int n) { return std::to_string(n); });
    const char* correlation = spec.rho ? "correlated" : "independent";

    std::ostringstream csv;
    csv << "method,combine,weights,correlation,mean_mode,estimator_mode,m,mu,sigma,n,alpha,"
           "p_hat,std_err,n_outer,n_inner,seed,exceedance_mode\n";
    for (Method method : cfg.methods) {
        ExperimentConfig ex = cfg.experiment;
        ex.method = method;
        err << "running " << to_string(method) << " (" << ex.n_outer << " x " << ex.n_inner
            << ")\n";
        std::vector<SolvencyResult> results;
        try {
            results = solvency_probabilities(spec, ex);
        } catch (const NumericDomainError& e) {
            err << "numeric error: " << e.what() << '\n';
            return kExitNumericDomain;
        } catch (const NotPsdError& e) {
            err << "numeric error: " << e.what() << '\n';
            return kExitNumericDomain;
        }
        for (const auto& r : results) {
            csv << to_string(method) << ',' << combine << ',' << weights << ',' << correlation
                << ',' << to_string(spec.mean_mode) << ',' << to_string(spec.estimator_mode) << ','
                << spec.size() << ',' << mu_list << ',' << sigma_list << ',' << n_list << ','
                << fmt_alpha(r.alpha) << ',' << format_probability(r.p_hat) << ','
                << sformat("%.8f", r.std_err) << ',' << r.n_outer << ',' << r.n_inner << ','
                << r.seed << ',' << to_string(r.exceedance) << '\n';
        }
    }
    out << csv.str();
    out.flush();
    return kExitOk;
}

int cmd_table(TableId id, const TableOverrides& overrides_in, std::ostream& out,
              std::ostream& err) {
    TableOverrides overrides = overrides_in;
    if (!overrides.seed) overrides.seed = env_seed();
    std::vector<TableRow> rows;
    try {
        rows = run_table(id, overrides, [&](std::string_view msg) { err << msg << '\n'; });
    } catch (const InvalidArgument& e) {
        err << "config error: " << e.what() << '\n';
        return kExitInvalidConfig;
    } catch (const NumericDomainError& e) {
        err << "numeric error: " << e.what() << '\n';
        return kExitNumericDomain;
    }

    std::ostringstream csv;
    csv << "table,row_id,sigma1,sigma2,n1,n2,alpha,method,p_hat,std_err,paper_value,abs_diff,"
           "pass,tolerance,n_outer,n_inner,seed,exceedance_mode\n";
    std::size_t failures = 0;
    for (const auto& r : rows) {
        const std::string sigma2 = r.sigma.size() > 1 ? fmt_number(r.sigma[1]) : "";
        const std::string n2 = r.n.size() > 1 ? std::to_string(r.n[1]) : "";
        csv << r.table << ',' << r.row_id << ',' << fmt_number(r.sigma[0]) << ',' << sigma2 << ','
            << r.n[0] << ',' << n2 << ',' << fmt_alpha(r.alpha) << ',' << r.method << ','
            << format_probability(r.result.p_hat) << ',' << sformat("%.8f", r.result.std_err)
            << ',' << format_probability(r.reference_value) << ',' << format_probability(r.abs_diff)
            << ',' << (r.pass ? "true" : "false") << ',' << format_probability(r.tolerance) << ','
            << r.result.n_outer << ',' << r.result.n_inner << ',' << r.result.seed << ','
            << to_string(r.result.exceedance) << '\n';
        if (!r.pass) ++failures;
    }
    out << csv.str();
    out.flush();
    err << to_string(id) << ": " << rows.size() - failures << "/" << rows.size()
        << " rows within tolerance\n";
    return kExitOk;
}

int cmd_oracle_check(std::ostream& out, std::ostream& err) {
    int failed = 0;
    auto report = [&](bool pass, const std::string& name, const std::string& detail) {
        out << (pass ? "PASS " : "FAIL ") << name << "  " << detail << '\n';
        if (!pass) ++failed;
    };
    const std::array<double, 4> alphas{0.90, 0.95, 0.99, 0.995};

    try {
        {
            const auto rule = oracle::QuadratureRule::chi_square(10);
            const double mass = rule.integrate([](double) { return 1.0; });
            report(std::abs(mass - 1.0) <= 1e-10, "quadrature-normalization",
                   sformat("df=10 mass-1=%.3e", mass - 1.0));
        }
        {
            const double q = oracle::t_quantile(10, 0.99);
            report(std::abs(q - 2.76377) <= 5e-6, "t-quantile", sformat("t_10(0.99)=%.6f", q));
        }
        for (double a : alphas) {
            double worst = 0.0;
            int worst_n = 0;
            for (int n = 3; n <= 50; ++n) {
                const double p = oracle::solvency_prob_exact(Method::inversion, n, a);
                if (std::abs(p - a) >= worst) {
                    worst = std::abs(p - a);
                    worst_n = n;
                }
            }
            report(worst <= 1e-6, "inversion-exactness",
                   sformat("alpha=%.3f n=3..50 max|p-alpha|=%.2e (n=%d)", a, worst, worst_n));
        }
        const std::array<double, 4> table1{0.8809, 0.9351, 0.9833, 0.9922};
        for (std::size_t i = 0; i < alphas.size(); ++i) {
            const double p = oracle::solvency_prob_exact(Method::naive_chisq, 10, alphas[i]);
            const double band = 4.0 * std::sqrt(table1[i] * (1.0 - table1[i]) / kReferenceReplicates);
            report(std::abs(p - table1[i]) <= band, "naive-vs-published",
                   sformat("alpha=%.3f exact=%.6f published=%.4f band=%.4f", alphas[i], p,
                           table1[i], band));
        }
        for (double a : alphas) {
            const double p = oracle::solvency_prob_exact(Method::plugin, 10, a);
            report(p < a, "plugin-below-alpha", sformat("alpha=%.3f exact=%.6f", a, p));
        }
    } catch (const std::exception& e) {
        err << "oracle check aborted: " << e.what() << '\n';
        return kExitCheckFailed;
    }
    err << (failed == 0 ? "all oracle checks passed\n" : "oracle checks failed\n");
    return failed == 0 ? kExitOk : kExitCheckFailed;
}

}  // namespace parunc::cli
