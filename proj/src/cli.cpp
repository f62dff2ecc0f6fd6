#include "mrtcee/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mrtcee/config.hpp"
#include "mrtcee/csv.hpp"
#include "mrtcee/design.hpp"
#include "mrtcee/errors.hpp"
#include "mrtcee/inference.hpp"
#include "mrtcee/monte_carlo.hpp"
#include "mrtcee/scenario.hpp"
#include "mrtcee/wcls.hpp"

namespace mrtcee {

namespace {

using json = nlohmann::ordered_json;

struct EstimateArgs {
    std::string data;
    std::string f_cols;
    std::string g_cols;
    int delta = 1;
    std::string numerator = "match_randomization";
    std::string numerator_table;
    std::string contrast;
    double alpha = 0.05;
    std::string correction = "mancl_derouen";
    std::string scaling = "printed";
    std::string out;
    std::string format = "json";
    CsvSchema schema;
    std::string prob_cols;
};

struct SampleSizeArgs {
    std::string config;
    std::string sweep;
    std::string out;
    std::string format = "json";
};

struct SimulateArgs {
    std::string scenario;
    long long replicates = 0;
    std::string seed;
    int threads = 0;
    std::string out;
    std::string per_replicate;
    std::string format = "json";
};

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
    if (path == "-") {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw ValidationError("cannot open output file '" + path + "'");
    file << text;
    if (!file) throw ValidationError("failed writing output file '" + path + "'");
}

json number(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
    return a;
}

json to_json(const Eigen::MatrixXd& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(to_json(Eigen::VectorXd(m.row(i).transpose())));
    return a;
}

json to_json(const IntervalRow& r) {
    return json{{"parameter", r.name},  {"estimate", number(r.estimate)}, {"se", number(r.se)},
                {"ci_lower", number(r.lower)}, {"ci_upper", number(r.upper)}, {"p_value", number(r.p_value)}};
}

std::vector<std::string> column_list(const std::string& text, bool* intercept) {
    *intercept = true;
    std::vector<std::string> cols;
    if (text == "intercept") return cols;
    for (auto& field : split_fields(text)) {
        const auto b = field.find_first_not_of(' ');
        const auto e = field.find_last_not_of(' ');
        if (b == std::string::npos) throw ValidationError("empty column name in '" + text + "'");
        const std::string name = field.substr(b, e - b + 1);
        if (name == "intercept") continue;
        cols.push_back(name);
    }
    return cols;
}

std::string interval_csv(const std::vector<IntervalRow>& rows) {
    std::ostringstream os;
    os << "parameter,estimate,se,ci_lower,ci_upper,p_value\n";
    for (const auto& r : rows) {
        os << r.name << ',' << format_number(r.estimate) << ',' << format_number(r.se) << ','
           << format_number(r.lower) << ',' << format_number(r.upper) << ',' << format_number(r.p_value) << '\n';
    }
    return os.str();
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out) {
    if (a.format != "json" && a.format != "csv") throw ValidationError("--format must be json or csv");
    CsvSchema schema = a.schema;
    if (!a.prob_cols.empty()) schema.prob_cols = split_fields(a.prob_cols);
    const auto data = load_csv(a.data, schema);

    ModelSpec spec;
    spec.f_columns = column_list(a.f_cols, &spec.f_intercept);
    spec.g_columns = column_list(a.g_cols, &spec.g_intercept);
    spec.delta = a.delta;
    spec.numerator = NumeratorPolicy::parse(a.numerator);
    if (spec.numerator.kind == NumeratorKind::user_supplied) {
        if (a.numerator_table.empty()) throw ValidationError("--numerator user_supplied needs --numerator-table");
        spec.numerator.table = load_numeric_matrix(a.numerator_table, data.K + 1);
    }
    spec.correction = parse_correction(a.correction);
    const FScaling scaling = parse_f_scaling(a.scaling);

    const auto fit = fit_wcls(data, spec);
    auto rows = coefficient_intervals(fit, a.alpha);

    Eigen::MatrixXd l;
    if (a.contrast.empty()) {
        l = contrast_preset("all-null", fit.K);
    } else if (a.contrast == "all-null" || a.contrast.rfind("pairwise", 0) == 0) {
        l = contrast_preset(a.contrast, fit.K);
    } else {
        l = load_contrast_csv(a.contrast, fit.K);
    }
    const auto contrast = build_contrast(l, fit.p);
    const auto test = wald_test(fit, contrast, a.alpha, scaling);

    std::vector<IntervalRow> contrast_rows;
    if (!l.isIdentity(0.0)) {
        const std::vector<std::string> f_names(fit.beta_names.begin(), fit.beta_names.begin() + fit.p);
        std::vector<std::string> names;
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
            const std::string label = contrast_label(l.row(i));
            for (int j = 0; j < fit.p; ++j) {
                const auto bracket = f_names[j].find('[');
                names.push_back(label + (fit.p > 1 ? f_names[j].substr(bracket) : std::string()));
            }
        }
        contrast_rows = confidence_intervals(fit, contrast.l_tilde, names, a.alpha);
    }

    std::string text;
    if (a.format == "csv") {
        auto all = rows;
        all.insert(all.end(), contrast_rows.begin(), contrast_rows.end());
        text = interval_csv(all);
    } else {
        json j;
        j["model"] = {{"n", fit.n},
                      {"T", fit.T},
                      {"K", fit.K},
                      {"p", fit.p},
                      {"q", fit.q},
                      {"delta", spec.delta},
                      {"numerator", std::string(to_string(spec.numerator.kind))},
                      {"correction", std::string(to_string(spec.correction))},
                      {"alpha", a.alpha}};
        json alpha = json::array();
        for (int i = 0; i < fit.q; ++i) {
            alpha.push_back({{"parameter", fit.alpha_names[i]}, {"estimate", number(fit.alpha_hat(i))}});
        }
        j["control"] = alpha;
        json coefs = json::array();
        for (const auto& r : rows) coefs.push_back(to_json(r));
        j["coefficients"] = coefs;
        json crows = json::array();
        for (const auto& r : contrast_rows) crows.push_back(to_json(r));
        j["contrasts"] = crows;
        j["test"] = {{"L", to_json(l)},
                     {"statistic", number(test.statistic)},
                     {"scaled_statistic", number(test.scaled_statistic)},
                     {"df1", test.df1},
                     {"df2", test.df2},
                     {"critical_value", number(test.critical_value)},
                     {"p_value", number(test.p_value)},
                     {"reject", test.reject},
                     {"scaling", std::string(to_string(scaling))}};
        j["covariance"] = to_json(fit.cov_beta);
        j["diagnostics"] = {{"correction_fallbacks", fit.correction_fallbacks},
                            {"condition_estimate", number(fit.condition_estimate)}};
        text = j.dump(2) + "\n";
    }
    write_output(a.out, text, out);
    return kExitOk;
}

int cmd_samplesize(const SampleSizeArgs& a, std::ostream& out) {
    if (a.format != "json" && a.format != "csv") throw ValidationError("--format must be json or csv");
    const KeyValues kv = load_key_values(a.config);
    if (!a.sweep.empty()) {
        const auto sweep = parse_sweep(a.sweep);
        std::ostringstream os;
        os << sweep.key << ",n\n";
        for (double v : sweep.values) {
            KeyValues point = kv;
            point[sweep.key] = format_number(v);
            const auto result = required_sample_size(to_design_inputs(design_config_from(point)));
            os << format_number(v) << ',' << result.n << '\n';
        }
        write_output(a.out, os.str(), out);
        return kExitOk;
    }
    const auto cfg = design_config_from(kv);
    const auto result = required_sample_size(to_design_inputs(cfg));
    std::string text;
    if (a.format == "csv") {
        std::ostringstream os;
        os << "n,achieved_power,lambda_per_n\n"
           << result.n << ',' << format_number(result.achieved_power) << ',' << format_number(result.lambda_per_n)
           << '\n';
        text = os.str();
    } else {
        const auto patterns = build_patterns(cfg);
        const auto summary = summarize_effects(patterns.mee.smee, patterns.eo.eo, patterns.tau, cfg.l_matrix);
        json j;
        j["n"] = result.n;
        j["achieved_power"] = number(result.achieved_power);
        j["lambda_per_n"] = number(result.lambda_per_n);
        j["V"] = to_json(result.V);
        j["effects"] = {{"sate", to_json(summary.sate)},
                        {"delta_sate", to_json(summary.delta_sate)},
                        {"aeo", number(summary.aeo)},
                        {"aa", number(summary.aa)}};
        text = j.dump(2) + "\n";
    }
    write_output(a.out, text, out);
    return kExitOk;
}

std::uint64_t parse_seed(const std::string& text) {
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos == text.size() && text.front() != '-') return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("--seed must be an unsigned 64-bit integer");
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.format != "json" && a.format != "csv") throw ValidationError("--format must be json or csv");
    KeyValues kv = load_key_values(a.scenario);
    if (a.replicates != 0) {
        if (a.replicates < 1) throw ValidationError("--replicates must be at least 1");
        kv["replicates"] = std::to_string(a.replicates);
    }
    if (!a.seed.empty()) kv["seed"] = std::to_string(parse_seed(a.seed));
    if (a.threads < 0) throw ValidationError("--threads must be at least 1");
    auto scenario = scenario_from(kv);
    scenario.options.threads = a.threads;

    std::vector<ReplicateResult> reps;
    const auto s = run_monte_carlo(scenario.generative, scenario.options, a.per_replicate.empty() ? nullptr : &reps);

    std::string text;
    if (a.format == "csv") {
        std::ostringstream os;
        os << "family,replicates,failures,seed,n,rejection_rate,clipped_probabilities";
        for (const auto& name : s.names) {
            for (const char* stat : {"true", "mean", "bias", "rmse", "mean_se", "sd", "coverage"}) {
                os << ',' << stat << '_' << name;
            }
        }
        os << '\n'
           << to_string(scenario.generative.family) << ',' << s.replicates << ',' << s.failures << ',' << s.seed
           << ',' << s.n << ',' << format_number(s.rejection_rate) << ',' << s.clipped_probabilities;
        for (std::size_t j = 0; j < s.names.size(); ++j) {
            for (double v : {s.true_beta.size() ? s.true_beta(j) : std::nan(""), s.mean_estimate(j), s.bias(j),
                             s.rmse(j), s.mean_se(j), s.empirical_sd(j), s.coverage(j)}) {
                os << ',' << (std::isfinite(v) ? format_number(v) : std::string("NA"));
            }
        }
        os << '\n';
        text = os.str();
    } else {
        json j;
        j["scenario"] = scenario.name;
        j["family"] = std::string(to_string(scenario.generative.family));
        j["replicates"] = s.replicates;
        j["failures"] = s.failures;
        j["seed"] = s.seed;
        j["n"] = s.n;
        if (scenario.planned) {
            j["planned"] = {{"n", scenario.planned->n},
                            {"achieved_power", number(scenario.planned->achieved_power)},
                            {"lambda_per_n", number(scenario.planned->lambda_per_n)}};
        }
        j["rejection_rate"] = number(s.rejection_rate);
        j["clipped_probabilities"] = s.clipped_probabilities;
        json params = json::array();
        for (std::size_t k = 0; k < s.names.size(); ++k) {
            params.push_back({{"parameter", s.names[k]},
                              {"true", s.true_beta.size() ? number(s.true_beta(k)) : json(nullptr)},
                              {"mean", number(s.mean_estimate(k))},
                              {"bias", number(s.bias(k))},
                              {"rmse", number(s.rmse(k))},
                              {"mean_se", number(s.mean_se(k))},
                              {"sd", number(s.empirical_sd(k))},
                              {"coverage", number(s.coverage(k))}});
        }
        j["parameters"] = params;
        text = j.dump(2) + "\n";
    }
    write_output(a.out, text, out);

    if (!a.per_replicate.empty()) {
        std::ostringstream os;
        os << "replicate,ok,statistic,p_value,reject";
        for (const auto& name : s.names) os << ",est_" << name << ",se_" << name;
        os << ",error\n";
        for (const auto& r : reps) {
            os << r.index << ',' << (r.ok ? 1 : 0) << ',';
            if (r.ok) {
                os << format_number(r.statistic) << ',' << format_number(r.p_value) << ',' << (r.reject ? 1 : 0);
                for (Eigen::Index k = 0; k < r.beta_hat.size(); ++k) {
                    os << ',' << format_number(r.beta_hat(k)) << ',' << format_number(r.se(k));
                }
                os << ",\n";
            } else {
                os << "NA,NA,NA";
                for (std::size_t k = 0; k < s.names.size(); ++k) os << ",NA,NA";
                std::string msg = r.error;
                for (char& c : msg) {
                    if (c == ',' || c == '\n') c = ';';
                }
                os << ',' << msg << '\n';
            }
        }
        write_output(a.per_replicate, os.str(), out);
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Causal excursion effects for micro-randomized trials with categorical treatments", "mrtcee"};
    app.require_subcommand(1);

    EstimateArgs est;
    auto* estimate = app.add_subcommand("estimate", "Fit the weighted-centered least-squares estimator");
    estimate->add_option("--data", est.data, "Panel CSV")->required();
    estimate->add_option("--f-cols", est.f_cols, "Moderator columns, or 'intercept'")->required();
    estimate->add_option("--g-cols", est.g_cols, "Control columns, or 'intercept'")->required();
    estimate->add_option("--delta", est.delta, "Excursion length")->capture_default_str();
    estimate->add_option("--numerator", est.numerator,
                         "match_randomization, empirical_per_t, empirical_pooled or user_supplied")
        ->capture_default_str();
    estimate->add_option("--numerator-table", est.numerator_table, "T x (K+1) CSV for user_supplied");
    estimate->add_option("--contrast", est.contrast, "Contrast CSV, 'all-null' or 'pairwise(j,k)'");
    estimate->add_option("--alpha", est.alpha, "Type I error level")->capture_default_str();
    estimate->add_option("--correction", est.correction, "mancl_derouen or none")->capture_default_str();
    estimate->add_option("--scaling", est.scaling, "F scaling: printed or alternative")->capture_default_str();
    estimate->add_option("--out", est.out, "Output path, '-' for stdout")->required();
    estimate->add_option("--format", est.format, "json or csv")->capture_default_str();
    estimate->add_option("--id-col", est.schema.id_col)->capture_default_str();
    estimate->add_option("--t-col", est.schema.t_col)->capture_default_str();
    estimate->add_option("--avail-col", est.schema.avail_col)->capture_default_str();
    estimate->add_option("--trt-col", est.schema.trt_col)->capture_default_str();
    estimate->add_option("--outcome-col", est.schema.outcome_col)->capture_default_str();
    estimate->add_option("--prob-cols", est.prob_cols, "Comma-separated probability columns, arm 0 first");

    SampleSizeArgs ss;
    auto* samplesize = app.add_subcommand("samplesize", "Smallest n reaching the target power");
    samplesize->add_option("--config", ss.config, "Design config (key = value)")->required();
    samplesize->add_option("--sweep", ss.sweep, "key=lo:hi:step, emits CSV of (value, n)");
    samplesize->add_option("--out", ss.out, "Output path, '-' for stdout")->required();
    samplesize->add_option("--format", ss.format, "json or csv")->capture_default_str();

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo evaluation of a scenario");
    simulate->add_option("--scenario", sim.scenario, "Scenario config (key = value)")->required();
    simulate->add_option("--replicates", sim.replicates, "Overrides the scenario's replicates");
    simulate->add_option("--seed", sim.seed, "Overrides the scenario's master seed");
    simulate->add_option("--threads", sim.threads, "Worker threads (default: MRTCEE_THREADS or all cores)");
    simulate->add_option("--out", sim.out, "Summary output path, '-' for stdout")->required();
    simulate->add_option("--per-replicate", sim.per_replicate, "Per-replicate CSV path");
    simulate->add_option("--format", sim.format, "json or csv")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const CLI::App* sub = nullptr;
        for (const auto* s : app.get_subcommands()) sub = s;
        err << (sub != nullptr ? sub->help() : app.help());
        return kExitValidation;
    }

    try {
        if (estimate->parsed()) return cmd_estimate(est, out);
        if (samplesize->parsed()) return cmd_samplesize(ss, out);
        return cmd_simulate(sim, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace mrtcee
