#include "mrtcee/scenario.hpp"

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

const std::string kWorkingPrefix = "working.";

}  // namespace

ModelSpec analysis_model(const DesignConfig& working, Family family) {
    ModelSpec spec;
    spec.f_intercept = true;
    spec.g_intercept = true;
    if (family == Family::consistency) {
        spec.g_columns = {"z"};
        return spec;
    }
    if (working.g_kind != EoKind::constant) spec.g_columns.push_back("time");
    if (working.g_kind == EoKind::quadratic) spec.g_columns.push_back("time2");
    if (working.f_kind == MeeKind::linear) spec.f_columns.push_back("time");
    return spec;
}

Eigen::VectorXd true_coefficients(const DesignConfig& truth, const ModelSpec& analysis, Family family) {
    if (family == Family::consistency) {
        return consistency_true_effects();
    }
    const auto patterns = build_patterns(truth);
    const Eigen::MatrixXd& coef = patterns.mee.coefficients;  // truth p* x K
    const int p = analysis.p();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(p, truth.K);
    if (coef.rows() <= p) {
        out.topRows(coef.rows()) = coef;
    } else if (p == 1) {
        out.row(0) = patterns.mee.smee.transpose() * patterns.tau / patterns.tau.sum();
    } else {
        throw ValidationError("analysis effect basis cannot represent the true effect");
    }
    return Eigen::Map<const Eigen::VectorXd>(out.data(), out.size());
}

Scenario scenario_from(const KeyValues& kv) {
    KeyValues base;
    KeyValues overrides;
    for (const auto& [k, v] : kv) {
        if (k.rfind(kWorkingPrefix, 0) == 0) {
            overrides[k.substr(kWorkingPrefix.size())] = v;
        } else {
            base[k] = v;
        }
    }

    Scenario s;
    ConfigReader r(base);
    s.name = r.get_string("name", "");
    s.truth = read_design_config(r);
    const Family family = parse_family(r.get_string("family", "gm0"));
    s.generative.family = family;
    s.generative.nu1 = r.get_double("nu1", 0.0);
    s.generative.nu2 = r.get_double("nu2", 0.0);
    s.generative.nu3 = r.get_double("nu3", 0.0);
    s.generative.theta_r = r.get_double("theta_r", 0.0);
    s.generative.theta_s = r.get_double("theta_s", 0.0);
    const long long replicates = r.get_int("replicates", 1000);
    const auto seed = r.get_u64("seed", 0);
    const bool explicit_n = r.has("n");
    const long long n = r.get_int("n", 0);
    const auto numerator = NumeratorPolicy::parse(r.get_string("numerator", "match_randomization"));
    const auto correction = parse_correction(r.get_string("correction", "mancl_derouen"));
    r.reject_unknown();

    KeyValues merged = base;
    for (const auto& [k, v] : overrides) merged[k] = v;
    ConfigReader wr(merged);
    s.working = read_design_config(wr);
    for (const auto& [k, v] : overrides) {
        if (!wr.used(k)) throw ValidationError("working." + k + " is not a design key");
    }

    const auto patterns = build_patterns(s.truth);
    auto& g = s.generative;
    g.T = s.truth.T;
    g.K = s.truth.K;
    g.rand_probs = s.truth.probs.transpose().replicate(g.T, 1);
    g.tau = patterns.tau;
    g.eo_coeffs = patterns.eo.alpha;
    g.mee_coeffs = patterns.mee.coefficients;
    validate(g);

    auto& o = s.options;
    o.spec = analysis_model(s.working, family);
    o.spec.numerator = numerator;
    o.spec.correction = correction;
    o.l_matrix = s.working.l_matrix;
    o.eta = s.working.eta;
    o.scaling = s.working.scaling;
    o.seed = seed;
    if (replicates < 1 || replicates > 100000000) throw ValidationError("replicates must be in 1..1e8");
    o.replicates = static_cast<int>(replicates);
    o.true_beta = true_coefficients(s.truth, o.spec, family);
    if (explicit_n) {
        if (n < 1 || n > 100000000) throw ValidationError("n must be in 1..1e8");
        o.n = static_cast<int>(n);
    } else {
        if (family == Family::consistency) throw ValidationError("the consistency family needs an explicit n");
        s.planned = required_sample_size(to_design_inputs(s.working));
        o.n = static_cast<int>(s.planned->n);
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    return scenario_from(load_key_values(path));
}

}  // namespace mrtcee
