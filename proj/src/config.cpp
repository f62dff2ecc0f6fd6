#include "mrtcee/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mrtcee/csv.hpp"
#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const auto v = parse_double(trim(text));
    if (!v) throw ValidationError("config key '" + key + "': '" + text + "' is not a number");
    return *v;
}

}  // namespace

std::string format_number(double v) {
    return format_double(v);
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": empty key");
        }
        if (!kv.emplace(key, value).second) {
            throw ValidationError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    return parse_key_values(in, path);
}

void write_key_values(std::ostream& out, const KeyValues& kv) {
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

const std::string& ConfigReader::raw(const std::string& key) {
    const auto it = kv_.find(key);
    if (it == kv_.end()) throw ValidationError("missing config key '" + key + "'");
    used_.insert(key);
    return it->second;
}

std::string ConfigReader::get_string(const std::string& key) {
    return raw(key);
}

std::string ConfigReader::get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? raw(key) : fallback;
}

double ConfigReader::get_double(const std::string& key) {
    return to_double(key, raw(key));
}

double ConfigReader::get_double(const std::string& key, double fallback) {
    return has(key) ? get_double(key) : fallback;
}

long long ConfigReader::get_int(const std::string& key) {
    const std::string& text = raw(key);
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(text, &pos);
        if (pos == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("config key '" + key + "': '" + text + "' is not an integer");
}

long long ConfigReader::get_int(const std::string& key, long long fallback) {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ConfigReader::get_u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const std::string& text = raw(key);
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos == text.size() && text.front() != '-') return v;
    } catch (const std::exception&) {
    }
    throw ValidationError("config key '" + key + "': '" + text + "' is not an unsigned integer");
}

std::vector<double> ConfigReader::get_doubles(const std::string& key) {
    std::vector<double> out;
    for (const auto& field : split_fields(raw(key))) out.push_back(to_double(key, field));
    return out;
}

void ConfigReader::reject_unknown() const {
    std::string unknown;
    for (const auto& [k, v] : kv_) {
        if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
    }
    if (!unknown.empty()) throw ValidationError("unknown config keys: " + unknown);
}

Eigen::MatrixXd parse_matrix_text(const std::string& text, int K) {
    const std::string t = trim(text);
    if (t == "all-null" || t.rfind("pairwise", 0) == 0) return contrast_preset(t, K);
    std::vector<std::vector<double>> rows;
    std::stringstream ss(t);
    std::string row_text;
    while (std::getline(ss, row_text, ';')) {
        std::vector<double> row;
        for (const auto& field : split_fields(trim(row_text))) row.push_back(to_double("L", field));
        if (static_cast<int>(row.size()) != K) {
            throw ValidationError("contrast rows must have K = " + std::to_string(K) + " entries");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ValidationError("empty contrast matrix");
    Eigen::MatrixXd m(rows.size(), K);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int k = 0; k < K; ++k) m(i, k) = rows[i][k];
    }
    return m;
}

std::string format_matrix_text(const Eigen::MatrixXd& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i) out += ';';
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out += ',';
            out += format_number(m(i, j));
        }
    }
    return out;
}

DesignConfig read_design_config(ConfigReader& r, const std::string& prefix) {
    auto key = [&](const std::string& k) { return prefix + k; };
    DesignConfig c;
    c.K = static_cast<int>(r.get_int(key("K")));
    c.T = static_cast<int>(r.get_int(key("T")));
    if (c.K < 1) throw ValidationError("K must be at least 1");
    if (c.T < 1) throw ValidationError("T must be at least 1");
    const auto probs = r.get_doubles(key("p"));
    if (static_cast<int>(probs.size()) != c.K + 1) {
        throw ValidationError("p must list K + 1 probabilities, arm 0 first");
    }
    c.probs = Eigen::Map<const Eigen::VectorXd>(probs.data(), probs.size());
    if ((c.probs.array() <= 0.0).any() || std::abs(c.probs.sum() - 1.0) > 1e-8) {
        throw ValidationError("p must be positive and sum to 1");
    }
    c.tau_kind = parse_tau_kind(r.get_string(key("tau_kind"), "constant"));
    c.aa = r.get_double(key("AA"), 1.0);
    c.theta_tau = r.get_double(key("theta_tau"), 0.0);
    c.f_kind = parse_mee_kind(r.get_string(key("f_kind"), "constant"));
    c.theta_f.resize(c.K);
    c.sate.resize(c.K);
    for (int k = 1; k <= c.K; ++k) {
        c.theta_f(k - 1) = r.get_double(key("theta_f" + std::to_string(k)), 0.0);
        c.sate(k - 1) = r.get_double(key("sate" + std::to_string(k)), 0.0);
    }
    c.g_kind = parse_eo_kind(r.get_string(key("g_kind"), "constant"));
    c.theta_g = r.get_double(key("theta_g"), 0.0);
    c.aeo = r.get_double(key("AEO"), 0.0);
    const int g_dim = c.g_kind == EoKind::constant ? 1 : (c.g_kind == EoKind::linear ? 2 : 3);
    c.q = static_cast<int>(r.get_int(key("q"), g_dim));
    c.l_matrix = parse_matrix_text(r.get_string(key("L"), c.K == 1 ? "1" : "pairwise(1,2)"), c.K);
    c.eta = r.get_double(key("eta"), 0.05);
    c.power = r.get_double(key("power"), 0.8);
    c.n_cap = r.get_int(key("n_cap"), 1000000);
    c.scaling = parse_f_scaling(r.get_string(key("scaling"), "printed"));
    return c;
}

DesignConfig design_config_from(const KeyValues& kv) {
    ConfigReader r(kv);
    auto cfg = read_design_config(r);
    r.reject_unknown();
    return cfg;
}

KeyValues to_key_values(const DesignConfig& c) {
    KeyValues kv;
    kv["K"] = std::to_string(c.K);
    kv["T"] = std::to_string(c.T);
    std::string p;
    for (Eigen::Index k = 0; k < c.probs.size(); ++k) p += (k ? "," : "") + format_number(c.probs(k));
    kv["p"] = p;
    kv["tau_kind"] = std::string(to_string(c.tau_kind));
    kv["AA"] = format_number(c.aa);
    kv["theta_tau"] = format_number(c.theta_tau);
    kv["f_kind"] = std::string(to_string(c.f_kind));
    for (int k = 1; k <= c.K; ++k) {
        kv["theta_f" + std::to_string(k)] = format_number(c.theta_f(k - 1));
        kv["sate" + std::to_string(k)] = format_number(c.sate(k - 1));
    }
    kv["g_kind"] = std::string(to_string(c.g_kind));
    kv["theta_g"] = format_number(c.theta_g);
    kv["AEO"] = format_number(c.aeo);
    kv["q"] = std::to_string(c.q);
    kv["L"] = format_matrix_text(c.l_matrix);
    kv["eta"] = format_number(c.eta);
    kv["power"] = format_number(c.power);
    kv["n_cap"] = std::to_string(c.n_cap);
    kv["scaling"] = std::string(to_string(c.scaling));
    return kv;
}

DesignPatterns build_patterns(const DesignConfig& c) {
    DesignPatterns out;
    out.tau = tau_pattern(c.tau_kind, c.aa, c.theta_tau, c.T);
    out.eo = eo_pattern(c.g_kind, c.theta_g, c.aeo, out.tau);
    out.mee = mee_pattern(c.f_kind, c.theta_f, c.sate, out.tau);
    return out;
}

DesignInputs to_design_inputs(const DesignConfig& c) {
    const auto patterns = build_patterns(c);
    DesignInputs in;
    in.k_arms = c.K;
    in.t_points = c.T;
    in.rand_probs = c.probs.tail(c.K).transpose().replicate(c.T, 1);
    in.tau = patterns.tau;
    in.f = polynomial_basis(c.T, static_cast<int>(patterns.mee.coefficients.rows()) - 1);
    in.gamma = patterns.mee.gamma;
    in.q = c.q;
    in.l_matrix = c.l_matrix;
    in.eta = c.eta;
    in.power_target = c.power;
    in.n_cap = c.n_cap;
    return in;
}

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ValidationError("sweep must look like key=lo:hi:step");
    SweepSpec s;
    s.key = trim(text.substr(0, eq));
    const auto parts = split_fields(text.substr(eq + 1), ':');
    if (s.key.empty() || parts.size() != 3) throw ValidationError("sweep must look like key=lo:hi:step");
    const double lo = to_double("sweep", parts[0]);
    const double hi = to_double("sweep", parts[1]);
    const double step = to_double("sweep", parts[2]);
    if (!(step > 0.0) || hi < lo) throw ValidationError("sweep needs step > 0 and lo <= hi");
    const long long count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9)) + 1;
    if (count > 100000) throw ValidationError("sweep has too many points");
    for (long long i = 0; i < count; ++i) {
        // Round to 12 significant digits so 0.1 steps print cleanly.
        std::ostringstream os;
        os.precision(12);
        os << lo + static_cast<double>(i) * step;
        s.values.push_back(std::stod(os.str()));
    }
    return s;
}

}  // namespace mrtcee
