#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrtcee/design.hpp"
#include "mrtcee/inference.hpp"
#include "mrtcee/patterns.hpp"

namespace mrtcee {

/// Flat `key = value` text. '#' starts a comment; keys are unique.
using KeyValues = std::map<std::string, std::string>;

KeyValues parse_key_values(std::istream& in, const std::string& source = "<config>");
KeyValues load_key_values(const std::string& path);
void write_key_values(std::ostream& out, const KeyValues& kv);

/// Typed access that remembers which keys were read, so leftovers can be reported.
class ConfigReader {
public:
    explicit ConfigReader(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    bool used(const std::string& key) const { return used_.count(key) != 0; }
    std::string get_string(const std::string& key);
    std::string get_string(const std::string& key, const std::string& fallback);
    double get_double(const std::string& key);
    double get_double(const std::string& key, double fallback);
    long long get_int(const std::string& key);
    long long get_int(const std::string& key, long long fallback);
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
    std::vector<double> get_doubles(const std::string& key);

    /// Throws ValidationError naming every key that was never read.
    void reject_unknown() const;

private:
    const std::string& raw(const std::string& key);

    const KeyValues& kv_;
    std::set<std::string> used_;
};

/// Rows separated by ';', entries by ','; or a preset name (see contrast_preset).
Eigen::MatrixXd parse_matrix_text(const std::string& text, int K);
std::string format_matrix_text(const Eigen::MatrixXd& m);

/// Pattern-level description of a trial design.
struct DesignConfig {
    int K = 2;
    int T = 1;
    Eigen::VectorXd probs;  // K + 1 entries, arm 0 first
    TauKind tau_kind = TauKind::constant;
    double aa = 1.0;
    double theta_tau = 0.0;
    MeeKind f_kind = MeeKind::constant;
    Eigen::VectorXd theta_f;  // K
    Eigen::VectorXd sate;     // K
    EoKind g_kind = EoKind::constant;
    double theta_g = 0.0;
    double aeo = 0.0;
    int q = 1;
    Eigen::MatrixXd l_matrix;
    double eta = 0.05;
    double power = 0.8;
    long long n_cap = 1000000;
    FScaling scaling = FScaling::printed;
};

/// Reads the design keys K, T, p, tau_kind, AA, theta_tau, f_kind,
/// theta_f1.., sate1.., g_kind, theta_g, AEO, q, L, eta, power, n_cap, scaling.
/// `prefix` is prepended to every key name.
DesignConfig read_design_config(ConfigReader& reader, const std::string& prefix = "");
DesignConfig design_config_from(const KeyValues& kv);
KeyValues to_key_values(const DesignConfig& cfg);

struct DesignPatterns {
    Eigen::VectorXd tau;
    EoPattern eo;
    MeePattern mee;
};

DesignPatterns build_patterns(const DesignConfig& cfg);
DesignInputs to_design_inputs(const DesignConfig& cfg);

/// Values lo, lo + step, ... <= hi of a `key=lo:hi:step` sweep.
struct SweepSpec {
    std::string key;
    std::vector<double> values;
};

SweepSpec parse_sweep(const std::string& text);

/// Shortest round-trip decimal text of a double.
std::string format_number(double v);

}  // namespace mrtcee
