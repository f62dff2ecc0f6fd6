#pragma once

#include <optional>
#include <string>

#include "mrtcee/config.hpp"
#include "mrtcee/design.hpp"
#include "mrtcee/monte_carlo.hpp"
#include "mrtcee/simulator.hpp"

namespace mrtcee {

/// A simulation experiment: the true generative design, the working design
/// a planner would assume (truth overridden by `working.<key>` entries), and
/// the analysis model derived from the working design.
struct Scenario {
    std::string name;
    DesignConfig truth;
    DesignConfig working;
    GenerativeConfig generative;
    McOptions options;
    std::optional<SampleSizeResult> planned;  // set when n came from the calculator
};

/// Keys: every design key, plus family, nu1, nu2, nu3, theta_r, theta_s,
/// replicates, seed, n, numerator, correction, name and working.<design key>.
Scenario scenario_from(const KeyValues& kv);
Scenario load_scenario(const std::string& path);

/// Analysis model implied by a working design: g from g_kind over
/// (time, time2), f from f_kind over (time).
ModelSpec analysis_model(const DesignConfig& working, Family family);

/// Probability limit of beta-hat when the analysis f basis may be coarser
/// than the truth: matching or richer bases keep the true coefficients,
/// a constant basis gets the availability-weighted average effect.
Eigen::VectorXd true_coefficients(const DesignConfig& truth, const ModelSpec& analysis, Family family);

}  // namespace mrtcee
