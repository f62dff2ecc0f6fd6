#pragma once

#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

#include "mrtcee/data.hpp"
#include "mrtcee/patterns.hpp"

namespace mrtcee {

/// gm0: i.i.d. N(0,1) noise. gm_ev: noise r(t) s(A_t) eps_t. gm_sc: noise
/// nu1 eps_{t-1} + nu0 eps_t. gm_ea: availability driven by the previous
/// arm and noise. consistency: three-level covariate Z with fixed
/// Z-moderated effects and arm probabilities taken from rand_probs.
enum class Family { gm0, gm_ev, gm_sc, gm_ea, consistency };

Family parse_family(std::string_view name);
std::string_view to_string(Family f);

struct GenerativeConfig {
    Family family = Family::gm0;
    int T = 1;
    int K = 2;
    Eigen::MatrixXd rand_probs;  // T x (K + 1), arm 0 first
    Eigen::VectorXd tau;         // T
    Eigen::VectorXd eo_coeffs;   // on polynomial_basis(T, size - 1)
    Eigen::MatrixXd mee_coeffs;  // p x K on polynomial_basis(T, p - 1)
    double theta_r = 0.0;
    double theta_s = 0.0;
    double nu1 = 0.0;
    double nu2 = 0.0;
    double nu3 = 0.0;
};

/// Throws ValidationError when the configuration cannot generate data.
void validate(const GenerativeConfig& config);

struct SimulationDiagnostics {
    long long clipped_probabilities = 0;
};

/// Features: "time" (t), "time2" (t^2), plus "z" for the consistency family.
MrtDataset simulate_trial(const GenerativeConfig& config, int n, std::uint64_t seed,
                          SimulationDiagnostics* diagnostics = nullptr);

struct GmEvScales {
    double r = 1.0;
    Eigen::VectorXd s;  // s(0), s(1), s(2)
};

/// r(t)^2 moves linearly from 1 + theta_r at t = 1 to 1 - theta_r at t = T;
/// s(a)^2 = a0 + 1(a=1) theta_s + 1(a=2) b with sum_k p(k) s(k)^2 = 1.
/// `probs` holds p(0), p(1), p(2); t is 1-based.
GmEvScales gm_ev_scales(double theta_r, double theta_s, const Eigen::VectorXd& probs, int t, int T);

/// Avalanche mix of (master, index); injective in index for fixed master.
std::uint64_t derive_replicate_seed(std::uint64_t master, std::uint64_t index);

/// Marginal effects of the consistency family, (E[0.1 + 0.3 Z], E[0.45 + 0.1 Z]).
Eigen::Vector2d consistency_true_effects();

}  // namespace mrtcee
