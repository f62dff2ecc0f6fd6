#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrtcee/inference.hpp"
#include "mrtcee/simulator.hpp"
#include "mrtcee/wcls.hpp"

namespace mrtcee {

struct McOptions {
    int n = 0;
    int replicates = 1;
    std::uint64_t seed = 0;
    int threads = 0;  // 0: default_thread_count()
    ModelSpec spec;
    Eigen::MatrixXd l_matrix;  // nu x K
    double eta = 0.05;
    FScaling scaling = FScaling::printed;
    Eigen::VectorXd true_beta;  // K p; empty disables bias and coverage
};

struct ReplicateResult {
    int index = 0;
    bool ok = false;
    std::string error;
    Eigen::VectorXd beta_hat;
    Eigen::VectorXd se;
    std::vector<char> covered;
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
};

struct McSummary {
    int replicates = 0;
    int failures = 0;
    std::uint64_t seed = 0;
    int n = 0;
    std::vector<std::string> names;
    Eigen::VectorXd true_beta;
    Eigen::VectorXd mean_estimate;
    Eigen::VectorXd bias;
    Eigen::VectorXd rmse;
    Eigen::VectorXd mean_se;
    Eigen::VectorXd empirical_sd;
    Eigen::VectorXd coverage;
    double rejection_rate = 0.0;
    long long clipped_probabilities = 0;
};

/// MRTCEE_THREADS when set to a positive integer, otherwise the hardware concurrency.
int default_thread_count();

/// Replicate r simulates with derive_replicate_seed(seed, r), fits, and
/// tests; aggregation runs in index order so results do not depend on the
/// thread count. Failed replicates are excluded; more than 1% failures
/// throws NumericalError.
McSummary run_monte_carlo(const GenerativeConfig& config, const McOptions& options,
                          std::vector<ReplicateResult>* per_replicate = nullptr);

}  // namespace mrtcee
