#pragma once

#include <Eigen/Dense>

namespace mrtcee {

/// Everything the sample-size calculator needs. Effects are standardized,
/// so gamma is in units of the average outcome standard deviation.
struct DesignInputs {
    int k_arms = 0;
    int t_points = 0;
    Eigen::MatrixXd rand_probs;  // T x K, p_t(1..K); p_t(0) is implied
    Eigen::VectorXd tau;         // T
    Eigen::MatrixXd f;           // T x p
    Eigen::VectorXd gamma;       // K p
    int q = 1;
    Eigen::MatrixXd l_matrix;    // nu x K
    double eta = 0.05;
    double power_target = 0.8;
    long long n_cap = 1000000;

    int p() const { return static_cast<int>(f.cols()); }
};

/// Throws ValidationError on any malformed input.
void validate(const DesignInputs& inputs);

/// diag(p) - p p^T for the active-arm probabilities.
Eigen::MatrixXd build_pt(const Eigen::VectorXd& probs);

/// sum_t tau(t) kron(P_t, f_t f_t^T); throws NumericalError when singular.
Eigen::MatrixXd build_v(const DesignInputs& inputs);

/// lambda(n) / n = (L~ gamma)^T (L~ V^-1 L~^T)^-1 (L~ gamma).
double lambda_per_subject(const DesignInputs& inputs);
double noncentrality(long long n, const DesignInputs& inputs);

/// 1 - ncF_cdf(l, n-q-l, lambda(n), F^-1_{l, n-q-l}(1 - eta)) with l = rank(L~) = p rank(L);
/// needs n > q + l + 1.
double power_at_n(const DesignInputs& inputs, long long n);

struct SampleSizeResult {
    long long n = 0;
    double achieved_power = 0.0;
    double lambda_per_n = 0.0;
    Eigen::MatrixXd V;
};

/// Smallest n >= max(10, q + l + 2) reaching the power target. Throws
/// ValidationError("effect too small ...") when n would exceed n_cap.
SampleSizeResult required_sample_size(const DesignInputs& inputs);

}  // namespace mrtcee
