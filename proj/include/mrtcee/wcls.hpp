#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mrtcee/data.hpp"

namespace mrtcee {

enum class Correction { none, mancl_derouen };

Correction parse_correction(std::string_view name);
std::string_view to_string(Correction c);

/// Analysis model: f_t(S_t) moderates the arm effects, g_t(H_t) is the
/// working model for the control mean, delta is the excursion length.
struct ModelSpec {
    std::vector<std::string> f_columns;
    bool f_intercept = true;
    std::vector<std::string> g_columns;
    bool g_intercept = true;
    int delta = 1;
    NumeratorPolicy numerator;
    Correction correction = Correction::mancl_derouen;

    int p() const { return static_cast<int>(f_columns.size()) + (f_intercept ? 1 : 0); }
    int q() const { return static_cast<int>(g_columns.size()) + (g_intercept ? 1 : 0); }
};

/// Stacked estimating-equation rows of one subject. Row r of `d_full` is
/// (g_t; C_1(A_t) f_t; ...; C_K(A_t) f_t) for decision point t[r]; `weight`
/// is I_t J_t, so unavailable points stay in the stack with weight zero.
struct SubjectDesign {
    std::vector<int> t;
    std::vector<int> arm;
    Eigen::MatrixXd d_full;
    Eigen::VectorXd weight;
    Eigen::VectorXd outcome;
};

struct Design {
    std::vector<SubjectDesign> subjects;
    int q = 0;
    int p = 0;
    int K = 0;
    int T = 0;
    std::vector<std::string> alpha_names;
    std::vector<std::string> beta_names;
    Eigen::MatrixXd numerator;  // T x (K + 1)

    int n() const { return static_cast<int>(subjects.size()); }
    int dim() const { return q + K * p; }
    int beta_dim() const { return K * p; }
};

/// Weights J_t and centered indicators C_k(A_t) for every subject and every
/// t with t + delta - 1 <= T. Throws ValidationError on positivity failures.
Design build_design_rows(const MrtDataset& data, const ModelSpec& spec);

struct SandwichResult {
    Eigen::MatrixXd cov_beta;   // (1/n) M^-1 Sigma M^-T
    Eigen::MatrixXd bread;      // M-hat
    Eigen::MatrixXd meat;       // Sigma-hat
    int fallback_subjects = 0;  // subjects where I - H_i was singular
};

SandwichResult sandwich_variance(const Design& design, const std::vector<Eigen::VectorXd>& residuals,
                                 Correction correction);

struct FitResult {
    Eigen::VectorXd alpha_hat;
    Eigen::VectorXd beta_hat;  // (beta_1; ...; beta_K)
    Eigen::MatrixXd cov_beta;
    int n = 0;
    int T = 0;
    int K = 0;
    int p = 0;
    int q = 0;
    std::vector<Eigen::VectorXd> residuals;
    std::vector<std::string> alpha_names;
    std::vector<std::string> beta_names;
    Correction correction = Correction::none;
    int correction_fallbacks = 0;
    double condition_estimate = 1.0;
};

/// Solves the linear estimating equation exactly and attaches the sandwich covariance.
FitResult fit_wcls(const MrtDataset& data, const ModelSpec& spec);
FitResult fit_wcls(const Design& design, Correction correction);

/// Sample mean of the estimating function at theta = (alpha; beta).
Eigen::VectorXd estimating_equation(const Design& design, const Eigen::VectorXd& theta);

}  // namespace mrtcee
