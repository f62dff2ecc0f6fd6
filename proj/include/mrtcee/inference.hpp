#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mrtcee/wcls.hpp"

namespace mrtcee {

struct ContrastSpec {
    Eigen::MatrixXd l_matrix;  // nu x K
    int p = 1;
    Eigen::MatrixXd l_tilde;   // nu p x K p, kron(L, I_p)
    int rank_l = 0;
};

/// Lifts L to the coefficient space; rank by column-pivoted QR with
/// tolerance 1e-10 * ||L||.
ContrastSpec build_contrast(const Eigen::MatrixXd& l_matrix, int p);

/// `all-null` (L = I_K) or `pairwise(j,k)` (e_j - e_k), arms 1-based.
Eigen::MatrixXd contrast_preset(std::string_view name, int K);

/// Contrast rows from a CSV file with K numeric columns; blank lines and
/// lines starting with '#' are skipped, a non-numeric first line is a header.
Eigen::MatrixXd load_contrast_csv(const std::string& path, int K);

/// "beta1-beta2", "0.5*beta1+beta2", ... for one row of L.
std::string contrast_label(const Eigen::RowVectorXd& row);

/// printed: (n-q-l)/(l(n-q-l)); alternative: (n-q-l)/(l(n-q-1)).
enum class FScaling { printed, alternative };

FScaling parse_f_scaling(std::string_view name);
std::string_view to_string(FScaling s);
double f_scaling_factor(FScaling s, int n, int q, int l);

struct TestResult {
    double statistic = 0.0;
    double scaled_statistic = 0.0;
    int df1 = 0;
    int df2 = 0;
    double p_value = 1.0;
    bool reject = false;
    double critical_value = 0.0;
};

/// Tests L~ beta = 0 on rank(L~) = p rank(L) numerator degrees of freedom.
TestResult wald_test(const FitResult& fit, const ContrastSpec& contrast, double eta,
                     FScaling scaling = FScaling::printed);

struct IntervalRow {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double p_value = 1.0;
};

/// One interval per row c of `rows` (each of length Kp), using the
/// quantile sqrt(F^-1_{1, n-q-1}(1 - eta)).
std::vector<IntervalRow> confidence_intervals(const FitResult& fit, const Eigen::MatrixXd& rows,
                                              const std::vector<std::string>& names, double eta);

/// Intervals for every coordinate of beta-hat, named after the fit's beta names.
std::vector<IntervalRow> coefficient_intervals(const FitResult& fit, double eta);

}  // namespace mrtcee
