#include "mrtcee/inference.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <sstream>

#include "mrtcee/csv.hpp"
#include "mrtcee/errors.hpp"
#include "mrtcee/numerics.hpp"
#include "mrtcee/special_functions.hpp"

namespace mrtcee {

namespace {

void check_eta(double eta) {
    if (!(eta > 0.0 && eta < 1.0)) {
        throw ValidationError("significance level must lie in (0, 1)");
    }
}

std::string format_coef(double c) {
    std::ostringstream os;
    os.precision(6);
    os << c;
    return os.str();
}

}  // namespace

ContrastSpec build_contrast(const Eigen::MatrixXd& l_matrix, int p) {
    if (p < 1) {
        throw ValidationError("moderator dimension p must be at least 1");
    }
    if (l_matrix.size() == 0 || !l_matrix.allFinite()) {
        throw ValidationError("contrast matrix must be non-empty and finite");
    }
    const double norm = l_matrix.norm();
    if (norm == 0.0) {
        throw ValidationError("contrast matrix is zero");
    }
    ContrastSpec c;
    c.l_matrix = l_matrix;
    c.p = p;
    c.l_tilde = kron(l_matrix, Eigen::MatrixXd::Identity(p, p));
    c.rank_l = numerical_rank(l_matrix, 1e-10 * norm);
    return c;
}

Eigen::MatrixXd contrast_preset(std::string_view name, int K) {
    if (K < 1) {
        throw ValidationError("contrast preset needs K >= 1");
    }
    const std::string text(name);
    if (text == "all-null") {
        return Eigen::MatrixXd::Identity(K, K);
    }
    static const std::regex pairwise(R"(\s*pairwise\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*)");
    std::smatch m;
    if (std::regex_match(text, m, pairwise)) {
        const int j = std::stoi(m[1]);
        const int k = std::stoi(m[2]);
        if (j < 1 || k < 1 || j > K || k > K || j == k) {
            throw ValidationError("pairwise(j,k) needs distinct arms in 1.." + std::to_string(K));
        }
        Eigen::MatrixXd l = Eigen::MatrixXd::Zero(1, K);
        l(0, j - 1) = 1.0;
        l(0, k - 1) = -1.0;
        return l;
    }
    throw ValidationError("unknown contrast preset '" + text + "' (expected all-null or pairwise(j,k))");
}

Eigen::MatrixXd load_contrast_csv(const std::string& path, int K) {
    return load_numeric_matrix(path, K);
}

std::string contrast_label(const Eigen::RowVectorXd& row) {
    std::string out;
    for (Eigen::Index k = 0; k < row.size(); ++k) {
        const double c = row(k);
        if (c == 0.0) continue;
        const std::string term = "beta" + std::to_string(k + 1);
        if (!out.empty() && c > 0.0) out += '+';
        if (c == 1.0) {
            out += term;
        } else if (c == -1.0) {
            out += "-" + term;
        } else {
            out += format_coef(c) + "*" + term;
        }
    }
    return out.empty() ? "0" : out;
}

FScaling parse_f_scaling(std::string_view name) {
    if (name == "printed") return FScaling::printed;
    if (name == "alternative") return FScaling::alternative;
    throw ValidationError("unknown F scaling '" + std::string(name) + "' (expected printed or alternative)");
}

std::string_view to_string(FScaling s) {
    return s == FScaling::printed ? "printed" : "alternative";
}

double f_scaling_factor(FScaling s, int n, int q, int l) {
    const double num = static_cast<double>(n - q - l);
    const double den = s == FScaling::printed ? static_cast<double>(l) * (n - q - l)
                                              : static_cast<double>(l) * (n - q - 1);
    return num / den;
}

TestResult wald_test(const FitResult& fit, const ContrastSpec& contrast, double eta, FScaling scaling) {
    check_eta(eta);
    const int K = static_cast<int>(contrast.l_matrix.cols());
    if (K != fit.K || contrast.p != fit.p) {
        throw ValidationError("contrast dimensions do not match the fit (K = " + std::to_string(fit.K) +
                              ", p = " + std::to_string(fit.p) + ")");
    }
    // Degrees of freedom of the lifted hypothesis L~ beta = 0.
    const int l = contrast.rank_l * contrast.p;
    if (fit.n <= fit.q + l + 1) {
        throw ValidationError("insufficient subjects for the test: need n > q + l + 1");
    }

    // Redundant rows of L are replaced by an orthonormal basis of its row space.
    Eigen::MatrixXd l_tilde = contrast.l_tilde;
    if (contrast.rank_l < contrast.l_matrix.rows()) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(contrast.l_matrix.transpose());
        const Eigen::MatrixXd q_full = qr.householderQ();
        const Eigen::MatrixXd basis = q_full.leftCols(contrast.rank_l).transpose();
        l_tilde = kron(basis, Eigen::MatrixXd::Identity(fit.p, fit.p));
    }

    const Eigen::VectorXd v = l_tilde * fit.beta_hat;
    const Eigen::MatrixXd middle = l_tilde * fit.cov_beta * l_tilde.transpose();

    TestResult r;
    r.df1 = l;
    r.df2 = fit.n - fit.q - l;
    if (v.isZero(0.0)) {
        r.statistic = 0.0;
    } else {
        SpdSolveReport solved;
        try {
            solved = solve_spd(middle, v);
        } catch (const NumericalError&) {
            throw NumericalError("singular contrasted covariance L~ cov L~^T");
        }
        r.statistic = v.dot(solved.solution);
    }
    r.scaled_statistic = f_scaling_factor(scaling, fit.n, fit.q, l) * r.statistic;
    r.critical_value = f_quantile(r.df1, r.df2, 1.0 - eta);
    r.p_value = std::clamp(f_sf(r.df1, r.df2, r.scaled_statistic), 0.0, 1.0);
    r.reject = r.scaled_statistic > r.critical_value;
    return r;
}

std::vector<IntervalRow> confidence_intervals(const FitResult& fit, const Eigen::MatrixXd& rows,
                                              const std::vector<std::string>& names, double eta) {
    check_eta(eta);
    const int kp = fit.K * fit.p;
    if (rows.cols() != kp) {
        throw ValidationError("contrast rows must have K p = " + std::to_string(kp) + " entries");
    }
    if (static_cast<Eigen::Index>(names.size()) != rows.rows()) {
        throw ValidationError("one name per contrast row is required");
    }
    if (fit.n <= fit.q + 2) {
        throw ValidationError("insufficient subjects for intervals: need n > q + 2");
    }
    const int df2 = fit.n - fit.q - 1;
    const double quantile = std::sqrt(f_quantile(1.0, df2, 1.0 - eta));
    std::vector<IntervalRow> out;
    out.reserve(rows.rows());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const Eigen::RowVectorXd c = rows.row(i);
        if (c.isZero(0.0)) {
            throw ValidationError("zero contrast in row " + std::to_string(i + 1));
        }
        IntervalRow row;
        row.name = names[i];
        row.estimate = c.dot(fit.beta_hat);
        const double var = c * fit.cov_beta * c.transpose();
        if (!(var > 0.0)) {
            throw NumericalError("non-positive variance for contrast '" + row.name + "'");
        }
        row.se = std::sqrt(var);
        row.lower = row.estimate - quantile * row.se;
        row.upper = row.estimate + quantile * row.se;
        const double z2 = row.estimate * row.estimate / var;
        row.p_value = std::clamp(f_sf(1.0, df2, z2), 0.0, 1.0);
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<IntervalRow> coefficient_intervals(const FitResult& fit, double eta) {
    const int kp = fit.K * fit.p;
    return confidence_intervals(fit, Eigen::MatrixXd::Identity(kp, kp), fit.beta_names, eta);
}

}  // namespace mrtcee
