#include "mrtcee/wcls.hpp"

#include <cmath>

#include "mrtcee/errors.hpp"
#include "mrtcee/numerics.hpp"

namespace mrtcee {

namespace {

struct ColumnPlan {
    bool intercept = true;
    std::vector<int> feature_idx;
    std::vector<std::string> names;
};

ColumnPlan plan_columns(const MrtDataset& data, const std::vector<std::string>& cols, bool intercept,
                        const char* which) {
    ColumnPlan plan;
    plan.intercept = intercept;
    if (intercept) plan.names.emplace_back("(Intercept)");
    for (const auto& c : cols) {
        const auto idx = data.feature_index(c);
        if (!idx) {
            throw ValidationError(std::string("missing column: ") + which + " feature '" + c +
                                  "' is not in the dataset");
        }
        plan.feature_idx.push_back(*idx);
        plan.names.push_back(c);
    }
    if (plan.names.empty()) {
        throw ValidationError(std::string(which) + " must have at least one column");
    }
    return plan;
}

Eigen::RowVectorXd columns(const ColumnPlan& plan, const DecisionRecord& rec, double scale) {
    Eigen::RowVectorXd out(plan.names.size());
    Eigen::Index c = 0;
    if (plan.intercept) out(c++) = scale;
    for (int idx : plan.feature_idx) out(c++) = scale * rec.features(idx);
    return out;
}

}  // namespace

Correction parse_correction(std::string_view name) {
    if (name == "none") return Correction::none;
    if (name == "mancl_derouen") return Correction::mancl_derouen;
    throw ValidationError("unknown correction '" + std::string(name) + "' (expected none or mancl_derouen)");
}

std::string_view to_string(Correction c) {
    return c == Correction::none ? "none" : "mancl_derouen";
}

Design build_design_rows(const MrtDataset& data, const ModelSpec& spec) {
    if (spec.delta < 1) {
        throw ValidationError("excursion length delta must be at least 1");
    }
    if (spec.delta > data.T) {
        throw ValidationError("excursion length delta exceeds the number of decision points");
    }
    const auto g_plan = plan_columns(data, spec.g_columns, spec.g_intercept, "g");
    const auto f_plan = plan_columns(data, spec.f_columns, spec.f_intercept, "f");

    Design design;
    design.q = static_cast<int>(g_plan.names.size());
    design.p = static_cast<int>(f_plan.names.size());
    design.K = data.K;
    design.T = data.T;
    design.numerator = fit_numerator_probs(data, spec.numerator);
    design.alpha_names = g_plan.names;
    for (int k = 1; k <= data.K; ++k) {
        for (const auto& fname : f_plan.names) {
            design.beta_names.push_back("beta" + std::to_string(k) +
                                        (design.p > 1 ? "[" + fname + "]" : std::string()));
        }
    }

    const int rows = data.T - spec.delta + 1;
    const int q = design.q;
    const int p = design.p;
    design.subjects.reserve(data.subjects.size());
    for (const auto& subject : data.subjects) {
        SubjectDesign sd;
        sd.t.resize(rows);
        sd.arm.resize(rows);
        sd.d_full.setZero(rows, design.dim());
        sd.weight.setZero(rows);
        sd.outcome.setZero(rows);
        for (int t = 0; t < rows; ++t) {
            const auto& rec = subject.records[t];
            sd.t[t] = t;
            sd.arm[t] = rec.treatment;
            sd.outcome(t) = rec.outcome;
            sd.d_full.row(t).segment(0, q) = columns(g_plan, rec, 1.0);
            for (int k = 1; k <= data.K; ++k) {
                const double centered = (rec.treatment == k ? 1.0 : 0.0) - design.numerator(t, k);
                sd.d_full.row(t).segment(q + (k - 1) * p, p) = columns(f_plan, rec, centered);
            }
            if (rec.availability == 0) {
                continue;
            }
            const double denom = rec.rand_probs(rec.treatment);
            if (!(denom > 0.0)) {
                throw ValidationError("positivity violation: subject " + subject.subject_id +
                                      " received arm " + std::to_string(rec.treatment) +
                                      " with zero randomization probability at t = " +
                                      std::to_string(t + 1));
            }
            double w = design.numerator(t, rec.treatment) / denom;
            for (int j = t + 1; j < t + spec.delta && w != 0.0; ++j) {
                const auto& next = subject.records[j];
                if (next.treatment != 0) {
                    w = 0.0;  // 0/0 = 0 convention covers a zero denominator here
                    break;
                }
                // Unavailable points receive arm 0 with certainty.
                const double p0 = next.availability == 1 ? next.rand_probs(0) : 1.0;
                if (!(p0 > 0.0)) {
                    throw ValidationError("positivity violation: subject " + subject.subject_id +
                                          " has zero probability of arm 0 at t = " + std::to_string(j + 1));
                }
                w /= p0;
            }
            sd.weight(t) = w;
        }
        design.subjects.push_back(std::move(sd));
    }
    return design;
}

Eigen::VectorXd estimating_equation(const Design& design, const Eigen::VectorXd& theta) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(design.dim());
    for (const auto& sd : design.subjects) {
        const Eigen::VectorXd r = sd.outcome - sd.d_full * theta;
        total.noalias() += sd.d_full.transpose() * sd.weight.cwiseProduct(r);
    }
    return total / static_cast<double>(design.n());
}

SandwichResult sandwich_variance(const Design& design, const std::vector<Eigen::VectorXd>& residuals,
                                 Correction correction) {
    const int n = design.n();
    const int dim = design.dim();
    const int kp = design.beta_dim();
    if (static_cast<int>(residuals.size()) != n) {
        throw ValidationError("sandwich_variance: one residual vector per subject is required");
    }
    if (n <= dim) {
        throw NumericalError("covariance needs more subjects than parameters (n = " + std::to_string(n) +
                             ", q + Kp = " + std::to_string(dim) + ")");
    }

    SandwichResult result;
    result.bread = Eigen::MatrixXd::Zero(kp, kp);
    Eigen::MatrixXd full_normal;
    if (correction == Correction::mancl_derouen) {
        full_normal = Eigen::MatrixXd::Zero(dim, dim);
    }
    for (const auto& sd : design.subjects) {
        const auto d = sd.d_full.rightCols(kp);
        result.bread.noalias() += d.transpose() * sd.weight.asDiagonal() * d;
        if (correction == Correction::mancl_derouen) {
            full_normal.noalias() += sd.d_full.transpose() * sd.weight.asDiagonal() * sd.d_full;
        }
    }
    result.bread /= static_cast<double>(n);

    Eigen::MatrixXd full_inverse;
    if (correction == Correction::mancl_derouen) {
        full_inverse = spd_inverse(full_normal);
    }

    result.meat = Eigen::MatrixXd::Zero(kp, kp);
    for (int i = 0; i < n; ++i) {
        const auto& sd = design.subjects[i];
        Eigen::VectorXd e = residuals[i];
        if (correction == Correction::mancl_derouen) {
            const Eigen::Index m = sd.d_full.rows();
            const Eigen::MatrixXd hat =
                sd.d_full * full_inverse * sd.d_full.transpose() * sd.weight.asDiagonal();
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(m, m) - hat);
            if (lu.rcond() > 1.0 / kSingularConditionBound) {
                e = lu.solve(e);
            } else {
                ++result.fallback_subjects;
            }
        }
        const Eigen::VectorXd u = sd.d_full.rightCols(kp).transpose() * sd.weight.cwiseProduct(e);
        result.meat.noalias() += u * u.transpose();
    }
    result.meat /= static_cast<double>(n);

    const Eigen::MatrixXd bread_inv = spd_inverse(result.bread);
    Eigen::MatrixXd cov = bread_inv * result.meat * bread_inv.transpose() / static_cast<double>(n);
    result.cov_beta = 0.5 * (cov + cov.transpose());
    return result;
}

FitResult fit_wcls(const Design& design, Correction correction) {
    const int dim = design.dim();
    const int kp = design.beta_dim();

    for (int k = 1; k <= design.K; ++k) {
        bool seen = false;
        for (const auto& sd : design.subjects) {
            for (Eigen::Index r = 0; r < sd.weight.size() && !seen; ++r) {
                seen = sd.weight(r) > 0.0 && sd.arm[r] == k;
            }
            if (seen) break;
        }
        if (!seen) {
            throw NumericalError("singular normal matrix: arm " + std::to_string(k) +
                                 " is never observed at a positive-weight decision point");
        }
    }

    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    for (const auto& sd : design.subjects) {
        normal.noalias() += sd.d_full.transpose() * sd.weight.asDiagonal() * sd.d_full;
        rhs.noalias() += sd.d_full.transpose() * sd.weight.cwiseProduct(sd.outcome);
    }

    SpdSolveReport solved;
    try {
        solved = solve_spd(normal, rhs);
    } catch (const NumericalError&) {
        throw NumericalError("singular normal matrix: check for constant-zero feature columns, "
                             "collinear features, or a treatment arm that is never observed");
    }
    const Eigen::VectorXd& theta = solved.solution;

    FitResult fit;
    fit.alpha_hat = theta.head(design.q);
    fit.beta_hat = theta.tail(kp);
    fit.n = design.n();
    fit.T = design.T;
    fit.K = design.K;
    fit.p = design.p;
    fit.q = design.q;
    fit.alpha_names = design.alpha_names;
    fit.beta_names = design.beta_names;
    fit.correction = correction;
    fit.condition_estimate = solved.condition_estimate;
    fit.residuals.reserve(design.subjects.size());
    for (const auto& sd : design.subjects) {
        fit.residuals.push_back(sd.outcome - sd.d_full * theta);
    }

    const auto sandwich = sandwich_variance(design, fit.residuals, correction);
    fit.cov_beta = sandwich.cov_beta;
    fit.correction_fallbacks = sandwich.fallback_subjects;
    return fit;
}

FitResult fit_wcls(const MrtDataset& data, const ModelSpec& spec) {
    return fit_wcls(build_design_rows(data, spec), spec.correction);
}

}  // namespace mrtcee
