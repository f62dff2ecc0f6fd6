#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace mrtcee {

enum class TauKind { constant, linear };
enum class EoKind { constant, linear, quadratic };
enum class MeeKind { constant, linear };

TauKind parse_tau_kind(std::string_view name);
EoKind parse_eo_kind(std::string_view name);
MeeKind parse_mee_kind(std::string_view name);
std::string_view to_string(TauKind k);
std::string_view to_string(EoKind k);
std::string_view to_string(MeeKind k);

/// Rows (1, t, ..., t^degree) for t = 1..T.
Eigen::MatrixXd polynomial_basis(int T, int degree);

/// Availability curve: constant AA, or linear from AA + theta at t = 1 to
/// AA - theta at t = T. Throws ValidationError unless every value is in (0, 1].
Eigen::VectorXd tau_pattern(TauKind kind, double aa, double theta_tau, int T);

struct EoPattern {
    Eigen::VectorXd alpha;  // coefficients on polynomial_basis(T, alpha.size() - 1)
    Eigen::VectorXd eo;     // EO(t), t = 1..T
};

/// Expected outcome under arm 0 with the shape set by theta_g and the
/// availability-weighted average fixed at aeo.
EoPattern eo_pattern(EoKind kind, double theta_g, double aeo, const Eigen::VectorXd& tau);

struct MeePattern {
    Eigen::MatrixXd coefficients;  // p x K, column k-1 holds gamma_k on polynomial_basis
    Eigen::VectorXd gamma;         // stacked (gamma_1; ...; gamma_K)
    Eigen::MatrixXd smee;          // T x K
};

/// Standardized marginal effects. Arm 1 has ratio parameter theta_f(0) and
/// weighted average sate(0); arm k > 1 is arm 1 plus a difference curve with
/// ratio parameter theta_f(k-1) and weighted average sate(k-1) - sate(0).
MeePattern mee_pattern(MeeKind kind, const Eigen::VectorXd& theta_f, const Eigen::VectorXd& sate,
                       const Eigen::VectorXd& tau);

MeePattern mee_pattern(MeeKind kind, double theta_f1, double theta_f2, double sate1, double sate2,
                       const Eigen::VectorXd& tau);

struct EffectSummary {
    Eigen::VectorXd sate;
    Eigen::VectorXd delta_sate;
    double aeo = 0.0;
    double aa = 0.0;
};

EffectSummary summarize_effects(const Eigen::MatrixXd& smee, const Eigen::VectorXd& eo,
                                const Eigen::VectorXd& tau, const Eigen::MatrixXd& l_matrix);

}  // namespace mrtcee
