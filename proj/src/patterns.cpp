#include "mrtcee/patterns.hpp"

#include <cmath>
#include <string>

#include "mrtcee/errors.hpp"
#include "mrtcee/numerics.hpp"

namespace mrtcee {

namespace {

void check_theta(double theta, const char* name) {
    if (!(std::abs(theta) < 1.0)) {
        throw ValidationError(std::string(name) + " must lie in (-1, 1)");
    }
}

void check_tau(const Eigen::VectorXd& tau) {
    if (tau.size() == 0) {
        throw ValidationError("availability curve is empty");
    }
    for (Eigen::Index t = 0; t < tau.size(); ++t) {
        if (!(tau(t) > 0.0 && tau(t) <= 1.0)) {
            throw ValidationError("availability tau(t) must lie in (0, 1]; tau(" + std::to_string(t + 1) +
                                  ") = " + std::to_string(tau(t)));
        }
    }
}

// tau-weighted averages of 1, t, t^2, ...
Eigen::RowVectorXd weighted_moments(const Eigen::VectorXd& tau, int degree) {
    const Eigen::MatrixXd basis = polynomial_basis(static_cast<int>(tau.size()), degree);
    return (tau.transpose() * basis) / tau.sum();
}

// Coefficients (c0, c1) of c0 + c1 t with curve(1)/curve(T) = (1+theta)/(1-theta)
// in cross-multiplied form and tau-weighted average `target`.
Eigen::Vector2d linear_ratio_curve(double theta, double target, const Eigen::VectorXd& tau) {
    const int T = static_cast<int>(tau.size());
    if (T < 2) {
        throw ValidationError("linear patterns need T >= 2");
    }
    Eigen::Matrix2d a;
    a << -2.0 * theta, (1.0 - theta) - T * (1.0 + theta),
        weighted_moments(tau, 1);
    Eigen::Vector2d rhs(0.0, target);
    try {
        return solve_square(a, rhs);
    } catch (const NumericalError&) {
        throw NumericalError("singular pattern system for theta = " + std::to_string(theta));
    }
}

}  // namespace

TauKind parse_tau_kind(std::string_view name) {
    if (name == "constant") return TauKind::constant;
    if (name == "linear") return TauKind::linear;
    throw ValidationError("unknown tau_kind '" + std::string(name) + "' (expected constant or linear)");
}

EoKind parse_eo_kind(std::string_view name) {
    if (name == "constant") return EoKind::constant;
    if (name == "linear") return EoKind::linear;
    if (name == "quadratic") return EoKind::quadratic;
    throw ValidationError("unknown g_kind '" + std::string(name) + "' (expected constant, linear or quadratic)");
}

MeeKind parse_mee_kind(std::string_view name) {
    if (name == "constant") return MeeKind::constant;
    if (name == "linear") return MeeKind::linear;
    throw ValidationError("unknown f_kind '" + std::string(name) + "' (expected constant or linear)");
}

std::string_view to_string(TauKind k) {
    return k == TauKind::constant ? "constant" : "linear";
}

std::string_view to_string(EoKind k) {
    switch (k) {
        case EoKind::constant: return "constant";
        case EoKind::linear: return "linear";
        case EoKind::quadratic: return "quadratic";
    }
    return "constant";
}

std::string_view to_string(MeeKind k) {
    return k == MeeKind::constant ? "constant" : "linear";
}

Eigen::MatrixXd polynomial_basis(int T, int degree) {
    Eigen::MatrixXd b(T, degree + 1);
    for (int t = 0; t < T; ++t) {
        double v = 1.0;
        for (int d = 0; d <= degree; ++d) {
            b(t, d) = v;
            v *= t + 1;
        }
    }
    return b;
}

Eigen::VectorXd tau_pattern(TauKind kind, double aa, double theta_tau, int T) {
    if (T < 1) {
        throw ValidationError("number of decision points T must be at least 1");
    }
    Eigen::VectorXd tau = Eigen::VectorXd::Constant(T, aa);
    if (kind == TauKind::linear && T > 1) {
        for (int t = 0; t < T; ++t) {
            tau(t) = aa + theta_tau - 2.0 * theta_tau * t / (T - 1);
        }
    }
    check_tau(tau);
    return tau;
}

EoPattern eo_pattern(EoKind kind, double theta_g, double aeo, const Eigen::VectorXd& tau) {
    check_tau(tau);
    check_theta(theta_g, "theta_g");
    const int T = static_cast<int>(tau.size());
    EoPattern out;
    switch (kind) {
        case EoKind::constant:
            out.alpha = Eigen::VectorXd::Constant(1, aeo);
            break;
        case EoKind::linear:
            out.alpha = linear_ratio_curve(theta_g, aeo, tau);
            break;
        case EoKind::quadratic: {
            if (T < 3) {
                throw ValidationError("quadratic expected-outcome pattern needs T >= 3");
            }
            const double m = (T + 1) / 2.0;
            Eigen::Matrix3d a;
            a << 0.0, 1.0 - T, 1.0 - static_cast<double>(T) * T,
                (1.0 - theta_g) - (1.0 + theta_g), m * (1.0 - theta_g) - (1.0 + theta_g),
                m * m * (1.0 - theta_g) - (1.0 + theta_g),
                weighted_moments(tau, 2);
            try {
                out.alpha = solve_square(a, Eigen::Vector3d(0.0, 0.0, aeo));
            } catch (const NumericalError&) {
                throw NumericalError("singular quadratic expected-outcome system");
            }
            break;
        }
    }
    out.eo = polynomial_basis(T, static_cast<int>(out.alpha.size()) - 1) * out.alpha;
    return out;
}

MeePattern mee_pattern(MeeKind kind, const Eigen::VectorXd& theta_f, const Eigen::VectorXd& sate,
                       const Eigen::VectorXd& tau) {
    check_tau(tau);
    const int K = static_cast<int>(sate.size());
    if (K < 1 || theta_f.size() != K) {
        throw ValidationError("mee_pattern needs one theta_f and one sATE per active arm");
    }
    const int T = static_cast<int>(tau.size());
    MeePattern out;
    if (kind == MeeKind::constant) {
        out.coefficients = sate.transpose();
    } else {
        out.coefficients.resize(2, K);
        for (int k = 0; k < K; ++k) check_theta(theta_f(k), "theta_f");
        const Eigen::Vector2d base = linear_ratio_curve(theta_f(0), sate(0), tau);
        out.coefficients.col(0) = base;
        for (int k = 1; k < K; ++k) {
            out.coefficients.col(k) = base + linear_ratio_curve(theta_f(k), sate(k) - sate(0), tau);
        }
    }
    out.gamma = Eigen::Map<const Eigen::VectorXd>(out.coefficients.data(), out.coefficients.size());
    out.smee = polynomial_basis(T, static_cast<int>(out.coefficients.rows()) - 1) * out.coefficients;
    return out;
}

MeePattern mee_pattern(MeeKind kind, double theta_f1, double theta_f2, double sate1, double sate2,
                       const Eigen::VectorXd& tau) {
    return mee_pattern(kind, Eigen::Vector2d(theta_f1, theta_f2), Eigen::Vector2d(sate1, sate2), tau);
}

EffectSummary summarize_effects(const Eigen::MatrixXd& smee, const Eigen::VectorXd& eo,
                                const Eigen::VectorXd& tau, const Eigen::MatrixXd& l_matrix) {
    if (smee.rows() != tau.size() || eo.size() != tau.size() || l_matrix.cols() != smee.cols()) {
        throw ValidationError("summarize_effects: dimension mismatch");
    }
    const double total = tau.sum();
    EffectSummary s;
    s.sate = smee.transpose() * tau / total;
    s.delta_sate = l_matrix * s.sate;
    s.aeo = eo.dot(tau) / total;
    s.aa = tau.mean();
    return s;
}

}  // namespace mrtcee
