#include "mrtcee/design.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrtcee/errors.hpp"
#include "mrtcee/numerics.hpp"
#include "mrtcee/special_functions.hpp"

namespace mrtcee {

namespace {

constexpr long long kLinearScanLimit = 4096;

int contrast_rank(const Eigen::MatrixXd& l) {
    return numerical_rank(l, 1e-10 * l.norm());
}

// Contrast restricted to a basis of the row space of L.
Eigen::MatrixXd lifted_contrast(const DesignInputs& in) {
    const int rank = contrast_rank(in.l_matrix);
    Eigen::MatrixXd l = in.l_matrix;
    if (rank < l.rows()) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(in.l_matrix.transpose());
        const Eigen::MatrixXd q_full = qr.householderQ();
        l = q_full.leftCols(rank).transpose();
    }
    return kron(l, Eigen::MatrixXd::Identity(in.p(), in.p()));
}

}  // namespace

void validate(const DesignInputs& in) {
    if (in.k_arms < 1) throw ValidationError("K must be at least 1");
    if (in.t_points < 1) throw ValidationError("T must be at least 1");
    if (in.rand_probs.rows() != in.t_points || in.rand_probs.cols() != in.k_arms) {
        throw ValidationError("randomization probabilities must be T x K");
    }
    for (int t = 0; t < in.t_points; ++t) {
        const auto row = in.rand_probs.row(t);
        if (!((row.array() > 0.0).all() && row.sum() < 1.0)) {
            throw ValidationError("active-arm probabilities must be positive with sum < 1 at t = " +
                                  std::to_string(t + 1));
        }
    }
    if (in.tau.size() != in.t_points) throw ValidationError("tau must have T entries");
    if (!((in.tau.array() > 0.0).all() && (in.tau.array() <= 1.0).all())) {
        throw ValidationError("availability tau(t) must lie in (0, 1]");
    }
    if (in.f.rows() != in.t_points || in.f.cols() < 1) throw ValidationError("f must be T x p with p >= 1");
    if (in.gamma.size() != in.k_arms * in.p()) throw ValidationError("gamma must have K p entries");
    if (in.q < 1) throw ValidationError("q must be at least 1");
    if (in.l_matrix.cols() != in.k_arms || in.l_matrix.rows() < 1) {
        throw ValidationError("contrast L must have K columns");
    }
    if (in.l_matrix.norm() == 0.0) throw ValidationError("contrast matrix is zero");
    if (!(in.eta > 0.0 && in.eta < 1.0)) throw ValidationError("eta must lie in (0, 1)");
    if (!(in.power_target >= 0.0 && in.power_target < 1.0)) {
        throw ValidationError("power target must lie in [0, 1)");
    }
    if (in.n_cap < 1) throw ValidationError("n_cap must be positive");
    if (!in.f.allFinite() || !in.gamma.allFinite()) throw ValidationError("f and gamma must be finite");
}

Eigen::MatrixXd build_pt(const Eigen::VectorXd& probs) {
    if (probs.size() < 1 || !((probs.array() > 0.0).all() && probs.sum() < 1.0)) {
        throw ValidationError("invalid probabilities: entries must be positive with sum < 1");
    }
    Eigen::MatrixXd pt = -probs * probs.transpose();
    pt.diagonal() += probs;
    return pt;
}

Eigen::MatrixXd build_v(const DesignInputs& in) {
    validate(in);
    const int kp = in.k_arms * in.p();
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(kp, kp);
    for (int t = 0; t < in.t_points; ++t) {
        const Eigen::VectorXd ft = in.f.row(t).transpose();
        v += in.tau(t) * kron(build_pt(in.rand_probs.row(t).transpose()), ft * ft.transpose());
    }
    const Eigen::VectorXd d = v.diagonal();
    if ((d.array() <= 0.0).any() || numerical_rank(v, 1e-12 * d.maxCoeff()) < kp) {
        throw NumericalError("singular V: the moderator vectors f_t do not span R^p");
    }
    return v;
}

double lambda_per_subject(const DesignInputs& in) {
    const Eigen::MatrixXd v = build_v(in);
    const Eigen::MatrixXd lt = lifted_contrast(in);
    const Eigen::VectorXd lg = lt * in.gamma;
    if (lg.norm() <= 1e-14 * std::max(1.0, in.gamma.norm())) {
        throw ValidationError("contrast of target alternative is null (L~ gamma = 0)");
    }
    const Eigen::MatrixXd v_inv = spd_inverse(v);
    const Eigen::MatrixXd middle = lt * v_inv * lt.transpose();
    return lg.dot(solve_spd(middle, lg).solution);
}

double noncentrality(long long n, const DesignInputs& in) {
    return static_cast<double>(n) * lambda_per_subject(in);
}

namespace {

double power_from(const DesignInputs& in, double lambda_per_n, int l, long long n) {
    const double df2 = static_cast<double>(n - in.q - l);
    const double crit = f_quantile(l, df2, 1.0 - in.eta);
    return 1.0 - noncentral_f_cdf(l, df2, lambda_per_n * static_cast<double>(n), crit);
}

}  // namespace

double power_at_n(const DesignInputs& in, long long n) {
    const double lpn = lambda_per_subject(in);
    const int l = contrast_rank(in.l_matrix) * in.p();
    if (n <= in.q + l + 1) {
        throw ValidationError("power needs n > q + l + 1");
    }
    return power_from(in, lpn, l, n);
}

SampleSizeResult required_sample_size(const DesignInputs& in) {
    SampleSizeResult out;
    out.V = build_v(in);
    out.lambda_per_n = lambda_per_subject(in);
    const int l = contrast_rank(in.l_matrix) * in.p();
    const long long start = std::max<long long>(10, in.q + l + 2);
    if (start > in.n_cap) {
        throw ValidationError("effect too small: the search start exceeds n_cap");
    }
    auto power = [&](long long n) { return power_from(in, out.lambda_per_n, l, n); };
    auto effect_too_small = [&]() {
        return ValidationError("effect too small: power " + std::to_string(in.power_target) +
                               " is not reached by n_cap = " + std::to_string(in.n_cap));
    };

    const long long scan_end = std::min(kLinearScanLimit, in.n_cap);
    for (long long n = start; n <= scan_end; ++n) {
        const double pw = power(n);
        if (pw >= in.power_target) {
            out.n = n;
            out.achieved_power = pw;
            return out;
        }
    }
    if (scan_end == in.n_cap) throw effect_too_small();

    // Power is nondecreasing in n: gallop to a passing n, then bisect.
    long long lo = scan_end;
    long long hi = scan_end;
    double hi_power = 0.0;
    while (true) {
        hi = std::min(2 * hi, in.n_cap);
        hi_power = power(hi);
        if (hi_power >= in.power_target) break;
        if (hi == in.n_cap) throw effect_too_small();
        lo = hi;
    }
    while (hi - lo > 1) {
        const long long mid = lo + (hi - lo) / 2;
        const double pw = power(mid);
        if (pw >= in.power_target) {
            hi = mid;
            hi_power = pw;
        } else {
            lo = mid;
        }
    }
    out.n = hi;
    out.achieved_power = hi_power;
    return out;
}

}  // namespace mrtcee
