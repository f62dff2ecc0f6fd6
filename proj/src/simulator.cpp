#include "mrtcee/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double truncate_unit(double x) {
    return std::clamp(x, -1.0, 1.0);
}

int draw_arm(const Eigen::RowVectorXd& probs, double u) {
    double cum = 0.0;
    for (Eigen::Index k = 0; k < probs.size(); ++k) {
        cum += probs(k);
        if (u < cum) return static_cast<int>(k);
    }
    return static_cast<int>(probs.size()) - 1;
}

}  // namespace

Family parse_family(std::string_view name) {
    if (name == "gm0") return Family::gm0;
    if (name == "gm_ev") return Family::gm_ev;
    if (name == "gm_sc") return Family::gm_sc;
    if (name == "gm_ea") return Family::gm_ea;
    if (name == "consistency") return Family::consistency;
    throw ValidationError("unknown family '" + std::string(name) +
                          "' (expected gm0, gm_ev, gm_sc, gm_ea or consistency)");
}

std::string_view to_string(Family f) {
    switch (f) {
        case Family::gm0: return "gm0";
        case Family::gm_ev: return "gm_ev";
        case Family::gm_sc: return "gm_sc";
        case Family::gm_ea: return "gm_ea";
        case Family::consistency: return "consistency";
    }
    return "gm0";
}

GmEvScales gm_ev_scales(double theta_r, double theta_s, const Eigen::VectorXd& probs, int t, int T) {
    if (probs.size() != 3) {
        throw ValidationError("gm_ev scales are defined for K = 2 (three arms)");
    }
    if (t < 1 || t > T) throw ValidationError("gm_ev_scales: t must lie in 1..T");
    const double frac = T > 1 ? static_cast<double>(t - 1) / (T - 1) : 0.0;
    const double r2 = 1.0 + theta_r * (1.0 - 2.0 * frac);
    const double b = -((probs(1) - 1.0) / (probs(2) - 1.0)) * theta_s;
    const double a0 = 1.0 - theta_s - b;
    const Eigen::Vector3d s2(a0, a0 + theta_s, a0 + b);
    if (r2 < 0.0 || (s2.array() < 0.0).any()) {
        throw ValidationError("gm_ev scales have a negative radicand (theta_r = " + std::to_string(theta_r) +
                              ", theta_s = " + std::to_string(theta_s) + ")");
    }
    GmEvScales out;
    out.r = std::sqrt(r2);
    out.s = s2.cwiseSqrt();
    return out;
}

std::uint64_t derive_replicate_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

Eigen::Vector2d consistency_true_effects() {
    return {0.1 + 0.3 * 1.0, 0.45 + 0.1 * 1.0};
}

void validate(const GenerativeConfig& c) {
    if (c.T < 1 || c.K < 1) throw ValidationError("generative config needs T >= 1 and K >= 1");
    if (c.rand_probs.rows() != c.T || c.rand_probs.cols() != c.K + 1) {
        throw ValidationError("generative probabilities must be T x (K + 1)");
    }
    for (int t = 0; t < c.T; ++t) {
        const auto row = c.rand_probs.row(t);
        if ((row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > 1e-8) {
            throw ValidationError("generative probabilities must be valid at t = " + std::to_string(t + 1));
        }
    }
    if (c.tau.size() != c.T || (c.tau.array() < 0.0).any() || (c.tau.array() > 1.0).any()) {
        throw ValidationError("availability curve must have T entries in [0, 1]");
    }
    if (c.family == Family::consistency) {
        if (c.K != 2) throw ValidationError("the consistency family has K = 2");
        return;
    }
    if (c.eo_coeffs.size() < 1) throw ValidationError("expected-outcome coefficients are missing");
    if (c.mee_coeffs.cols() != c.K || c.mee_coeffs.rows() < 1) {
        throw ValidationError("effect coefficients must be p x K");
    }
    if (c.family == Family::gm_ev) {
        for (int t = 1; t <= c.T; ++t) {
            gm_ev_scales(c.theta_r, c.theta_s, c.rand_probs.row(t - 1).transpose(), t, c.T);
        }
    }
    if (c.family == Family::gm_sc && !(std::abs(c.nu1) < 1.0)) {
        throw ValidationError("gm_sc needs |nu1| < 1");
    }
}

MrtDataset simulate_trial(const GenerativeConfig& c, int n, std::uint64_t seed,
                          SimulationDiagnostics* diagnostics) {
    validate(c);
    if (n < 1) throw ValidationError("number of subjects must be at least 1");
    const bool covariate = c.family == Family::consistency;

    MrtDataset data;
    data.T = c.T;
    data.K = c.K;
    data.feature_names = {"time", "time2"};
    if (covariate) data.feature_names.emplace_back("z");

    Eigen::VectorXd eo = Eigen::VectorXd::Zero(c.T);
    Eigen::MatrixXd mee = Eigen::MatrixXd::Zero(c.T, c.K);
    if (!covariate) {
        eo = polynomial_basis(c.T, static_cast<int>(c.eo_coeffs.size()) - 1) * c.eo_coeffs;
        mee = polynomial_basis(c.T, static_cast<int>(c.mee_coeffs.rows()) - 1) * c.mee_coeffs;
    }
    std::vector<GmEvScales> ev;
    if (c.family == Family::gm_ev) {
        for (int t = 1; t <= c.T; ++t) {
            ev.push_back(gm_ev_scales(c.theta_r, c.theta_s, c.rand_probs.row(t - 1).transpose(), t, c.T));
        }
    }
    const double nu0 = std::sqrt(1.0 - c.nu1 * c.nu1);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    long long clipped = 0;

    data.subjects.resize(n);
    for (int i = 0; i < n; ++i) {
        auto& subject = data.subjects[i];
        subject.subject_id = std::to_string(i + 1);
        subject.records.resize(c.T);
        double eps_prev = c.family == Family::gm_sc ? normal(rng) : 0.0;
        int arm_prev = 0;
        for (int t = 0; t < c.T; ++t) {
            auto& rec = subject.records[t];
            rec.t = t;
            const double time = t + 1;
            int z = 0;
            if (covariate) z = static_cast<int>(std::min(2.0, std::floor(3.0 * unif(rng))));

            double pi = c.tau(t);
            if (c.family == Family::gm_ea && t > 0) {
                const auto& prev = c.rand_probs.row(t - 1);
                pi = c.tau(t - 1) +
                     c.nu2 * ((arm_prev == 1 ? 1.0 : 0.0) - prev(1) + (arm_prev == 2 ? 1.0 : 0.0) -
                              (c.K >= 2 ? prev(2) : 0.0)) +
                     c.nu3 * truncate_unit(eps_prev);
                if (pi < 0.0 || pi > 1.0) {
                    ++clipped;
                    pi = std::clamp(pi, 0.0, 1.0);
                }
            }
            rec.availability = unif(rng) < pi ? 1 : 0;
            const double u_arm = unif(rng);
            rec.treatment = rec.availability ? draw_arm(c.rand_probs.row(t), u_arm) : 0;
            rec.rand_probs = c.rand_probs.row(t).transpose();
            const double eps = normal(rng);

            double mean = 0.0;
            if (covariate) {
                static constexpr double base[3] = {0.2, 0.5, 0.4};
                mean = base[z];
                if (rec.treatment == 1) mean += 0.1 + 0.3 * z;
                if (rec.treatment == 2) mean += 0.45 + 0.1 * z;
            } else {
                mean = eo(t);
                if (rec.treatment > 0) mean += mee(t, rec.treatment - 1);
            }

            double noise = eps;
            if (c.family == Family::gm_ev) {
                noise = ev[t].r * ev[t].s(rec.treatment) * eps;
            } else if (c.family == Family::gm_sc) {
                noise = c.nu1 * eps_prev + nu0 * eps;
            }
            rec.outcome = mean + noise;

            rec.features.resize(covariate ? 3 : 2);
            rec.features(0) = time;
            rec.features(1) = time * time;
            if (covariate) rec.features(2) = z;

            eps_prev = eps;
            arm_prev = rec.treatment;
        }
    }
    if (diagnostics != nullptr) diagnostics->clipped_probabilities += clipped;
    return data;
}

}  // namespace mrtcee
