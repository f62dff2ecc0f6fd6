#include "mrtcee/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <thread>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

ReplicateResult run_replicate(const GenerativeConfig& config, const McOptions& opt,
                              const ContrastSpec& contrast, int index, long long* clipped) {
    ReplicateResult r;
    r.index = index;
    try {
        SimulationDiagnostics diag;
        const auto data =
            simulate_trial(config, opt.n, derive_replicate_seed(opt.seed, static_cast<std::uint64_t>(index)), &diag);
        *clipped = diag.clipped_probabilities;
        const auto fit = fit_wcls(data, opt.spec);
        const auto test = wald_test(fit, contrast, opt.eta, opt.scaling);
        const auto intervals = coefficient_intervals(fit, opt.eta);
        const int kp = fit.K * fit.p;
        r.beta_hat = fit.beta_hat;
        r.se.resize(kp);
        r.covered.assign(kp, 0);
        for (int j = 0; j < kp; ++j) {
            r.se(j) = intervals[j].se;
            if (opt.true_beta.size() == kp) {
                r.covered[j] = intervals[j].lower <= opt.true_beta(j) && opt.true_beta(j) <= intervals[j].upper;
            }
        }
        r.statistic = test.statistic;
        r.p_value = test.p_value;
        r.reject = test.reject;
        r.ok = true;
    } catch (const std::exception& e) {
        r.ok = false;
        r.error = e.what();
    }
    return r;
}

}  // namespace

int default_thread_count() {
    if (const char* env = std::getenv("MRTCEE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

McSummary run_monte_carlo(const GenerativeConfig& config, const McOptions& opt,
                          std::vector<ReplicateResult>* per_replicate) {
    if (opt.replicates < 1) throw ValidationError("replicates must be at least 1");
    if (opt.n < 1) throw ValidationError("number of subjects must be at least 1");
    if (opt.threads < 0) throw ValidationError("threads must be at least 1");
    validate(config);
    const int kp = config.K * opt.spec.p();
    if (opt.true_beta.size() != 0 && opt.true_beta.size() != kp) {
        throw ValidationError("true coefficient vector must have K p entries");
    }
    const auto contrast = build_contrast(opt.l_matrix, opt.spec.p());

    std::vector<ReplicateResult> results(opt.replicates);
    std::vector<long long> clipped(opt.replicates, 0);
    const int threads = std::clamp(opt.threads == 0 ? default_thread_count() : opt.threads, 1, opt.replicates);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int r = next.fetch_add(1); r < opt.replicates; r = next.fetch_add(1)) {
            results[r] = run_replicate(config, opt, contrast, r, &clipped[r]);
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    McSummary s;
    s.replicates = opt.replicates;
    s.seed = opt.seed;
    s.n = opt.n;
    s.true_beta = opt.true_beta;
    for (const auto& r : results) {
        if (!r.ok) ++s.failures;
    }
    for (long long c : clipped) s.clipped_probabilities += c;
    if (s.failures * 100 > opt.replicates || s.failures == opt.replicates) {
        std::string first;
        for (const auto& r : results) {
            if (!r.ok) {
                first = r.error;
                break;
            }
        }
        throw NumericalError("failure budget exceeded: " + std::to_string(s.failures) + " of " +
                             std::to_string(opt.replicates) + " replicates failed (first: " + first + ")");
    }

    const double good = opt.replicates - s.failures;
    s.mean_estimate = Eigen::VectorXd::Zero(kp);
    s.mean_se = Eigen::VectorXd::Zero(kp);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(kp);
    Eigen::VectorXd sq_err = Eigen::VectorXd::Zero(kp);
    s.coverage = Eigen::VectorXd::Zero(kp);
    int rejections = 0;
    for (const auto& r : results) {
        if (!r.ok) continue;
        s.mean_estimate += r.beta_hat;
        s.mean_se += r.se;
        if (r.reject) ++rejections;
        for (int j = 0; j < kp; ++j) s.coverage(j) += r.covered[j];
    }
    s.mean_estimate /= good;
    s.mean_se /= good;
    s.coverage /= good;
    for (const auto& r : results) {
        if (!r.ok) continue;
        sq += (r.beta_hat - s.mean_estimate).cwiseAbs2();
        if (opt.true_beta.size() == kp) sq_err += (r.beta_hat - opt.true_beta).cwiseAbs2();
    }
    s.empirical_sd = Eigen::VectorXd::Zero(kp);
    if (good > 1) s.empirical_sd = (sq / (good - 1)).cwiseSqrt();
    if (opt.true_beta.size() == kp) {
        s.bias = s.mean_estimate - opt.true_beta;
        s.rmse = (sq_err / good).cwiseSqrt();
    } else {
        const double nan = std::nan("");
        s.bias = Eigen::VectorXd::Constant(kp, nan);
        s.rmse = Eigen::VectorXd::Constant(kp, nan);
        s.coverage = Eigen::VectorXd::Constant(kp, nan);
    }
    s.rejection_rate = rejections / good;

    for (int k = 1; k <= config.K; ++k) {
        for (int j = 0; j < opt.spec.p(); ++j) {
            std::string name = "beta" + std::to_string(k);
            if (opt.spec.p() > 1) {
                const std::string f = opt.spec.f_intercept
                                          ? (j == 0 ? "(Intercept)" : opt.spec.f_columns[j - 1])
                                          : opt.spec.f_columns[j];
                name += "[" + f + "]";
            }
            s.names.push_back(std::move(name));
        }
    }
    if (per_replicate != nullptr) *per_replicate = std::move(results);
    return s;
}

}  // namespace mrtcee
