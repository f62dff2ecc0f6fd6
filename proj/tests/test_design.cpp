#include <gtest/gtest.h>

#include <chrono>

#include "mrtcee/design.hpp"
#include "mrtcee/errors.hpp"
#include "mrtcee/patterns.hpp"
#include "mrtcee/special_functions.hpp"

using namespace mrtcee;

namespace {

DesignInputs reference_design() {
    DesignInputs in;
    in.k_arms = 2;
    in.t_points = 210;
    in.rand_probs = Eigen::MatrixXd::Constant(210, 2, 0.3);
    in.tau = Eigen::VectorXd::Ones(210);
    in.f = Eigen::MatrixXd::Ones(210, 1);
    in.gamma = Eigen::Vector2d(0.053, 0.0);
    in.q = 1;
    in.l_matrix = Eigen::RowVector2d(1, -1);
    return in;
}

}  // namespace

TEST(BuildPt, Examples) {
    Eigen::Matrix2d expected;
    expected << 0.21, -0.09, -0.09, 0.21;
    EXPECT_TRUE(build_pt(Eigen::Vector2d(0.3, 0.3)).isApprox(expected, 1e-14));
    EXPECT_NEAR(build_pt(Eigen::VectorXd::Constant(1, 0.5))(0, 0), 0.25, 1e-15);
}

TEST(BuildPt, PositiveDefiniteOnRandomDraws) {
    std::srand(7);
    for (int rep = 0; rep < 100; ++rep) {
        const int K = 1 + rep % 4;
        Eigen::VectorXd w = (Eigen::VectorXd::Random(K + 1).array() + 1.1).matrix();
        w /= w.sum();
        const Eigen::MatrixXd pt = build_pt(w.tail(K));
        Eigen::LLT<Eigen::MatrixXd> llt(pt);
        EXPECT_EQ(llt.info(), Eigen::Success);
    }
}

TEST(BuildV, ReferenceInputs) {
    Eigen::Matrix2d expected;
    expected << 0.21, -0.09, -0.09, 0.21;
    EXPECT_TRUE(build_v(reference_design()).isApprox(210.0 * expected, 1e-12));
}

TEST(BuildV, SingularAndSinglePoint) {
    auto in = reference_design();
    in.f.setZero();
    EXPECT_THROW(build_v(in), NumericalError);

    DesignInputs one;
    one.k_arms = 2;
    one.t_points = 1;
    one.rand_probs = Eigen::RowVector2d(0.2, 0.5);
    one.tau = Eigen::VectorXd::Constant(1, 0.7);
    one.f = Eigen::MatrixXd::Ones(1, 1);
    one.gamma = Eigen::Vector2d(1, 0);
    one.l_matrix = Eigen::Matrix2d::Identity();
    EXPECT_TRUE(build_v(one).isApprox(0.7 * build_pt(Eigen::Vector2d(0.2, 0.5)), 1e-14));
    one.f = Eigen::RowVector2d(1.0, 2.0);
    one.gamma = Eigen::VectorXd::Ones(4);
    EXPECT_THROW(build_v(one), NumericalError);
}

TEST(Noncentrality, ReferenceValue) {
    const auto in = reference_design();
    // Hand computation: V^-1 for V = 210 [[.21,-.09],[-.09,.21]] gives
    // (1,-1) V^-1 (1,-1)^T = 2 / (210 * 0.30).
    const double hand = 0.053 * 0.053 / (2.0 / (210.0 * 0.30));
    EXPECT_NEAR(lambda_per_subject(in), hand, 1e-12);
    EXPECT_NEAR(lambda_per_subject(in), 0.0885, 1e-4);
    EXPECT_NEAR(noncentrality(93, in), 93 * hand, 1e-10);
}

TEST(Noncentrality, NullContrastAndScaling) {
    auto in = reference_design();
    in.gamma = Eigen::Vector2d(0.07, 0.07);
    try {
        lambda_per_subject(in);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("contrast of target alternative is null"), std::string::npos);
    }
    in.gamma = Eigen::Vector2d(0.053, 0.0);
    const double base = lambda_per_subject(in);
    in.gamma *= 2.0;
    EXPECT_NEAR(lambda_per_subject(in), 4.0 * base, 1e-12);
}

TEST(Noncentrality, IdentityContrastIsInformationQuadraticForm) {
    DesignInputs in;
    in.k_arms = 3;
    in.t_points = 20;
    in.rand_probs = Eigen::MatrixXd(20, 3);
    in.tau = Eigen::VectorXd(20);
    in.f = Eigen::MatrixXd(20, 2);
    for (int t = 0; t < 20; ++t) {
        in.rand_probs.row(t) << 0.2 + 0.005 * t, 0.25, 0.15;
        in.tau(t) = 0.9 - 0.02 * t;
        in.f.row(t) << 1.0, t + 1.0;
    }
    in.gamma = Eigen::VectorXd::LinSpaced(6, 0.05, -0.02);
    in.l_matrix = Eigen::MatrixXd::Identity(3, 3);
    const Eigen::MatrixXd v = build_v(in);
    const double direct = in.gamma.dot(v * in.gamma);
    EXPECT_NEAR(lambda_per_subject(in), direct, 1e-10 * std::max(1.0, direct));
}

TEST(Power, NullIsEtaAndMonotone) {
    auto in = reference_design();
    double prev = 0.0;
    for (long long n = 20; n <= 200; ++n) {
        const double p = power_at_n(in, n);
        EXPECT_GE(p, prev - 1e-12);
        prev = p;
    }
    const double crit = f_quantile(1, 91, 0.95);
    EXPECT_NEAR(power_at_n(in, 93), 1.0 - noncentral_f_cdf(1, 91, 93 * lambda_per_subject(in), crit), 1e-14);
    EXPECT_NEAR(1.0 - noncentral_f_cdf(1, 91, 0.0, crit), 0.05, 1e-12);
}

TEST(SampleSize, ReferenceSearch) {
    const auto in = reference_design();
    const auto start = std::chrono::steady_clock::now();
    const auto r = required_sample_size(in);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(secs, 1.0);
    // The search result is the first n whose power reaches the target.
    EXPECT_GE(r.achieved_power, 0.8);
    EXPECT_LT(power_at_n(in, r.n - 1), 0.8);
    EXPECT_NEAR(r.achieved_power, power_at_n(in, r.n), 1e-15);
    EXPECT_NEAR(r.lambda_per_n, lambda_per_subject(in), 1e-15);
    EXPECT_GE(r.n, 90);
    EXPECT_LE(r.n, 95);
}

TEST(SampleSize, LargerEffectNeedsFewer) {
    auto in = reference_design();
    const long long base = required_sample_size(in).n;
    in.gamma = Eigen::Vector2d(0.106, 0.0);
    const long long bigger = required_sample_size(in).n;
    EXPECT_LT(bigger, base);
    EXPECT_GE(power_at_n(in, bigger), 0.8);
    EXPECT_LT(power_at_n(in, bigger - 1), 0.8);
}

TEST(SampleSize, VacuousTargetReturnsStart) {
    auto in = reference_design();
    in.power_target = 0.0;
    EXPECT_EQ(required_sample_size(in).n, 10);
    in.q = 12;
    EXPECT_EQ(required_sample_size(in).n, 15);
}

TEST(SampleSize, EffectTooSmall) {
    auto in = reference_design();
    in.gamma = Eigen::Vector2d(1e-5, 0.0);
    in.n_cap = 5000;
    try {
        required_sample_size(in);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("effect too small"), std::string::npos);
    }
}

TEST(SampleSize, LargeAnswerBeyondLinearScan) {
    auto in = reference_design();
    in.gamma = Eigen::Vector2d(0.0075, 0.0);
    const auto r = required_sample_size(in);
    EXPECT_GT(r.n, 4096);
    EXPECT_GE(power_at_n(in, r.n), 0.8);
    EXPECT_LT(power_at_n(in, r.n - 1), 0.8);
}

TEST(SampleSize, MonotoneInEffectAndAvailability) {
    auto in = reference_design();
    long long prev = std::numeric_limits<long long>::max();
    for (double g = 0.03; g <= 0.12; g += 0.01) {
        in.gamma = Eigen::Vector2d(g, 0.0);
        const long long n = required_sample_size(in).n;
        EXPECT_LE(n, prev);
        prev = n;
    }
    in.gamma = Eigen::Vector2d(0.053, 0.0);
    prev = std::numeric_limits<long long>::max();
    for (double aa = 0.3; aa <= 1.0 + 1e-12; aa += 0.1) {
        in.tau = Eigen::VectorXd::Constant(210, aa);
        const long long n = required_sample_size(in).n;
        EXPECT_LE(n, prev);
        prev = n;
    }
}

TEST(SampleSize, AvailabilityPatternBarelyMatters) {
    auto in = reference_design();
    for (double aa : {0.4, 0.5, 0.7}) {
        in.tau = tau_pattern(TauKind::constant, aa, 0.0, 210);
        const long long flat = required_sample_size(in).n;
        in.tau = tau_pattern(TauKind::linear, aa, 0.2, 210);
        const long long sloped = required_sample_size(in).n;
        EXPECT_LE(std::llabs(flat - sloped), 1) << "AA=" << aa;
    }
}

TEST(Validate, RejectsMalformedInputs) {
    auto in = reference_design();
    in.eta = 1.5;
    EXPECT_THROW(validate(in), ValidationError);
    in = reference_design();
    in.gamma = Eigen::Vector3d(1, 2, 3);
    EXPECT_THROW(validate(in), ValidationError);
    in = reference_design();
    in.rand_probs(0, 0) = 0.8;
    EXPECT_THROW(validate(in), ValidationError);
    in = reference_design();
    in.tau(3) = 0.0;
    EXPECT_THROW(validate(in), ValidationError);
}

TEST(Power, DegreesOfFreedomFollowLiftedContrast) {
    auto in = reference_design();
    in.f = Eigen::MatrixXd(210, 2);
    for (int t = 0; t < 210; ++t) in.f.row(t) << 1.0, (t + 1.0) / 210.0;
    in.gamma = Eigen::Vector4d(0.05, 0.02, 0.0, 0.0);
    const double lambda = 60 * lambda_per_subject(in);
    const double crit = f_quantile(2, 60 - 1 - 2, 0.95);
    EXPECT_NEAR(power_at_n(in, 60), 1.0 - noncentral_f_cdf(2, 57, lambda, crit), 1e-14);
}
