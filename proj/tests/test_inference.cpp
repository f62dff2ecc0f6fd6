#include <gtest/gtest.h>

#include <fstream>

#include "mrtcee/errors.hpp"
#include "mrtcee/inference.hpp"
#include "mrtcee/special_functions.hpp"
#include "oracles.hpp"

using namespace mrtcee;

namespace {

FitResult random_fit(std::uint64_t seed, int n = 40, int K = 2, double scale = 1.0, bool moderated = false) {
    auto data = oracle::random_dataset(seed, n, 6, K);
    for (auto& s : data.subjects)
        for (auto& r : s.records) r.outcome *= scale;
    ModelSpec spec;
    spec.g_columns = {"x1"};
    if (moderated) spec.f_columns = {"x2"};
    return fit_wcls(data, spec);
}

}  // namespace

TEST(Contrast, KroneckerLift) {
    const auto c = build_contrast(Eigen::RowVector2d(1, -1), 2);
    Eigen::MatrixXd expected(2, 4);
    expected << 1, 0, -1, 0, 0, 1, 0, -1;
    EXPECT_EQ(c.l_tilde, expected);
    EXPECT_EQ(c.rank_l, 1);
    const auto id = build_contrast(Eigen::MatrixXd::Identity(3, 3), 2);
    EXPECT_EQ(id.l_tilde, Eigen::MatrixXd::Identity(6, 6));
    EXPECT_EQ(id.rank_l, 3);
}

TEST(Contrast, PresetsAndErrors) {
    Eigen::MatrixXd expected(1, 3);
    expected << 1, -1, 0;
    EXPECT_EQ(contrast_preset("pairwise(1,2)", 3), expected);
    EXPECT_EQ(contrast_preset("all-null", 2), Eigen::MatrixXd::Identity(2, 2));
    EXPECT_THROW(contrast_preset("pairwise(1,1)", 3), ValidationError);
    EXPECT_THROW(contrast_preset("pairwise(1,4)", 3), ValidationError);
    EXPECT_THROW(build_contrast(Eigen::MatrixXd::Zero(1, 2), 1), ValidationError);
    EXPECT_EQ(contrast_label(Eigen::RowVector3d(1, -1, 0)), "beta1-beta2");
    EXPECT_EQ(contrast_label(Eigen::RowVector2d(0.5, 1)), "0.5*beta1+beta2");
}

TEST(Contrast, LoadsCsv) {
    const std::string path = ::testing::TempDir() + "contrast.csv";
    {
        std::ofstream f(path);
        f << "b1,b2,b3\n1,-1,0\n0,1,-1\n";
    }
    const auto l = load_contrast_csv(path, 3);
    EXPECT_EQ(l.rows(), 2);
    EXPECT_EQ(l(1, 2), -1.0);
    EXPECT_THROW(load_contrast_csv(path, 2), ValidationError);
}

TEST(Wald, NullStatisticWhenContrastVanishes) {
    auto fit = random_fit(3);
    fit.beta_hat(1) = fit.beta_hat(0);
    const auto r = wald_test(fit, build_contrast(Eigen::RowVector2d(1, -1), 1), 0.05);
    EXPECT_EQ(r.statistic, 0.0);
    EXPECT_EQ(r.p_value, 1.0);
    EXPECT_FALSE(r.reject);
}

TEST(Wald, SingleRowMatchesFDistribution) {
    const auto fit = random_fit(4);
    const auto r = wald_test(fit, build_contrast(Eigen::RowVector2d(1, -1), 1), 0.05);
    EXPECT_EQ(r.df1, 1);
    EXPECT_EQ(r.df2, fit.n - fit.q - 1);
    EXPECT_DOUBLE_EQ(r.scaled_statistic, r.statistic);
    const Eigen::Vector2d c(1, -1);
    const double est = c.dot(fit.beta_hat);
    const double var = c.dot(fit.cov_beta * c);
    EXPECT_NEAR(r.statistic, est * est / var, 1e-10);
    EXPECT_NEAR(r.p_value, 1.0 - f_cdf(1, r.df2, r.scaled_statistic), 1e-12);
    EXPECT_EQ(r.reject, r.scaled_statistic > r.critical_value);
}

TEST(Wald, PrintedAndAlternativeScaling) {
    const auto fit = random_fit(5);
    const auto c = build_contrast(Eigen::Matrix2d::Identity(), 1);
    const auto printed = wald_test(fit, c, 0.05, FScaling::printed);
    const auto alt = wald_test(fit, c, 0.05, FScaling::alternative);
    EXPECT_NEAR(printed.scaled_statistic, printed.statistic / 2.0, 1e-12);
    const double n = fit.n, q = fit.q;
    EXPECT_NEAR(alt.scaled_statistic, (n - q - 2) / (2 * (n - q - 1)) * alt.statistic, 1e-12);
}

TEST(Wald, ScaleInvariance) {
    const auto a = random_fit(6, 40, 2, 1.0);
    const auto b = random_fit(6, 40, 2, 37.5);
    EXPECT_TRUE(b.beta_hat.isApprox(37.5 * a.beta_hat, 1e-10));
    const auto c = build_contrast(Eigen::Matrix2d::Identity(), 1);
    const auto ra = wald_test(a, c, 0.05);
    const auto rb = wald_test(b, c, 0.05);
    EXPECT_NEAR(ra.statistic, rb.statistic, 1e-8 * std::max(1.0, ra.statistic));
    EXPECT_NEAR(ra.p_value, rb.p_value, 1e-8);
}

TEST(Wald, InvariantToNonsingularRowTransform) {
    const auto fit = random_fit(7, 50, 3, 1.0, true);
    Eigen::MatrixXd l(2, 3);
    l << 1, -1, 0, 0, 1, -1;
    Eigen::Matrix2d r;
    r << 2, 1, -0.5, 3;
    const auto a = wald_test(fit, build_contrast(l, 2), 0.05);
    const auto b = wald_test(fit, build_contrast(r * l, 2), 0.05);
    EXPECT_NEAR(a.statistic, b.statistic, 1e-8 * std::max(1.0, a.statistic));
    EXPECT_EQ(a.df1, 4);
    EXPECT_EQ(a.df2, fit.n - fit.q - 4);
}

TEST(Wald, RedundantRowsUseRank) {
    const auto fit = random_fit(8, 50, 3);
    Eigen::MatrixXd l(3, 3);
    l << 1, -1, 0, 0, 1, -1, 1, 0, -1;
    const auto full = wald_test(fit, build_contrast(l, 1), 0.05);
    const auto basis = wald_test(fit, build_contrast(l.topRows(2), 1), 0.05);
    EXPECT_EQ(full.df1, 2);
    EXPECT_NEAR(full.statistic, basis.statistic, 1e-8 * std::max(1.0, basis.statistic));
}

TEST(Wald, PValueDecreasesWithOffset) {
    auto fit = random_fit(9);
    const auto c = build_contrast(Eigen::RowVector2d(1, -1), 1);
    double prev = 2.0;
    const double base = fit.beta_hat(0) - fit.beta_hat(1);
    for (double shift = 0.0; shift < 3.0; shift += 0.25) {
        auto f = fit;
        f.beta_hat(0) = fit.beta_hat(1) + std::abs(base) + shift;
        const double p = wald_test(f, c, 0.05).p_value;
        EXPECT_LE(p, prev);
        prev = p;
    }
}

TEST(Wald, InsufficientSubjects) {
    auto fit = random_fit(10);
    fit.n = fit.q + 2;
    EXPECT_THROW(wald_test(fit, build_contrast(Eigen::RowVector2d(1, -1), 1), 0.05), ValidationError);
}

TEST(Intervals, ToyFitAndOrdering) {
    MrtDataset d;
    d.T = 1;
    d.K = 1;
    const int arms[4] = {1, 0, 1, 0};
    const double y[4] = {2, 1, 4, 3};
    for (int i = 0; i < 4; ++i) {
        SubjectTrajectory s;
        s.subject_id = std::to_string(i);
        DecisionRecord r;
        r.treatment = arms[i];
        r.rand_probs = Eigen::Vector2d(0.5, 0.5);
        r.outcome = y[i];
        s.records.push_back(r);
        d.subjects.push_back(s);
    }
    ModelSpec spec;
    spec.numerator = NumeratorPolicy::parse("empirical_per_t");
    const auto fit = fit_wcls(d, spec);
    const auto rows = coefficient_intervals(fit, 0.05);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_NEAR(rows[0].estimate, 1.0, 1e-12);
    EXPECT_LT(rows[0].lower, rows[0].estimate);
    EXPECT_GT(rows[0].upper, rows[0].estimate);
    const double half = std::sqrt(f_quantile(1, 2, 0.95)) * rows[0].se;
    EXPECT_NEAR(rows[0].upper - rows[0].estimate, half, 1e-12);
}

TEST(Intervals, ZeroContrastIsError) {
    const auto fit = random_fit(11);
    try {
        confidence_intervals(fit, Eigen::MatrixXd::Zero(1, 2), {"zero"}, 0.05);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("zero contrast"), std::string::npos);
    }
}

TEST(Intervals, PValueMatchesSingleRowWald) {
    const auto fit = random_fit(12);
    const auto rows = confidence_intervals(fit, Eigen::RowVector2d(1, -1), {"beta1-beta2"}, 0.05);
    const auto w = wald_test(fit, build_contrast(Eigen::RowVector2d(1, -1), 1), 0.05);
    EXPECT_NEAR(rows[0].p_value, w.p_value, 1e-12);
    EXPECT_EQ(rows[0].name, "beta1-beta2");
}
