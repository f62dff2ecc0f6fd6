#include <gtest/gtest.h>

#include "mrtcee/errors.hpp"
#include "mrtcee/patterns.hpp"

using namespace mrtcee;

namespace {

double weighted_mean(const Eigen::VectorXd& v, const Eigen::VectorXd& tau) {
    return v.dot(tau) / tau.sum();
}

}  // namespace

TEST(Basis, OneBasedPowers) {
    const auto b = polynomial_basis(3, 2);
    Eigen::MatrixXd expected(3, 3);
    expected << 1, 1, 1, 1, 2, 4, 1, 3, 9;
    EXPECT_EQ(b, expected);
}

TEST(Tau, ConstantAndLinear) {
    const auto c = tau_pattern(TauKind::constant, 0.8, 0.3, 5);
    EXPECT_TRUE(c.isApprox(Eigen::VectorXd::Constant(5, 0.8)));
    const auto l = tau_pattern(TauKind::linear, 0.5, 0.2, 11);
    EXPECT_NEAR(l(0), 0.7, 1e-15);
    EXPECT_NEAR(l(10), 0.3, 1e-15);
    EXPECT_NEAR(l(5), 0.5, 1e-15);
    EXPECT_NEAR(l.mean(), 0.5, 1e-15);
    EXPECT_TRUE(tau_pattern(TauKind::linear, 0.6, 0.0, 7).isApprox(Eigen::VectorXd::Constant(7, 0.6)));
    EXPECT_NEAR(tau_pattern(TauKind::linear, 0.6, 0.2, 1)(0), 0.6, 1e-15);
}

TEST(Tau, OutOfRange) {
    EXPECT_THROW(tau_pattern(TauKind::linear, 0.9, 0.2, 10), ValidationError);
    EXPECT_THROW(tau_pattern(TauKind::constant, 0.0, 0.0, 10), ValidationError);
    EXPECT_THROW(tau_pattern(TauKind::linear, 0.2, -0.3, 10), ValidationError);
}

TEST(Eo, FlatCases) {
    const Eigen::VectorXd tau = tau_pattern(TauKind::linear, 0.6, 0.2, 15);
    const auto lin = eo_pattern(EoKind::linear, 0.0, 2.5, tau);
    EXPECT_NEAR(lin.alpha(0), 2.5, 1e-12);
    EXPECT_NEAR(lin.alpha(1), 0.0, 1e-12);
    const auto quad = eo_pattern(EoKind::quadratic, 0.0, 1.5, Eigen::VectorXd::Ones(15));
    EXPECT_LT((quad.eo.array() - 1.5).abs().maxCoeff(), 1e-10);
    const auto con = eo_pattern(EoKind::constant, 0.7, 3.0, tau);
    EXPECT_TRUE(con.eo.isApprox(Eigen::VectorXd::Constant(15, 3.0)));
}

TEST(Eo, LinearConstraints) {
    const int T = 15;
    for (const Eigen::VectorXd& tau :
         {Eigen::VectorXd(Eigen::VectorXd::Ones(T)), tau_pattern(TauKind::linear, 0.5, 0.3, T)}) {
        const auto r = eo_pattern(EoKind::linear, 0.3, 0.4, tau);
        EXPECT_NEAR(r.eo(0) * (1 - 0.3), r.eo(T - 1) * (1 + 0.3), 1e-10);
        EXPECT_NEAR(weighted_mean(r.eo, tau), 0.4, 1e-10);
        EXPECT_LT((polynomial_basis(T, 1) * r.alpha - r.eo).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Eo, QuadraticConstraints) {
    const int T = 21;
    const Eigen::VectorXd tau = tau_pattern(TauKind::linear, 0.5, 0.2, T);
    const auto r = eo_pattern(EoKind::quadratic, -0.4, 2.0, tau);
    ASSERT_EQ(r.alpha.size(), 3);
    const Eigen::RowVector3d mid(1.0, (T + 1) / 2.0, (T + 1) * (T + 1) / 4.0);
    const double eo_mid = mid.dot(r.alpha);
    EXPECT_NEAR(r.eo(0), r.eo(T - 1), 1e-10);
    EXPECT_NEAR(eo_mid * (1 + 0.4), r.eo(0) * (1 - 0.4), 1e-10);
    EXPECT_NEAR(weighted_mean(r.eo, tau), 2.0, 1e-10);
}

TEST(Mee, ConstantCurves) {
    const Eigen::VectorXd tau = tau_pattern(TauKind::linear, 0.5, 0.1, 10);
    const auto r = mee_pattern(MeeKind::constant, 0.4, -0.2, 0.2, 0.1, tau);
    EXPECT_EQ(r.coefficients.rows(), 1);
    EXPECT_TRUE(r.smee.col(0).isApprox(Eigen::VectorXd::Constant(10, 0.2)));
    EXPECT_TRUE(r.smee.col(1).isApprox(Eigen::VectorXd::Constant(10, 0.1)));
    EXPECT_TRUE(r.gamma.isApprox(Eigen::Vector2d(0.2, 0.1)));
}

TEST(Mee, LinearFlatWhenRatiosVanish) {
    const auto r = mee_pattern(MeeKind::linear, 0.0, 0.0, 0.3, 0.1, Eigen::VectorXd::Ones(12));
    EXPECT_NEAR(r.coefficients(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(r.coefficients(1, 1), 0.0, 1e-12);
    EXPECT_NEAR(r.coefficients(0, 0), 0.3, 1e-12);
    EXPECT_NEAR(r.coefficients(0, 1), 0.1, 1e-12);
}

TEST(Mee, LinearConstraints) {
    const int T = 30;
    const Eigen::VectorXd tau = tau_pattern(TauKind::linear, 0.6, 0.25, T);
    const double tf1 = 0.3, tf2 = -0.2, s1 = 0.15, s2 = 0.05;
    const auto r = mee_pattern(MeeKind::linear, tf1, tf2, s1, s2, tau);
    const Eigen::VectorXd m1 = r.smee.col(0);
    const Eigen::VectorXd diff = r.smee.col(1) - r.smee.col(0);
    EXPECT_NEAR(m1(0) * (1 - tf1), m1(T - 1) * (1 + tf1), 1e-10);
    EXPECT_NEAR(diff(0) * (1 - tf2), diff(T - 1) * (1 + tf2), 1e-10);
    EXPECT_NEAR(weighted_mean(m1, tau), s1, 1e-10);
    EXPECT_NEAR(weighted_mean(r.smee.col(1), tau), s2, 1e-10);
    EXPECT_LT((polynomial_basis(T, 1) * r.coefficients - r.smee).cwiseAbs().maxCoeff(), 1e-12);
    Eigen::VectorXd stacked(4);
    stacked << r.coefficients.col(0), r.coefficients.col(1);
    EXPECT_TRUE(r.gamma.isApprox(stacked));
}

TEST(Mee, GeneralArms) {
    const int T = 14;
    const Eigen::VectorXd tau = Eigen::VectorXd::Ones(T);
    const Eigen::Vector3d theta(0.2, 0.1, -0.3);
    const Eigen::Vector3d sate(0.1, 0.2, 0.05);
    const auto r = mee_pattern(MeeKind::linear, theta, sate, tau);
    ASSERT_EQ(r.smee.cols(), 3);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(weighted_mean(r.smee.col(k), tau), sate(k), 1e-10);
    const auto two = mee_pattern(MeeKind::linear, 0.2, 0.1, 0.1, 0.2, tau);
    EXPECT_TRUE(two.smee.isApprox(r.smee.leftCols(2), 1e-12));
}

TEST(Summaries, Examples) {
    const Eigen::VectorXd tau3 = Eigen::VectorXd::Ones(3);
    Eigen::MatrixXd smee(3, 2);
    smee << 0.0, 0.5, 0.3, 0.5, 0.6, 0.5;
    const auto s = summarize_effects(smee, Eigen::Vector3d(1, 2, 3), tau3, Eigen::RowVector2d(1, -1));
    EXPECT_NEAR(s.sate(0), 0.3, 1e-15);
    EXPECT_NEAR(s.sate(1), 0.5, 1e-15);
    EXPECT_NEAR(s.delta_sate(0), -0.2, 1e-15);
    EXPECT_NEAR(s.aeo, 2.0, 1e-15);
    EXPECT_NEAR(s.aa, 1.0, 1e-15);
    const auto a = summarize_effects(smee, Eigen::Vector3d::Zero(), Eigen::Vector3d(0.7, 0.5, 0.3),
                                     Eigen::RowVector2d(1, 0));
    EXPECT_NEAR(a.aa, 0.5, 1e-15);
    EXPECT_NEAR(a.sate(1), 0.5, 1e-15);
}

TEST(Parsing, Kinds) {
    EXPECT_EQ(parse_tau_kind("linear"), TauKind::linear);
    EXPECT_EQ(parse_eo_kind("quadratic"), EoKind::quadratic);
    EXPECT_EQ(parse_mee_kind("constant"), MeeKind::constant);
    EXPECT_EQ(to_string(EoKind::linear), "linear");
    EXPECT_THROW(parse_tau_kind("cubic"), ValidationError);
}
