#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "mrtcee/cli.hpp"
#include <json.hpp>

using namespace mrtcee;
using nlohmann::json;

namespace {

struct Run {
    int code = 0;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    Run r;
    r.code = run_cli(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

std::string write_file(const std::string& name, const std::string& text) {
    const std::string path = ::testing::TempDir() + name;
    std::ofstream(path) << text;
    return path;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string toy_csv() {
    return write_file("toy.csv",
                      "id,t,avail,trt,prob_0,prob_1,outcome\n"
                      "1,1,1,1,0.5,0.5,2\n"
                      "2,1,1,0,0.5,0.5,1\n"
                      "3,1,1,1,0.5,0.5,4\n"
                      "4,1,1,0,0.5,0.5,3\n");
}

std::string three_arm_csv() {
    std::ostringstream os;
    os << "id,t,avail,trt,prob_0,prob_1,prob_2,outcome,x\n";
    unsigned state = 12345;
    auto next = [&]() {
        state = state * 1103515245u + 12345u;
        return static_cast<double>((state >> 8) & 0xFFFF) / 65536.0;
    };
    for (int i = 1; i <= 30; ++i) {
        for (int t = 1; t <= 4; ++t) {
            const int avail = next() < 0.85 ? 1 : 0;
            const double u = next();
            const int arm = avail ? (u < 0.4 ? 0 : (u < 0.7 ? 1 : 2)) : 0;
            const double x = next() - 0.5;
            const double y = 0.3 * x + (arm == 1 ? 0.5 : 0.0) + (arm == 2 ? 0.2 : 0.0) + next() - 0.5;
            os << i << ',' << t << ',' << avail << ',' << arm << ",0.4,0.3,0.3," << y << ',' << x << '\n';
        }
    }
    return write_file("three_arm.csv", os.str());
}

const char* kDesign =
    "K = 2\nT = 210\np = 0.4,0.3,0.3\nsate1 = 0.053\nsate2 = 0\nL = 1,-1\n";

}  // namespace

TEST(CliEstimate, ToyFitJson) {
    const auto r = run({"estimate", "--data", toy_csv(), "--f-cols", "intercept", "--g-cols", "intercept",
                        "--numerator", "empirical_per_t", "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_NEAR(j["coefficients"][0]["estimate"].get<double>(), 1.0, 1e-12);
    EXPECT_NEAR(j["control"][0]["estimate"].get<double>(), 2.5, 1e-12);
    for (const char* key : {"model", "control", "coefficients", "contrasts", "test", "covariance", "diagnostics"}) {
        EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["model"]["n"].get<int>(), 4);
    EXPECT_TRUE(j["contrasts"].empty());
}

TEST(CliEstimate, PairwiseCsvRows) {
    const std::string out = ::testing::TempDir() + "est.csv";
    const auto r = run({"estimate", "--data", three_arm_csv(), "--f-cols", "intercept", "--g-cols", "x",
                        "--contrast", "pairwise(1,2)", "--format", "csv", "--out", out});
    ASSERT_EQ(r.code, 0) << r.err;
    const std::string text = read_file(out);
    EXPECT_EQ(text.rfind("parameter,estimate,se,ci_lower,ci_upper,p_value\n", 0), 0u);
    EXPECT_NE(text.find("\nbeta1,"), std::string::npos);
    EXPECT_NE(text.find("\nbeta2,"), std::string::npos);
    EXPECT_NE(text.find("\nbeta1-beta2,"), std::string::npos);
}

TEST(CliEstimate, ContrastFile) {
    const auto l = write_file("l.csv", "# rows of L\n1,-1\n");
    const auto r = run({"estimate", "--data", three_arm_csv(), "--f-cols", "intercept", "--g-cols", "x",
                        "--contrast", l, "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["test"]["df1"].get<int>(), 1);
    EXPECT_EQ(j["contrasts"][0]["parameter"].get<std::string>(), "beta1-beta2");
}

TEST(CliEstimate, Errors) {
    auto r = run({"estimate", "--data", toy_csv(), "--f-cols", "intercept", "--out", "-"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("--g-cols"), std::string::npos);
    r = run({"estimate", "--data", toy_csv(), "--f-cols", "nope", "--g-cols", "intercept", "--out", "-"});
    EXPECT_EQ(r.code, 2);
    r = run({"estimate", "--data", "/nonexistent.csv", "--f-cols", "intercept", "--g-cols", "intercept",
             "--out", "-"});
    EXPECT_EQ(r.code, 2);
    r = run({"frobnicate"});
    EXPECT_EQ(r.code, 2);
}

TEST(CliSampleSize, JsonRecord) {
    const auto cfg = write_file("design.cfg", kDesign);
    const auto r = run({"samplesize", "--config", cfg, "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_GE(j["achieved_power"].get<double>(), 0.8);
    EXPECT_NEAR(j["lambda_per_n"].get<double>(), 0.053 * 0.053 * 210 * 0.3 / 2, 1e-12);
    EXPECT_EQ(j["V"].size(), 2u);
    EXPECT_NEAR(j["effects"]["delta_sate"][0].get<double>(), 0.053, 1e-12);
}

TEST(CliSampleSize, NullContrastAndBadKeys) {
    auto cfg = write_file("null.cfg", "K = 2\nT = 10\np = 0.4,0.3,0.3\nsate1 = 0.1\nsate2 = 0.1\n");
    auto r = run({"samplesize", "--config", cfg, "--out", "-"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("contrast of target alternative is null"), std::string::npos);
    cfg = write_file("bad.cfg", std::string(kDesign) + "colour = red\n");
    r = run({"samplesize", "--config", cfg, "--out", "-"});
    EXPECT_EQ(r.code, 2);
}

TEST(CliSampleSize, Sweep) {
    const auto cfg = write_file("sweep.cfg", kDesign);
    const auto r = run({"samplesize", "--config", cfg, "--sweep", "sate1=0.05:0.07:0.01", "--out", "-"});
    ASSERT_EQ(r.code, 0) << r.err;
    std::istringstream in(r.out);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "sate1,n");
    std::vector<long long> ns;
    while (std::getline(in, line)) ns.push_back(std::stoll(line.substr(line.find(',') + 1)));
    ASSERT_EQ(ns.size(), 3u);
    EXPECT_GE(ns[0], ns[1]);
    EXPECT_GE(ns[1], ns[2]);
    EXPECT_EQ(run({"samplesize", "--config", cfg, "--sweep", "sate1=1:0:1", "--out", "-"}).code, 2);
}

TEST(CliSimulate, DeterministicAcrossThreads) {
    const auto sc = write_file("scenario.cfg",
                               "name = null\nfamily = gm_sc\nnu1 = 0.3\nK = 2\nT = 8\np = 0.4,0.3,0.3\n"
                               "AA = 0.8\nn = 30\nreplicates = 25\nseed = 9\n");
    const std::string rep1 = ::testing::TempDir() + "rep1.csv";
    const std::string rep4 = ::testing::TempDir() + "rep4.csv";
    const auto a = run({"simulate", "--scenario", sc, "--threads", "1", "--out", "-", "--per-replicate", rep1});
    const auto b = run({"simulate", "--scenario", sc, "--threads", "4", "--out", "-", "--per-replicate", rep4});
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(read_file(rep1), read_file(rep4));
    const auto j = json::parse(a.out);
    EXPECT_EQ(j["replicates"].get<int>(), 25);
    EXPECT_EQ(j["family"].get<std::string>(), "gm_sc");

    const auto c = run({"simulate", "--scenario", sc, "--replicates", "5", "--seed", "10", "--format", "csv",
                        "--out", "-"});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_EQ(c.out.rfind("family,replicates,failures,seed,n,", 0), 0u);
    EXPECT_NE(c.out.find("gm_sc,5,0,10,30,"), std::string::npos);
    EXPECT_EQ(run({"simulate", "--scenario", sc, "--seed", "-1", "--out", "-"}).code, 2);
}
