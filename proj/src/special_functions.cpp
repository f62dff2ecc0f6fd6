#include "mrtcee/special_functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "mrtcee/errors.hpp"

namespace mrtcee {

namespace {

constexpr double kTiny = 1e-300;
constexpr double kCfEps = 1e-16;
constexpr int kCfMaxIter = 100000;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kCfMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kCfEps) {
            return h;
        }
    }
    throw NumericalError("incomplete beta continued fraction did not converge");
}

// log of x^a (1-x)^b / B(a, b), with the complement supplied separately so
// callers near x = 1 keep full precision.
double log_beta_kernel(double a, double b, double x, double xc) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
           b * std::log(xc);
}

double ibeta(double a, double b, double x, double xc) {
    if (x <= 0.0) return 0.0;
    if (xc <= 0.0) return 1.0;
    const double front = std::exp(log_beta_kernel(a, b, x, xc));
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_continued_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_continued_fraction(b, a, xc) / b;
}

void check_df(double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0) || !std::isfinite(d1) || !std::isfinite(d2)) {
        throw std::domain_error("F distribution degrees of freedom must be positive and finite");
    }
}

}  // namespace

double reg_inc_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
        throw std::domain_error("reg_inc_beta: shape parameters must be positive");
    }
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("reg_inc_beta: x must lie in [0, 1]");
    }
    return ibeta(a, b, x, 1.0 - x);
}

double f_cdf(double d1, double d2, double x) {
    check_df(d1, d2);
    if (std::isnan(x)) throw std::domain_error("f_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    const double denom = d1 * x + d2;
    return ibeta(0.5 * d1, 0.5 * d2, d1 * x / denom, d2 / denom);
}

double f_sf(double d1, double d2, double x) {
    check_df(d1, d2);
    if (std::isnan(x)) throw std::domain_error("f_sf: x is NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    const double denom = d1 * x + d2;
    return ibeta(0.5 * d2, 0.5 * d1, d2 / denom, d1 * x / denom);
}

double f_quantile(double d1, double d2, double p) {
    check_df(d1, d2);
    if (!(p > 0.0 && p < 1.0)) {
        throw std::domain_error("f_quantile: p must lie in (0, 1)");
    }
    const double a = 0.5 * d1;
    const double b = 0.5 * d2;
    const double log_norm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);

    // Root-find on the beta scale y = d1 x / (d1 x + d2), where the CDF is
    // I_y(a, b): bracketed Newton with bisection fallback.
    double lo = 0.0;
    double hi = 1.0;
    double y = 0.5;
    auto to_x = [&](double yy) { return d2 * yy / (d1 * (1.0 - yy)); };
    for (int iter = 0; iter < 200; ++iter) {
        const double diff = ibeta(a, b, y, 1.0 - y) - p;
        if (diff == 0.0) break;
        if (diff < 0.0) lo = y; else hi = y;
        if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(y, 1e-300)) break;
        const double log_pdf = log_norm + (a - 1.0) * std::log(y) + (b - 1.0) * std::log1p(-y);
        const double pdf = std::exp(log_pdf);
        double next = (pdf > 0.0 && std::isfinite(pdf)) ? y - diff / pdf : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (next == y) break;
        y = next;
    }
    const double x = to_x(y);
    if (!std::isfinite(x) || std::abs(f_cdf(d1, d2, x) - p) > 1e-10) {
        throw NumericalError("f_quantile did not converge");
    }
    return x;
}

double noncentral_f_cdf(double d1, double d2, double lambda, double x) {
    check_df(d1, d2);
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        throw std::domain_error("noncentral_f_cdf: lambda must be finite and >= 0");
    }
    if (std::isnan(x)) throw std::domain_error("noncentral_f_cdf: x is NaN");
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (lambda == 0.0) return f_cdf(d1, d2, x);

    const double a = 0.5 * d1;
    const double b = 0.5 * d2;
    const double denom = d1 * x + d2;
    const double y = d1 * x / denom;
    const double yc = d2 / denom;
    const double mu = 0.5 * lambda;

    // Start at the Poisson mode and walk outwards.
    const double mode = std::floor(mu);
    const double log_w_mode = -mu + mode * std::log(mu) - std::lgamma(mode + 1.0);
    const double w_mode = std::exp(log_w_mode);

    double total = 0.0;
    double mass = 0.0;

    double w = w_mode;
    for (double j = mode - 1.0; j >= 0.0; j -= 1.0) {
        w *= (j + 1.0) / mu;
        if (w < 1e-300) break;
        total += w * ibeta(a + j, b, y, yc);
        mass += w;
        if (w < 1e-18 * w_mode) break;
    }

    w = w_mode;
    constexpr long kMaxTerms = 10'000'000;
    for (long step = 0;; ++step) {
        const double j = mode + static_cast<double>(step);
        if (step > 0) w *= mu / j;
        total += w * ibeta(a + j, b, y, yc);
        mass += w;
        if (1.0 - mass < 1e-13) break;
        // Remaining weights shrink at least geometrically with ratio mu / (j + 1).
        if (j + 1.0 > mu && w * mu / (j + 1.0 - mu) < 1e-16) break;
        if (step > kMaxTerms) {
            throw NumericalError("noncentral F series did not converge");
        }
        // Weights underflowed before the mass target was met.
        if (w == 0.0 && j > mu) {
            throw NumericalError("noncentral F series did not converge");
        }
    }
    return std::min(1.0, std::max(0.0, total));
}

}  // namespace mrtcee
