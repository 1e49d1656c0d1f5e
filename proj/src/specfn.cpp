#include "ruinlab/specfn.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace ruinlab::specfn {

namespace {

constexpr int kMaxIter = 10000;
constexpr double kRelEps = 1e-16;

bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::floor(v);
}

double log_add_exp(double a, double b) {
    if (a < b) std::swap(a, b);
    if (b == -std::numeric_limits<double>::infinity()) return a;
    return a + std::log1p(std::exp(b - a));
}

// Direct series sum_n (a)_n/(b)_n z^n/n!; stops after the term has been below
// kRelEps * |sum| three times in a row.
double kummer_series(double a, double b, double z) {
    double term = 1.0, sum = 1.0;
    int small_streak = 0;
    for (int n = 0; n < kMaxIter; ++n) {
        term *= (a + n) / (b + n) * z / (n + 1);
        sum += term;
        if (std::abs(term) < kRelEps * std::abs(sum)) {
            if (++small_streak >= 3) return sum;
        } else {
            small_streak = 0;
        }
        if (a + n == 0.0) return sum;  // terminated exactly
    }
    throw precision_error("kummer_m: series did not converge within iteration cap");
}

// Terminating case: a = -k. All terms of M(-k,b,z) are generated exactly.
double kummer_polynomial(int k, double b, double z) {
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < k; ++n) {
        term *= (static_cast<double>(n) - k) / (b + n) * z / (n + 1);
        sum += term;
    }
    return sum;
}

// log M(a,b,z) for a>0, b>0, z>=0: positive terms, log-sum-exp accumulation.
double log_kummer_pos_series(double a, double b, double z) {
    double lt = 0.0, lsum = 0.0;
    for (int n = 0; n < 4 * kMaxIter; ++n) {
        const double ratio = (a + n) / (b + n) * z / (n + 1);
        lt += std::log(ratio);
        lsum = log_add_exp(lsum, lt);
        if (ratio < 1.0 && lt < lsum - 40.0) return lsum;
    }
    throw precision_error("log_kummer: series did not converge within iteration cap");
}

// log M(a,b,z) for large z > 0 via M ~ Gamma(b)/Gamma(a) e^z z^{a-b} 2F0-type
// correction sum_k (b-a)_k (1-a)_k / (k! z^k), truncated at its smallest
// term. The neglected second branch is O(e^{-z}) relative, far below double
// precision for the z >= 300 switch point.
double log_kummer_pos_asymptotic(double a, double b, double z) {
    double c = 1.0, s = 1.0;
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 60; ++k) {
        c *= (b - a + k) * (1.0 - a + k) / ((k + 1) * z);
        if (std::abs(c) >= prev) break;  // past the optimal truncation point
        s += c;
        prev = std::abs(c);
        if (std::abs(c) < 1e-18 * std::abs(s)) break;
    }
    return z + (a - b) * std::log(z) + std::lgamma(b) - std::lgamma(a) + std::log(s);
}

constexpr double kAsymptoticSwitch = 300.0;

double log_kummer_pos(double a, double b, double z) {
    return z > kAsymptoticSwitch ? log_kummer_pos_asymptotic(a, b, z)
                                 : log_kummer_pos_series(a, b, z);
}

void check_h_domain(double rho, double x) {
    if (!(rho >= 0.0) || !std::isfinite(rho) || !std::isfinite(x))
        throw std::domain_error("h_rho: need finite rho >= 0");
    if (!(x >= 0.0)) throw std::domain_error("h_rho: need x >= 0");
}

}  // namespace

double kummer_m(const KummerParams& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.z))
        throw std::domain_error("kummer_m: non-finite input");
    if (is_nonpositive_integer(p.b))
        throw std::domain_error("kummer_m: b must not be a non-positive integer");
    if (std::abs(p.z) > kKummerZMax)
        throw std::domain_error("kummer_m: |z| > 700; use the log-space path");
    if (p.a == 0.0) return 1.0;
    if (is_nonpositive_integer(p.a))
        return kummer_polynomial(static_cast<int>(-p.a), p.b, p.z);
    if (p.z < 0.0 && p.b - p.a > 0.0)
        return std::exp(p.z) * kummer_series(p.b - p.a, p.b, -p.z);
    return kummer_series(p.a, p.b, p.z);
}

namespace detail {

bool h_rho_is_polynomial(double rho) {
    const double k = rho / 3.0;
    return std::abs(k - std::round(k)) < 1e-12;
}

double h_terminating(int k, double x) {
    // M(-k, 1/2, -3x) = sum_{n<=k} k!/(k-n)! (3x)^n / ((1/2)_n n!)
    double term = 1.0, sum = 1.0;
    for (int n = 0; n < k; ++n) {
        term *= (k - n) * 3.0 * x / ((0.5 + n) * (n + 1));
        sum += term;
    }
    return sum;
}

}  // namespace detail

double h_rho(double rho, double x) {
    check_h_domain(rho, x);
    if (detail::h_rho_is_polynomial(rho))
        return detail::h_terminating(static_cast<int>(std::round(rho / 3.0)), x);
    return std::exp(log_h_rho(rho, x));
}

double log_h_rho(double rho, double x) {
    check_h_domain(rho, x);
    if (rho == 0.0) return 0.0;
    if (detail::h_rho_is_polynomial(rho)) {
        const int k = static_cast<int>(std::round(rho / 3.0));
        // positive terms for x >= 0, so the plain sum is log-safe until the
        // value itself overflows; (6x)^k stays in range for x <= 1e45 at k<=6
        const double v = detail::h_terminating(k, x);
        if (std::isfinite(v)) return std::log(v);
    }
    // h_rho(x) = e^{-3x} M(1/2+rho/3, 1/2, 3x)
    return log_kummer_pos(0.5 + rho / 3.0, 0.5, 3.0 * x) - 3.0 * x;
}

double h_rho_derivative(double rho, double x, int k) {
    check_h_domain(rho, x);
    if (k < 0 || k > 2) throw std::domain_error("h_rho_derivative: k in {0,1,2}");
    if (k == 0) return h_rho(rho, x);
    const double a = (k == 1) ? 1.0 - rho / 3.0 : 2.0 - rho / 3.0;
    const double b = (k == 1) ? 1.5 : 2.5;
    const double pref = (k == 1) ? 2.0 * rho : 4.0 * rho * (rho - 3.0) / 3.0;
    if (pref == 0.0) return 0.0;
    double m;
    if (is_nonpositive_integer(a)) {
        m = kummer_polynomial(static_cast<int>(-a), b, -3.0 * x);
    } else {
        // transform: M(a,b,-3x) = e^{-3x} M(b-a,b,3x), b-a = 1/2 + rho/3 > 0
        m = std::exp(log_kummer_pos(b - a, b, 3.0 * x) - 3.0 * x);
    }
    return pref * m;
}

double g_rho_series(double rho, double u, double a0, double a1) {
    if (!std::isfinite(rho) || !std::isfinite(u) || !std::isfinite(a0) || !std::isfinite(a1))
        throw std::domain_error("g_rho_series: non-finite input");
    double sum = a0 + a1 * u;
    const double u2 = u * u;
    double even = a0, odd = a1 * u;  // a_k u^k for the two parities
    int small_streak = 0;
    for (int k = 0; k < kMaxIter; ++k) {
        // advance whichever parity k has: term_{k+2} = term_k * (2rho-3k) u^2 / ((k+2)(k+1))
        const double factor = (2.0 * rho - 3.0 * k) * u2 / ((k + 2.0) * (k + 1.0));
        double& slot = (k % 2 == 0) ? even : odd;
        slot *= factor;
        sum += slot;
        if (std::abs(slot) < 1e-18 * (1.0 + std::abs(sum))) {
            if (++small_streak >= 4) return sum;
        } else {
            small_streak = 0;
        }
    }
    throw precision_error("g_rho_series: truncation cap exceeded");
}

double laguerre(int m, double alpha, double x) {
    if (m < 0) throw std::domain_error("laguerre: m >= 0");
    if (!std::isfinite(alpha) || !std::isfinite(x))
        throw std::domain_error("laguerre: non-finite input");
    if (m == 0) return 1.0;
    double lkm1 = 1.0;
    double lk = 1.0 + alpha - x;
    for (int k = 1; k < m; ++k) {
        const double lkp1 =
            ((2.0 * k + 1.0 + alpha - x) * lk - (k + alpha) * lkm1) / (k + 1.0);
        lkm1 = lk;
        lk = lkp1;
    }
    return lk;
}

NoncentralChiSq1::NoncentralChiSq1(double lambda) : lambda_(lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::domain_error("NoncentralChiSq1: lambda >= 0");
}

double NoncentralChiSq1::cdf(double x) const {
    if (!(x >= 0.0)) throw std::domain_error("NoncentralChiSq1::cdf: x >= 0");
    if (x == 0.0) return 0.0;
    // P(chi2_{1+2j} <= x) by downward dof recurrence from the erf form:
    //   c_0 = erf(sqrt(x/2)),  c_{j+1} = c_j - d_j,
    //   d_j = (x/2)^{j+1/2} e^{-x/2} / Gamma(j+3/2).
    const double h = 0.5 * x;
    double c = std::erf(std::sqrt(h));
    double d = std::sqrt(h) * std::exp(-h) / std::tgamma(1.5);
    double w = std::exp(-0.5 * lambda_);  // Poisson(lambda/2) weights
    double cum_w = w;
    double sum = w * c;
    for (int j = 0; j < kMaxIter; ++j) {
        if (1.0 - cum_w < 1e-13) break;
        c -= d;
        if (c < 0.0) c = 0.0;
        d *= h / (j + 1.5);
        w *= 0.5 * lambda_ / (j + 1.0);
        cum_w += w;
        sum += w * c;
    }
    return std::min(1.0, sum);
}

double NoncentralChiSq1::moment(int m) const {
    if (m < 1) throw std::domain_error("NoncentralChiSq1::moment: m >= 1");
    // kappa_j = 2^{j-1} (j-1)! (1 + j lambda); mu_m from the Bell recursion.
    std::vector<double> kappa(m + 1), mu(m + 1);
    double pow2 = 0.5, fact = 1.0;
    for (int j = 1; j <= m; ++j) {
        pow2 *= 2.0;
        if (j > 1) fact *= (j - 1);
        kappa[j] = pow2 * fact * (1.0 + j * lambda_);
    }
    mu[0] = 1.0;
    for (int k = 1; k <= m; ++k) {
        double binom = 1.0;  // C(k-1, j) built incrementally
        double acc = 0.0;
        for (int j = 0; j <= k - 1; ++j) {
            acc += binom * kappa[j + 1] * mu[k - 1 - j];
            binom *= static_cast<double>(k - 1 - j) / (j + 1);
        }
        mu[k] = acc;
    }
    return mu[m];
}

double s_moment(const SMomentSpec& spec) {
    if (!(spec.total_fortune > 0.0)) throw std::domain_error("s_moment: T > 0 required");
    if (!(spec.q > 0.0)) throw std::domain_error("s_moment: q > 0 required");
    const double T = spec.total_fortune;
    const double q = spec.q;
    const double rho = 0.75 * q;
    const double w = spec.z0 * spec.z0 / (2.0 * T);
    const double lg = 0.25 * q * std::log(2.0 / 3.0) + std::lgamma(0.5 + 0.25 * q) -
                      std::lgamma(0.5) + 0.75 * q * std::log(T) + log_h_rho(rho, w);
    return std::exp(lg);
}

}  // namespace ruinlab::specfn
