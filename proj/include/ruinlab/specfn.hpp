#pragma once

#include <stdexcept>

namespace ruinlab::specfn {

class precision_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct KummerParams {
    double a;
    double b;
    double z;
};

// Largest |z| accepted by the plain-value evaluator. Beyond it the factor
// e^z overflows double range; callers needing larger arguments go through
// log_h_rho, which accumulates in log space (documented up to z ~ 1e8).
constexpr double kKummerZMax = 700.0;

// Confluent hypergeometric M(a,b,z) = 1F1(a;b;z), relative error <= 1e-10 on
// the accepted domain. Negative z routes through the Kummer transformation
// M(a,b,z) = e^z M(b-a,b,-z) whenever b-a > 0, which makes every series term
// positive; a non-positive integer a terminates the series exactly.
double kummer_m(const KummerParams& p);

// h_rho(x) = M(-rho/3, 1/2, -3x) for rho >= 0, x >= 0. Terminating
// (polynomial) when rho/3 is an integer; otherwise evaluated as
// e^{-3x} M(1/2+rho/3, 1/2, 3x) with positive terms.
double h_rho(double rho, double x);

// log h_rho(x) for rho >= 0, x >= 0. Safe for the large arguments produced by
// optional-stopping evaluations (x of order N^{3/4}); uses the series up to
// 3x = 300 and the large-z asymptotic expansion beyond, where the dropped
// second branch of the expansion is O(e^{-3x}) relative.
double log_h_rho(double rho, double x);

// k-th derivative of h_rho, k in {0,1,2}, via contiguous relations:
//   h' = 2 rho M(1-rho/3, 3/2, -3x),  h'' = (4 rho (rho-3)/3) M(2-rho/3, 5/2, -3x).
double h_rho_derivative(double rho, double x, int k);

// Power-series solution of g'' + 3u g' - 2 rho g = 0 with g(0)=a0, g'(0)=a1,
// coefficients a_{k+2} = (2 rho - 3k)/((k+2)(k+1)) a_k. The series is entire;
// once (|2 rho| + 3k) u^2 < k(k+1)/2 consecutive terms decay faster than
// geometrically with ratio 1/2, so the tail after the stopping rule is below
// 1e-12 of the result.
double g_rho_series(double rho, double u, double a0, double a1);

// Generalized Laguerre polynomial L_m^{(alpha)}(x) by the three-term
// recurrence (stable for the m, alpha used here).
double laguerre(int m, double alpha, double x);

// Non-central chi-squared with k = 1 degree of freedom.
class NoncentralChiSq1 {
public:
    explicit NoncentralChiSq1(double lambda);

    double lambda() const { return lambda_; }
    // Poisson mixture of central chi-squared CDFs, truncated once the
    // remaining Poisson mass is below 1e-13 (each mixed CDF is <= 1, so that
    // bounds the tail).
    double cdf(double x) const;
    // Raw moment E[X^m] by the cumulant/Bell recursion with
    // kappa_j = 2^{j-1} (j-1)! (1 + j lambda).
    double moment(int m) const;

private:
    double lambda_;
};

struct SMomentSpec {
    double total_fortune;   // T > 0
    double z0;              // scaled initial difference
    double q;               // moment order > 0
};

// Exact moment of the limiting scaled residual time:
//   E[S^q] = (2/3)^{q/4} Gamma(1/2+q/4)/Gamma(1/2) T^{3q/4} h_{3q/4}(z0^2/(2T)).
double s_moment(const SMomentSpec& spec);

namespace detail {
// Terminating evaluation of M(-k, 1/2, -3x) for integer k >= 0, valid for
// every real x (all series terms share one sign when x >= 0). Used by the
// optional-stopping experiment, whose integrand can see slightly negative x.
double h_terminating(int k, double x);
// True when rho/3 is (numerically) a non-negative integer.
bool h_rho_is_polynomial(double rho);
}  // namespace detail

}  // namespace ruinlab::specfn
