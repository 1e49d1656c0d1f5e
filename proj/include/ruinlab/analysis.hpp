#pragma once

#include <json.hpp>

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ruinlab/exact.hpp"
#include "ruinlab/simulate.hpp"

namespace ruinlab::analysis {

// Standard normal CDF from erfc, accurate to ~1e-15. Limit-law plumbing for
// the experiments, kept here rather than in specfn.
double normal_cdf(double x);

class EmpiricalCDF {
public:
    explicit EmpiricalCDF(std::vector<double> values);

    std::size_t size() const { return values_.size(); }
    const std::vector<double>& sorted() const { return values_; }
    double operator()(double x) const;       // right-continuous F-hat(x)
    double left_limit(double x) const;       // F-hat(x-)

private:
    std::vector<double> values_;
};

// sup over sample points of the gap between the empirical CDF (evaluated from
// both sides) and the reference CDF. The reference's left limit is taken one
// ulp below the sample point, which is exact for continuous laws and handles
// atoms located at sample points.
double ks_distance(const EmpiricalCDF& sample, const std::function<double(double)>& cdf);

// Two-sample sup distance between empirical CDFs.
double ks_distance_two_sample(const EmpiricalCDF& a, const EmpiricalCDF& b);

struct LadderRung {
    double scale = 0.0;       // m or N or t, per experiment
    double metric = 0.0;
    double tolerance = 0.0;   // 0 = informational rung, not enforced
    bool pass = true;
};

// Scalar side condition of an experiment (a moment bound, a count of
// violations, ...); pass requires value <= bound.
struct NamedCheck {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    bool within = true;
};

enum class Trend { non_increasing, none };

struct ConvergenceReport {
    std::string name;
    nlohmann::json config;
    std::vector<LadderRung> ladder;
    std::vector<NamedCheck> checks;
    Trend trend = Trend::non_increasing;
    int max_trend_violations = 0;
    bool trend_ok = true;
    bool tolerance_ok = true;
    bool pass = false;
    std::uint64_t seed = 0;
    double runtime_seconds = 0.0;
    nlohmann::json diagnostics;
    // plot-ready columns (x, empirical, limit)
    std::vector<std::array<double, 3>> curve;

    nlohmann::json to_json() const;
    void write_curve_csv(std::ostream& os) const;
};

// Recomputes trend_ok / tolerance_ok / pass from the ladder alone; the
// verdict is a pure function of the report contents.
void evaluate_verdict(ConvergenceReport& rep);

// ---- named experiments, one per limit statement ----

struct CltOptions {
    std::vector<int> m_ladder = {100, 1000, 10000};
    std::vector<double> x_grid = {-2, -1, 0, 1, 2};
    double final_tolerance = 0.01;
    int max_trend_violations = 2;
};

// Gaussian limit of the exact tables: max_x |table(m, round(m+x sqrt m)) - limit(x)|
// along the m ladder. kind=proportional uses limit Phi(x); kind=simple uses
// Phi(x/sqrt 2). Grid points with round(m+x sqrt m) < 0 are skipped with a note.
ConvergenceReport verify_clt(exact::TableKind kind, const CltOptions& opt);

struct FluidOptions {
    double x0 = 0.6, y0 = 0.4;
    std::vector<std::int64_t> n_ladder = {100, 1000, 10000};
    int replications = 200;
    int grid_points = 10;
    double grid_end = 0.45;       // must stay below tau - 0.1
    double final_tolerance = 0.05;
    double tau_tolerance = 0.02;  // |mean tau_N - tau| at the final rung
    std::uint64_t seed = 0;
    int threads = 0;
};

// Ensemble means of (x^N_t, y^N_t) against the closed-form fluid solution
// u_t = u0 T/(T-t) + ((T-t)^2 - T^2)/(2(T-t)); sup-grid error along the N
// ladder plus extinction-time concentration near tau = T - sqrt(x0^2-y0^2).
ConvergenceReport verify_fluid(const FluidOptions& opt);

struct WinnerOptions {
    double x0 = 0.4, y0 = 0.6;
    std::vector<std::int64_t> n_ladder = {50, 500, 2000};
    double final_tolerance = 0.01;
};

// Degenerate winner limit: p(N x0, N y0) -> 1_{x0<y0} on the exact table.
ConvergenceReport verify_winner_degenerate(const WinnerOptions& opt);

struct DiffusionOptions {
    std::int64_t n_scale = 10000;
    double x0 = 0.5, y0 = 0.5, z0 = 0.0;
    std::vector<double> t_grid = {0.25, 0.5, 0.75};
    int replications = 2000;
    double ks_tolerance = 0.05;
    std::uint64_t seed = 0;
    int threads = 0;
};

// KS distance of simulated z^N_t against the exact Gaussian marginal of the
// limiting diffusion (and against the exact sampler), plus moment checks.
ConvergenceReport verify_diffusion(const DiffusionOptions& opt);

struct ResidualOptions {
    std::int64_t n_scale = 10000;
    double total_fortune = 1.0;
    double z0 = 0.0;
    int replications = 2000;
    double ks_tolerance = 0.05;
    double mean_tolerance = 0.15;      // absolute, on mean(R)
    double moment_rel_tolerance = 0.10;  // on E[S^4] vs s_moment
    std::uint64_t seed = 0;
    int threads = 0;
};

// Limit law of the scaled residual time: KS of R_N = 3 T^{-3} S_N^4 against
// the non-central chi-squared(1, 3 z0^2/T), moment comparisons against the
// exact generating function, and the S-hat variants.
ConvergenceReport verify_residual_law(const ResidualOptions& opt);

struct StoppingOptions {
    std::vector<double> rho_list = {3.0};
    std::vector<std::int64_t> n_ladder = {1000, 10000};
    double total_fortune = 1.0;
    double z0 = 0.0;
    int replications = 2000;
    double final_rel_tolerance = 0.10;
    std::uint64_t seed = 0;
    int threads = 0;
};

// Optional-stopping identity: Monte Carlo E[(T-tau_N)^rho h_rho(N(T-tau_N)/2)]
// against T^rho h_rho(z0^2/(2T)), with the event-count variant
// E[(T-K/N)^rho h_rho(N(T-K/N)/2)] reported alongside. Requires rho > 9/4.
ConvergenceReport verify_optional_stopping(const StoppingOptions& opt);

struct InequalityOptions {
    std::int64_t draws = 100000;
    double max_units = 10000.0;
    double rel_slack = 1e-9;
    std::uint64_t seed = 0;
};

// Randomized check of the submartingale inequality
//   [(x+y-1)^a (x-y+1)^b - (x+y)^a (x-y)^b] x
//   + [(x+y-1)^a |x-y-1|^b - (x+y)^a (x-y)^b] y >= 0
// for x >= y+1 >= 2 and b/a > ln 2 / ln(3/2), evaluated in log space.
ConvergenceReport verify_inequality(const InequalityOptions& opt);

// Eulerian-relation experiment (wraps exact::verify_eulerian_relation).
ConvergenceReport verify_eulerian(int m_max);

}  // namespace ruinlab::analysis
