#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ruinlab/rng.hpp"

namespace ruinlab::simulate {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SimConfig {
    std::int64_t n_scale = 10000;  // N
    double x0 = 0.5;               // macroscopic initial fortunes
    double y0 = 0.5;
    double z0_offset = 0.0;        // symmetric +-z0/(2 sqrt N) split applied on top of x0,y0
    std::uint64_t seed = 0;
    int replications = 1;
    int threads = 0;               // 0 = hardware concurrency
};

// Initial fortunes in units, after half-to-even rounding. The realized z0 and
// T are recomputed from the rounded integers; the residual-time law is
// sensitive to both, so all comparisons downstream use these values.
struct RealizedInit {
    std::int64_t units_a = 0;
    std::int64_t units_b = 0;
    double total_fortune = 0.0;  // T = (units_a + units_b)/N
    double z0 = 0.0;             // (units_a - units_b)/sqrt(N)
};

RealizedInit realize_initial(const SimConfig& cfg);

// Criticality gate for the residual sampler: the realized unit gap must obey
// |a - b| <= 2 sqrt(N) (|z0|+1) with z0 the *declared* offset, so a genuinely
// lopsided (x0, y0) cannot masquerade as critical.
bool is_critical(const RealizedInit& init, std::int64_t n_scale, double declared_z0);

struct PlayResult {
    bool a_ruined = false;
    std::int64_t event_count = 0;
};

// One war of ruins on the embedded chain: the side holding m of m+n units
// keeps them with probability m/(m+n) while the opponent discards one.
PlayResult play_discrete(std::int64_t m, std::int64_t n, Xoshiro256pp& rng);

// Kaigh's simple random war: each round discards from either side with
// probability 1/2.
PlayResult play_simple(std::int64_t m, std::int64_t n, Xoshiro256pp& rng);

struct ScaledTrajectory {
    std::vector<double> times;  // requested grid times <= tau_n
    std::vector<double> x;      // macroscopic fortunes at those times
    std::vector<double> y;
    std::vector<double> z;      // sqrt(N) (x - y)
    std::int64_t event_count = 0;
    double tau_n = 0.0;         // macroscopic ruin time (per-event clock)
    double tau_hat = 0.0;       // event-count proxy K/N
    bool a_ruined = false;
    int truncated_grid_points = 0;  // grid entries beyond tau_n (reported, not an error)
};

// Continuous-time run with unit-mean exponential waiting times. When a grid
// is supplied the per-event clock is generated so states can be read off at
// grid times; tau_n is the exact time of the last event.
ScaledTrajectory play_continuous(const SimConfig& cfg, std::span<const double> grid,
                                 Xoshiro256pp& rng);

struct ResidualSampleSet {
    SimConfig config;
    RealizedInit init;
    std::vector<double> s;      // S_N = N^{1/4} (T - tau_N)
    std::vector<double> s_hat;  // N^{1/4} (T - K/N)
    std::vector<double> r;      // 3 T^{-3} S_N^4
    std::vector<std::int64_t> event_counts;
};

// Replication loop over the critical configuration; refuses non-critical
// setups. Ruin times use the Gamma(K,1)/N shortcut (exact in distribution).
// Replication i draws from stream (seed, i); runs are deterministic for a
// given config and independent of thread count.
ResidualSampleSet sample_residuals(const SimConfig& cfg);

struct DiffusionPath {
    std::vector<double> times;
    std::vector<double> z;
};

// Exact sampler of z_t = (1-t/T)^{-1} [z0 + int_0^t (1-s/T) dW]: increments
// of the integral over grid cells are independent Gaussians with variance
// (T/3)[(1-s/T)^3 - (1-t/T)^3], so there is no discretization error.
DiffusionPath sample_diffusion(double total_fortune, double z0,
                               std::span<const double> grid, Xoshiro256pp& rng);

// CSV writers (15 significant digits, LF endings).
void write_trajectory_csv(std::ostream& os, const ScaledTrajectory& traj);
void write_residuals_csv(std::ostream& os, const ResidualSampleSet& set);
// JSON sidecar with the echoed configuration and realized initial state.
std::string config_sidecar_json(const SimConfig& cfg, const RealizedInit& init);

// Runs fn(i) for i in [0, count) on up to `threads` workers (0 = hardware).
// Used for replication loops; results must be written to index i only.
void parallel_for(std::int64_t count, int threads, const std::function<void(std::int64_t)>& fn);

}  // namespace ruinlab::simulate
