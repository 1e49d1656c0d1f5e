#include "ruinlab/simulate.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <thread>

namespace ruinlab::simulate {

namespace {

std::int64_t round_half_even(double v) {
    // nearbyint under the default FE_TONEAREST mode is round-half-to-even
    return static_cast<std::int64_t>(std::nearbyint(v));
}

void check_grid(std::span<const double> grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0)) throw std::domain_error("grid times must be >= 0");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::domain_error("grid times must be strictly increasing");
    }
}

}  // namespace

RealizedInit realize_initial(const SimConfig& cfg) {
    if (cfg.n_scale < 1) throw config_error("n_scale must be >= 1");
    if (cfg.replications < 1) throw config_error("replications must be >= 1");
    const double n = static_cast<double>(cfg.n_scale);
    const double split = cfg.z0_offset * std::sqrt(n) / 2.0;
    RealizedInit init;
    init.units_a = round_half_even(cfg.x0 * n + split);
    init.units_b = round_half_even(cfg.y0 * n - split);
    if (init.units_a < 1 || init.units_b < 1)
        throw config_error("initial fortunes must round to positive unit counts");
    init.total_fortune = static_cast<double>(init.units_a + init.units_b) / n;
    init.z0 = static_cast<double>(init.units_a - init.units_b) / std::sqrt(n);
    return init;
}

bool is_critical(const RealizedInit& init, std::int64_t n_scale, double declared_z0) {
    const double gap = std::abs(static_cast<double>(init.units_a - init.units_b));
    return gap <=
           2.0 * std::sqrt(static_cast<double>(n_scale)) * (std::abs(declared_z0) + 1.0);
}

PlayResult play_discrete(std::int64_t m, std::int64_t n, Xoshiro256pp& rng) {
    if (m < 0 || n < 0 || m + n < 1)
        throw std::domain_error("play_discrete: need m,n >= 0 and m+n >= 1");
    PlayResult r;
    while (m > 0 && n > 0) {
        const double p_a_wins = static_cast<double>(m) / static_cast<double>(m + n);
        if (rng.uniform01() < p_a_wins)
            --n;
        else
            --m;
        ++r.event_count;
    }
    r.a_ruined = (m == 0);
    return r;
}

PlayResult play_simple(std::int64_t m, std::int64_t n, Xoshiro256pp& rng) {
    if (m < 0 || n < 0 || m + n < 1)
        throw std::domain_error("play_simple: need m,n >= 0 and m+n >= 1");
    PlayResult r;
    while (m > 0 && n > 0) {
        if (rng.uniform01() < 0.5)
            --n;
        else
            --m;
        ++r.event_count;
    }
    r.a_ruined = (m == 0);
    return r;
}

ScaledTrajectory play_continuous(const SimConfig& cfg, std::span<const double> grid,
                                 Xoshiro256pp& rng) {
    check_grid(grid);
    const RealizedInit init = realize_initial(cfg);
    const double n = static_cast<double>(cfg.n_scale);
    const double sqrt_n = std::sqrt(n);

    ScaledTrajectory traj;
    std::int64_t a = init.units_a, b = init.units_b;
    double clock_micro = 0.0;
    std::size_t gi = 0;

    auto record_state = [&](double t) {
        traj.times.push_back(t);
        traj.x.push_back(static_cast<double>(a) / n);
        traj.y.push_back(static_cast<double>(b) / n);
        traj.z.push_back(static_cast<double>(a - b) / sqrt_n);
    };

    while (a > 0 && b > 0) {
        const double event_time = clock_micro + rng.exponential();
        while (gi < grid.size() && grid[gi] * n < event_time) record_state(grid[gi++]);
        const double p_a_wins = static_cast<double>(a) / static_cast<double>(a + b);
        if (rng.uniform01() < p_a_wins)
            --b;
        else
            --a;
        clock_micro = event_time;
        ++traj.event_count;
    }
    traj.a_ruined = (a == 0);
    traj.tau_n = clock_micro / n;
    traj.tau_hat = static_cast<double>(traj.event_count) / n;
    traj.truncated_grid_points = static_cast<int>(grid.size() - gi);
    return traj;
}

ResidualSampleSet sample_residuals(const SimConfig& cfg) {
    const RealizedInit init = realize_initial(cfg);
    if (!is_critical(init, cfg.n_scale, cfg.z0_offset))
        throw config_error("sample_residuals: configuration is not critical "
                           "(|units_a - units_b| > 2 sqrt(N) (|z0|+1)); the residual "
                           "law holds only at x0 = y0");
    const double n = static_cast<double>(cfg.n_scale);
    const double n_quarter = std::pow(n, 0.25);
    const double T = init.total_fortune;

    ResidualSampleSet set;
    set.config = cfg;
    set.init = init;
    set.s.resize(cfg.replications);
    set.s_hat.resize(cfg.replications);
    set.r.resize(cfg.replications);
    set.event_counts.resize(cfg.replications);

    parallel_for(cfg.replications, cfg.threads, [&](std::int64_t i) {
        Xoshiro256pp rng = replication_stream(cfg.seed, static_cast<std::uint64_t>(i));
        std::int64_t a = init.units_a, b = init.units_b;
        std::int64_t k = 0;
        while (a > 0 && b > 0) {
            const double p_a_wins = static_cast<double>(a) / static_cast<double>(a + b);
            if (rng.uniform01() < p_a_wins)
                --b;
            else
                --a;
            ++k;
        }
        const double tau = rng.gamma(static_cast<double>(k)) / n;
        const double s = n_quarter * (T - tau);
        set.event_counts[i] = k;
        set.s[i] = s;
        set.s_hat[i] = n_quarter * (T - static_cast<double>(k) / n);
        set.r[i] = 3.0 * std::pow(T, -3.0) * s * s * s * s;
    });
    return set;
}

DiffusionPath sample_diffusion(double total_fortune, double z0,
                               std::span<const double> grid, Xoshiro256pp& rng) {
    if (!(total_fortune > 0.0)) throw std::domain_error("sample_diffusion: T > 0");
    check_grid(grid);
    if (!grid.empty() && grid.back() >= total_fortune)
        throw std::domain_error("sample_diffusion: grid must stay below T (the "
                                "process blows up at T)");
    const double T = total_fortune;
    DiffusionPath path;
    path.times.assign(grid.begin(), grid.end());
    path.z.resize(grid.size());
    double integral = z0;  // z0 + int_0^t (1-s/T) dW
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const double c0 = 1.0 - prev / T, c1 = 1.0 - t / T;
        const double var = T / 3.0 * (c0 * c0 * c0 - c1 * c1 * c1);
        if (var > 0.0) integral += std::sqrt(var) * rng.normal();
        path.z[i] = integral / c1;
        prev = t;
    }
    return path;
}

void write_trajectory_csv(std::ostream& os, const ScaledTrajectory& traj) {
    os << "t,x,y,z\n";
    char buf[128];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g\n", traj.times[i],
                      traj.x[i], traj.y[i], traj.z[i]);
        os << buf;
    }
}

void write_residuals_csv(std::ostream& os, const ResidualSampleSet& set) {
    os << "rep,s,s_hat,r\n";
    char buf[128];
    for (std::size_t i = 0; i < set.s.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.15g,%.15g,%.15g\n", i, set.s[i],
                      set.s_hat[i], set.r[i]);
        os << buf;
    }
}

std::string config_sidecar_json(const SimConfig& cfg, const RealizedInit& init) {
    // --threads is deliberately not echoed: results are independent of it
    nlohmann::json j;
    j["n_scale"] = cfg.n_scale;
    j["x0"] = cfg.x0;
    j["y0"] = cfg.y0;
    j["z0_offset"] = cfg.z0_offset;
    j["seed"] = cfg.seed;
    j["replications"] = cfg.replications;
    j["realized"] = {{"units_a", init.units_a},
                     {"units_b", init.units_b},
                     {"total_fortune", init.total_fortune},
                     {"z0", init.z0}};
    return j.dump(2) + "\n";
}

void parallel_for(std::int64_t count, int threads,
                  const std::function<void(std::int64_t)>& fn) {
    int workers = threads > 0 ? threads
                              : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, count));
    if (workers <= 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }
    const std::int64_t chunk = (count + workers - 1) / workers;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        const std::int64_t lo = w * chunk;
        const std::int64_t hi = std::min<std::int64_t>(lo + chunk, count);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (std::int64_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ruinlab::simulate
