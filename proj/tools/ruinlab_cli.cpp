// ruinlab: exact tables, simulators and verification experiments for the
// proportional-fortune war of ruins and its scaling limits.
//
// Subcommands: exact, table, simulate, verify, specfn. All outputs use 15
// significant digits, '.' decimal separator and LF line endings; every run is
// reproducible byte-for-byte from its flags (including --seed) regardless of
// --threads.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ruinlab/analysis.hpp"
#include "ruinlab/exact.hpp"
#include "ruinlab/simulate.hpp"
#include "ruinlab/specfn.hpp"

namespace fs = std::filesystem;
using namespace ruinlab;

namespace {

constexpr std::uint64_t kDefaultSeed = 1729;

std::uint64_t seed_from_env_or_default() {
    if (const char* env = std::getenv("RUINLAB_SEED")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') return static_cast<std::uint64_t>(v);
        std::cerr << "warning: ignoring malformed RUINLAB_SEED\n";
    }
    return kDefaultSeed;
}

std::string fmt15(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
}

struct TableRow {
    int total, m;
};

std::vector<TableRow> parse_rows_spec(const std::string& arg) {
    // "20:8,9,10;100:45,48,50" -> rows (20,8), (20,9), ...
    try {
        std::vector<TableRow> rows;
        std::stringstream blocks(arg);
        std::string block;
        while (std::getline(blocks, block, ';')) {
            const auto colon = block.find(':');
            if (colon == std::string::npos) throw std::invalid_argument(block);
            const int total = std::stoi(block.substr(0, colon));
            std::stringstream ms(block.substr(colon + 1));
            std::string mtok;
            while (std::getline(ms, mtok, ',')) rows.push_back({total, std::stoi(mtok)});
        }
        return rows;
    } catch (const std::logic_error&) {
        throw simulate::config_error("--rows expects total:m1,m2;total:m1,...");
    }
}

std::vector<double> parse_number_list(const std::string& arg, const char* flag) {
    try {
        std::vector<double> out;
        std::stringstream ss(arg);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
        return out;
    } catch (const std::logic_error&) {
        throw simulate::config_error(std::string(flag) + " expects a comma-separated "
                                                         "list of numbers");
    }
}

constexpr const char* kDefaultRows =
    "20:8,9,10;100:45,48,50;200:90,95,100;1000:480,490,500;2000:960,980,1000";

int cmd_exact(int m, int n, const std::string& kind) {
    const auto tk = kind == "simple" ? exact::TableKind::simple
                                     : exact::TableKind::proportional;
    const std::vector<std::pair<int, int>> pts{{m, n}};
    const double v = exact::values_at(tk, pts)[0];
    std::cout << fmt15(v) << "\n";
    if (tk == exact::TableKind::proportional && m + n <= exact::kExplicitMaxTotal) {
        const mpq_class r = exact::p_explicit(m, n);
        std::cout << "exact: " << r.get_str() << "\n";
    }
    return 0;
}

int cmd_table(int max_total, const std::string& rows_spec, const fs::path& out_dir,
              bool full) {
    const auto rows = parse_rows_spec(rows_spec);
    for (const auto& r : rows)
        if (r.total > max_total)
            throw simulate::config_error("rows spec exceeds --max-total");
    std::vector<std::pair<int, int>> pts;
    for (const auto& r : rows) pts.emplace_back(r.m, r.total - r.m);
    const auto pv = exact::values_at(exact::TableKind::proportional, pts);
    const auto qv = exact::values_at(exact::TableKind::simple, pts);

    std::ostringstream os;
    os << "m_plus_n,m,n,p,q\n";
    for (std::size_t i = 0; i < rows.size(); ++i)
        os << rows[i].total << ',' << rows[i].m << ',' << rows[i].total - rows[i].m
           << ',' << fmt15(pv[i]) << ',' << fmt15(qv[i]) << "\n";
    fs::create_directories(out_dir);
    write_file(out_dir / "table.csv", os.str());
    std::cout << os.str();

    if (full) {
        const auto pt = exact::ProbabilityTable::build(exact::TableKind::proportional,
                                                       max_total);
        const auto qt = exact::ProbabilityTable::build(exact::TableKind::simple,
                                                       max_total);
        std::ofstream pos(out_dir / "p_table.csv", std::ios::binary);
        pt.write_csv(pos);
        std::ofstream qos(out_dir / "q_table.csv", std::ios::binary);
        qt.write_csv(qos);
    }
    return 0;
}

int cmd_simulate(const simulate::SimConfig& cfg, bool residuals,
                 const std::vector<double>& grid, int rep_index,
                 const fs::path& out_dir) {
    fs::create_directories(out_dir);
    const auto init = simulate::realize_initial(cfg);
    write_file(out_dir / "config.json", simulate::config_sidecar_json(cfg, init));
    if (residuals) {
        const auto set = simulate::sample_residuals(cfg);
        std::ostringstream os;
        simulate::write_residuals_csv(os, set);
        write_file(out_dir / "residuals.csv", os.str());
        std::cout << "wrote " << (out_dir / "residuals.csv").string() << " ("
                  << set.s.size() << " rows)\n";
        return 0;
    }
    if (grid.empty())
        throw simulate::config_error("simulate needs --residuals or --grid t1,t2,...");
    if (rep_index < 0 || rep_index >= cfg.replications)
        throw simulate::config_error("--rep-index out of range");
    Xoshiro256pp rng =
        replication_stream(cfg.seed, static_cast<std::uint64_t>(rep_index));
    const auto traj = simulate::play_continuous(cfg, grid, rng);
    std::ostringstream os;
    simulate::write_trajectory_csv(os, traj);
    write_file(out_dir / "trajectory.csv", os.str());
    std::cout << "wrote " << (out_dir / "trajectory.csv").string() << " (tau_N="
              << fmt15(traj.tau_n) << ", events=" << traj.event_count;
    if (traj.truncated_grid_points > 0)
        std::cout << ", " << traj.truncated_grid_points
                  << " grid points beyond tau_N truncated";
    std::cout << ")\n";
    return 0;
}

// Writes the canonical JSON report plus the plot-ready curve CSV; --format
// only selects which of the two is echoed to stdout.
int emit_report(const analysis::ConvergenceReport& rep, const fs::path& out_dir,
                const std::string& format) {
    fs::create_directories(out_dir);
    write_file(out_dir / ("report_" + rep.name + ".json"), rep.to_json().dump(2) + "\n");
    std::ostringstream curve;
    rep.write_curve_csv(curve);
    if (!rep.curve.empty())
        write_file(out_dir / (rep.name + "_curve.csv"), curve.str());
    if (format == "csv")
        std::cout << curve.str();
    else
        std::cout << rep.to_json().dump(2) << "\n";
    std::cout << (rep.pass ? "PASS" : "FAIL") << " " << rep.name << "\n";
    return rep.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"war-of-ruins numerics: exact ruin probabilities, jump-process "
                 "simulators, the limiting diffusion and residual-time law"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::uint64_t seed = seed_from_env_or_default();
    int threads = 0;
    std::string out_dir = ".";
    std::string format = "json";
    app.add_option("--seed", seed,
                   "RNG seed (default " + std::to_string(kDefaultSeed) +
                       "; env RUINLAB_SEED overrides the default when --seed absent)");
    app.add_option("--threads", threads, "worker cap, 0 = hardware parallelism");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "report format: json (canonical) or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    // exact
    auto* sc_exact = app.add_subcommand("exact", "print one exact win probability");
    int ex_m = 0, ex_n = 0;
    std::string ex_kind = "proportional";
    sc_exact->add_option("--m", ex_m, "units of army A")->required();
    sc_exact->add_option("--n", ex_n, "units of army B")->required();
    sc_exact->add_option("--kind", ex_kind, "proportional (default) or simple")
        ->check(CLI::IsMember({"proportional", "simple"}));

    // table
    auto* sc_table = app.add_subcommand("table", "emit win-probability tables as CSV");
    int tb_max = 2000;
    std::string tb_rows = kDefaultRows;
    bool tb_full = false;
    sc_table->add_option("--max-total", tb_max, "largest m+n supported (<= 4000)");
    sc_table->add_option("--rows", tb_rows,
                         "rows to print, \"total:m1,m2;total:m1,...\" (default: the "
                         "five standard blocks)");
    sc_table->add_flag("--full", tb_full, "also dump full p/q tables up to --max-total");

    // simulate
    auto* sc_sim = app.add_subcommand("simulate", "run the continuous-time war of ruins");
    simulate::SimConfig cfg;
    bool residuals = false;
    std::string grid_spec;
    int rep_index = 0;
    sc_sim->add_option("--n-scale", cfg.n_scale, "scale parameter N")->required();
    sc_sim->add_option("--x0", cfg.x0, "macroscopic initial fortune of A")->required();
    sc_sim->add_option("--y0", cfg.y0, "macroscopic initial fortune of B")->required();
    sc_sim->add_option("--z0", cfg.z0_offset,
                       "scaled difference applied as a symmetric +-z0/(2 sqrt N) split "
                       "on top of (x0, y0); default 0");
    sc_sim->add_option("--reps", cfg.replications, "number of replications")->required();
    sc_sim->add_flag("--residuals", residuals,
                     "collect S_N, S_hat_N, R_N over all replications (critical "
                     "configurations only)");
    sc_sim->add_option("--grid", grid_spec,
                       "comma-separated macroscopic sample times for one trajectory");
    sc_sim->add_option("--rep-index", rep_index,
                       "which replication's trajectory to write (default 0)");

    // verify
    auto* sc_verify = app.add_subcommand("verify", "run one named experiment");
    std::string experiment;
    sc_verify
        ->add_option("experiment", experiment,
                     "one of: clt-proportional, clt-simple, fluid, winner, diffusion, "
                     "residual, stopping, eulerian, inequality")
        ->required();
    std::string ladder_spec;
    std::int64_t v_nscale = 10000;
    double v_z0 = 0.0, v_x0 = -1.0, v_y0 = -1.0;
    int v_reps = 2000;
    int v_max = 12;
    std::vector<double> v_rho{3.0};
    sc_verify->add_option("--ladder", ladder_spec, "comma-separated scale ladder");
    sc_verify->add_option("--n-scale", v_nscale, "N for single-scale experiments");
    sc_verify->add_option("--z0", v_z0, "scaled initial difference");
    sc_verify->add_option("--x0", v_x0, "macroscopic x0 (fluid/winner)");
    sc_verify->add_option("--y0", v_y0, "macroscopic y0 (fluid/winner)");
    auto* reps_opt =
        sc_verify->add_option("--reps", v_reps, "replications per rung (default 2000; "
                                                "fluid defaults to 200)");
    sc_verify->add_option("--max", v_max, "range bound (eulerian)");
    sc_verify->add_option("--rho", v_rho, "rho list (stopping)");
    bool fresh_seed = false;
    sc_verify->add_flag("--fresh-seed", fresh_seed,
                        "draw the seed from the system clock instead of the default "
                        "(robustness sweeps)");

    // specfn
    auto* sc_specfn = app.add_subcommand("specfn", "special-function evaluation");
    auto* sc_eval = sc_specfn->add_subcommand("eval", "evaluate h_rho(x)");
    double sf_rho = 0.0, sf_x = 0.0;
    bool sf_log = false;
    sc_eval->add_option("--rho", sf_rho, "index rho >= 0")->required();
    sc_eval->add_option("--x", sf_x, "argument x >= 0")->required();
    sc_eval->add_flag("--log", sf_log, "print log h_rho(x) instead");
    sc_specfn->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        cfg.seed = seed;
        cfg.threads = threads;
        if (sc_exact->parsed()) return cmd_exact(ex_m, ex_n, ex_kind);
        if (sc_table->parsed()) return cmd_table(tb_max, tb_rows, out_dir, tb_full);
        if (sc_sim->parsed()) {
            std::vector<double> grid;
            if (!grid_spec.empty()) grid = parse_number_list(grid_spec, "--grid");
            return cmd_simulate(cfg, residuals, grid, rep_index, out_dir);
        }
        if (sc_specfn->parsed()) {
            const double v = sf_log ? specfn::log_h_rho(sf_rho, sf_x)
                                    : specfn::h_rho(sf_rho, sf_x);
            std::cout << fmt15(v) << "\n";
            return 0;
        }
        if (sc_verify->parsed()) {
            if (fresh_seed)
                seed = static_cast<std::uint64_t>(
                    std::chrono::steady_clock::now().time_since_epoch().count());
            std::vector<std::int64_t> ladder;
            for (double v : ladder_spec.empty()
                                ? std::vector<double>{}
                                : parse_number_list(ladder_spec, "--ladder"))
                ladder.push_back(static_cast<std::int64_t>(v));
            analysis::ConvergenceReport rep;
            if (experiment == "clt-proportional" || experiment == "clt-simple") {
                analysis::CltOptions opt;
                if (!ladder.empty())
                    opt.m_ladder.assign(ladder.begin(), ladder.end());
                rep = analysis::verify_clt(experiment == "clt-simple"
                                               ? exact::TableKind::simple
                                               : exact::TableKind::proportional,
                                           opt);
            } else if (experiment == "fluid") {
                analysis::FluidOptions opt;
                if (v_x0 >= 0) opt.x0 = v_x0;
                if (v_y0 >= 0) opt.y0 = v_y0;
                if (!ladder.empty()) opt.n_ladder = ladder;
                if (reps_opt->count() > 0) opt.replications = v_reps;
                opt.seed = seed;
                opt.threads = threads;
                rep = analysis::verify_fluid(opt);
            } else if (experiment == "winner") {
                analysis::WinnerOptions opt;
                if (v_x0 >= 0) opt.x0 = v_x0;
                if (v_y0 >= 0) opt.y0 = v_y0;
                if (!ladder.empty()) opt.n_ladder = ladder;
                rep = analysis::verify_winner_degenerate(opt);
            } else if (experiment == "diffusion") {
                analysis::DiffusionOptions opt;
                opt.n_scale = v_nscale;
                opt.z0 = v_z0;
                opt.replications = v_reps;
                opt.seed = seed;
                opt.threads = threads;
                rep = analysis::verify_diffusion(opt);
            } else if (experiment == "residual") {
                analysis::ResidualOptions opt;
                opt.n_scale = v_nscale;
                opt.z0 = v_z0;
                opt.replications = v_reps;
                opt.ks_tolerance = std::abs(v_z0) < 1e-12 ? 0.05 : 0.06;
                opt.mean_tolerance = std::abs(v_z0) < 1e-12 ? 0.15 : 0.5;
                opt.seed = seed;
                opt.threads = threads;
                rep = analysis::verify_residual_law(opt);
            } else if (experiment == "stopping") {
                analysis::StoppingOptions opt;
                if (!ladder.empty()) opt.n_ladder = ladder;
                opt.rho_list = v_rho;
                opt.z0 = v_z0;
                opt.replications = v_reps;
                opt.seed = seed;
                opt.threads = threads;
                rep = analysis::verify_optional_stopping(opt);
            } else if (experiment == "eulerian") {
                rep = analysis::verify_eulerian(v_max);
            } else if (experiment == "inequality") {
                analysis::InequalityOptions opt;
                opt.seed = seed;
                rep = analysis::verify_inequality(opt);
            } else {
                std::cerr << "unknown experiment: " << experiment << "\n";
                return 2;
            }
            return emit_report(rep, out_dir, format);
        }
    } catch (const simulate::config_error& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
