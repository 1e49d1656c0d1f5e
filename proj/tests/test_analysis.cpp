#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ruinlab/analysis.hpp"

using namespace ruinlab;
using analysis::EmpiricalCDF;

TEST_CASE("normal cdf") {
    CHECK(analysis::normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(analysis::normal_cdf(1.0) ==
          doctest::Approx(0.841344746068543).epsilon(1e-12));
    CHECK(analysis::normal_cdf(-1.0) + analysis::normal_cdf(1.0) ==
          doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("ks distance on perfect quantiles") {
    const int n = 1000;
    std::vector<double> xs(n);
    for (int i = 1; i <= n; ++i) xs[i - 1] = static_cast<double>(i) / (n + 1);
    EmpiricalCDF emp(xs);
    const double d = analysis::ks_distance(emp, [](double x) { return x; });
    CHECK(d <= 1.0 / (n + 1) + 1e-12);
}

TEST_CASE("ks distance at an atom") {
    EmpiricalCDF emp(std::vector<double>(50, 2.0));
    const double d =
        analysis::ks_distance(emp, [](double x) { return x >= 2.0 ? 1.0 : 0.0; });
    CHECK(d == 0.0);
}

TEST_CASE("ks distance error paths") {
    CHECK_THROWS_AS(EmpiricalCDF({}), std::domain_error);
    EmpiricalCDF one(std::vector<double>{1.0});
    CHECK_THROWS_AS(analysis::ks_distance(one, [](double) { return 0.5; }),
                    std::domain_error);
}

TEST_CASE("uniform sample beats the 99% Kolmogorov quantile") {
    // D_n <= 1.63/sqrt(n) holds for ~99% of seeds; a point estimate over
    // `seeds` runs is binomial, so allow three binomial standard errors.
    const int n = 10000, seeds = 1000;
    int below = 0;
    for (int s = 0; s < seeds; ++s) {
        std::vector<double> xs(n);
        Xoshiro256pp rng = replication_stream(123, static_cast<std::uint64_t>(s));
        for (auto& x : xs) x = rng.uniform01();
        EmpiricalCDF emp(std::move(xs));
        const double d = analysis::ks_distance(emp, [](double x) {
            return std::min(1.0, std::max(0.0, x));
        });
        if (d < 1.63 / std::sqrt(static_cast<double>(n))) ++below;
    }
    const double frac = below / static_cast<double>(seeds);
    const double se = std::sqrt(0.99 * 0.01 / seeds);
    CHECK(frac >= 0.99 - 3.0 * se);
}

TEST_CASE("two-sample ks of identical samples is zero") {
    std::vector<double> xs{0.1, 0.4, 0.9, 2.2};
    CHECK(analysis::ks_distance_two_sample(EmpiricalCDF(xs), EmpiricalCDF(xs)) == 0.0);
}

TEST_CASE("empirical cdf is a right-continuous step function") {
    EmpiricalCDF emp(std::vector<double>{3.0, 1.0, 2.0, 2.0});
    CHECK(emp(0.5) == 0.0);
    CHECK(emp(1.0) == 0.25);
    CHECK(emp(2.0) == 0.75);
    CHECK(emp.left_limit(2.0) == 0.25);
    CHECK(emp(10.0) == 1.0);
}

TEST_CASE("verdict is a pure function of the report") {
    analysis::ConvergenceReport rep;
    rep.trend = analysis::Trend::non_increasing;
    rep.max_trend_violations = 0;
    rep.ladder = {{100, 0.05, 0.0, true}, {1000, 0.02, 0.0, true}, {10000, 0.01, 0.015, true}};
    analysis::evaluate_verdict(rep);
    CHECK(rep.pass);
    rep.ladder[2].metric = 0.03;  // fails the final tolerance
    analysis::evaluate_verdict(rep);
    CHECK(!rep.pass);
    rep.ladder[2].metric = 0.01;
    rep.ladder[1].metric = 0.06;  // breaks monotonicity
    analysis::evaluate_verdict(rep);
    CHECK(!rep.pass);
    rep.max_trend_violations = 2;  // rung slack forgives it
    analysis::evaluate_verdict(rep);
    CHECK(rep.pass);
    rep.checks.push_back({"side", 2.0, 1.0, false});
    analysis::evaluate_verdict(rep);
    CHECK(!rep.pass);
}

TEST_CASE("clt experiments share one code path") {
    // same operation, parameterized only by table kind and limit CDF
    analysis::CltOptions opt;
    opt.m_ladder = {50, 200};
    opt.final_tolerance = 1.0;  // structural test, not a convergence claim
    const auto prop = analysis::verify_clt(exact::TableKind::proportional, opt);
    const auto simp = analysis::verify_clt(exact::TableKind::simple, opt);
    CHECK(prop.ladder.size() == simp.ladder.size());
    CHECK(prop.name == "clt-proportional");
    CHECK(simp.name == "clt-simple");
    // x = 0 rung is exact by symmetry for both kinds: p(m,m) = q(m,m) = 1/2
    for (const auto& rep : {prop, simp}) {
        for (const auto& row : rep.diagnostics["grid"]) {
            if (row["x"].get<double>() == 0.0) {
                CHECK(row["table"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("clt-simple converges to Phi(x/sqrt 2)") {
    analysis::CltOptions opt;
    opt.m_ladder = {100, 1000};
    opt.final_tolerance = 0.005;
    const auto rep = analysis::verify_clt(exact::TableKind::simple, opt);
    CHECK(rep.pass);
    CHECK(rep.ladder.back().metric < rep.ladder.front().metric);
}

TEST_CASE("degenerate winner complementarity") {
    analysis::WinnerOptions a;
    a.x0 = 0.4;
    a.y0 = 0.6;
    a.n_ladder = {50, 500, 2000};
    analysis::WinnerOptions b = a;
    std::swap(b.x0, b.y0);
    const auto ra = analysis::verify_winner_degenerate(a);
    const auto rb = analysis::verify_winner_degenerate(b);
    CHECK(ra.pass);
    CHECK(rb.pass);
    for (std::size_t i = 0; i < ra.ladder.size(); ++i) {
        const double pa = ra.diagnostics["p_values"][i].get<double>();
        const double pb = rb.diagnostics["p_values"][i].get<double>();
        CHECK(std::abs(pa + pb - 1.0) <= 1e-12);
    }
    // Table-1 anchor at N = 2000 with x0 = 0.48: p(960, 1040) = 0.999
    analysis::WinnerOptions c;
    c.x0 = 0.48;
    c.y0 = 0.52;
    c.n_ladder = {2000};
    const auto rc = analysis::verify_winner_degenerate(c);
    CHECK(std::abs(rc.diagnostics["p_values"][0].get<double>() - 0.999) <= 5e-4);
    CHECK_THROWS_AS(analysis::verify_winner_degenerate({0.5, 0.5, {10}, 0.01}),
                    simulate::config_error);
}

TEST_CASE("eulerian experiment") {
    const auto rep = analysis::verify_eulerian(12);
    CHECK(rep.pass);
    CHECK(rep.diagnostics["convention"] == "A(m+n, n-1)");
}

TEST_CASE("inequality experiment reports the concave-power failures") {
    analysis::InequalityOptions opt;
    opt.draws = 20000;
    opt.seed = 1729;
    const auto rep = analysis::verify_inequality(opt);
    // the relation is sound exactly on the convex branch b >= 1
    CHECK(rep.diagnostics["worst_relative_margin_b_at_least_1"].get<double>() >= -1e-9);
    const auto viol = rep.diagnostics["violations_with_b_below_1"].get<std::int64_t>();
    const auto total_viol = static_cast<std::int64_t>(rep.checks[0].value);
    CHECK(viol == total_viol);
}

TEST_CASE("report json schema") {
    const auto rep = analysis::verify_eulerian(6);
    const auto j = rep.to_json();
    for (const char* key :
         {"name", "config", "ladder", "verdict", "seed", "runtime_seconds"})
        CHECK(j.contains(key));
    CHECK(j["ladder"].is_array());
    for (const auto& rung : j["ladder"]) {
        CHECK(rung.contains("scale"));
        CHECK(rung.contains("metric"));
        CHECK(rung.contains("tolerance"));
        CHECK(rung.contains("pass"));
    }
    std::ostringstream os;
    rep.write_curve_csv(os);
    CHECK(os.str().rfind("x,empirical,limit\n", 0) == 0);
}

TEST_CASE("fluid closed form satisfies the conservation identity") {
    // x_t + y_t = T - t for the closed-form pair, checked algebraically
    const double T = 1.0;
    auto u = [T](double u0, double t) {
        return u0 * T / (T - t) + 0.5 * ((T - t) * (T - t) - T * T) / (T - t);
    };
    for (double t : {0.0, 0.2, 0.4})
        CHECK(u(0.6, t) + u(0.4, t) == doctest::Approx(T - t).epsilon(1e-14));
}

TEST_CASE("fluid experiment at desk scale") {
    analysis::FluidOptions opt;
    opt.n_ladder = {100, 1000};
    opt.replications = 100;
    opt.seed = 2;
    opt.threads = 2;
    const auto rep = analysis::verify_fluid(opt);
    CHECK(rep.ladder.back().metric <= 0.05);
    // simulated fortunes stay positive slightly before extinction
    CHECK(rep.curve.back()[1] > 0.0);
}
