#include <doctest.h>

#include <cmath>

#include "mvconvex/feq.hpp"

using namespace mvconvex;

namespace {
const Interval kLine = Interval::whole_line();
}

TEST_CASE("invert_monotone recovers known inverses") {
    Tolerance tol;
    RealFunction ex = RealFunction::parse_on("exp(x)", kLine);
    CHECK(invert_monotone(ex, 1.0, tol) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(invert_monotone(ex, std::exp(2.0), tol) == doctest::Approx(2.0).epsilon(1e-9));
    RealFunction neg = RealFunction::parse_on("-x", kLine);
    CHECK(invert_monotone(neg, 3.0, tol) == doctest::Approx(-3.0).epsilon(1e-9));
    RealFunction lg = RealFunction::parse_on("log(x)", Interval(0.0, kInf));
    CHECK(invert_monotone(lg, 4.0, tol) == doctest::Approx(std::exp(4.0)).epsilon(1e-9));
}

TEST_CASE("mv_inequality_check examples") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    CHECK(mv_inequality_check(RealFunction::parse_on("x^2/2", kLine),
                              RealFunction::parse_on("x", kLine), g, tol)
              .pass);
    CHECK(mv_inequality_check(RealFunction::parse_on("exp(x)", kLine),
                              RealFunction::parse_on("log(x)", Interval(0.0, kInf)), g, tol)
              .pass);
    auto rep = mv_inequality_check(RealFunction::parse_on("x^2/2", kLine),
                                   RealFunction::parse_on("x + 10", kLine), g, tol);
    CHECK(!rep.pass);
    CHECK(!rep.witnesses.empty());
}

TEST_CASE("solve_mv_inequality closed forms") {
    Tolerance tol;
    {
        // h = log, h^{-1} = exp: f(t) = e^t when f(0) = 1
        FeqSolution sol = solve_mv_inequality(RealFunction::parse_on("log(x)", Interval(0.0, kInf)),
                                              Interval(-1.0, 1.0), 0.0, 1.0, tol);
        double sup = 0.0;
        for (double t = -0.99; t <= 0.99; t += 0.03)
            sup = std::max(sup, std::abs(sol.f(t) - std::exp(t)));
        CHECK(sup <= 1e-5);
    }
    {
        // h = identity: f(t) = t^2 / 2
        FeqSolution sol = solve_mv_inequality(RealFunction::parse_on("x", kLine),
                                              Interval(-2.0, 2.0), 0.0, 0.0, tol);
        double sup = 0.0;
        for (double t = -1.9; t <= 1.9; t += 0.05)
            sup = std::max(sup, std::abs(sol.f(t) - 0.5 * t * t));
        CHECK(sup <= 1e-5);
    }
    {
        // h = x^(1/3) on (0,inf), h^{-1} = s^3: f(t) = (t^4 - 1)/4 with f(1) = 0
        FeqSolution sol = solve_mv_inequality(RealFunction::parse_on("x^(1/3)", Interval(0.0, kInf)),
                                              Interval(0.1, 2.0), 1.0, 0.0, tol);
        double sup = 0.0;
        for (double t = 0.12; t <= 1.98; t += 0.03)
            sup = std::max(sup, std::abs(sol.f(t) - 0.25 * (t * t * t * t - 1.0)));
        CHECK(sup <= 1e-5);
    }
    CHECK_THROWS_AS(solve_mv_inequality(RealFunction::parse_on("x^2", kLine),
                                        Interval(-1.0, 1.0), 0.0, 0.0, tol),
                    std::invalid_argument);
}

TEST_CASE("solve_mv_inequality round-trip and uniqueness") {
    Tolerance tol;
    RealFunction h = RealFunction::parse_on("log(x)", Interval(0.0, kInf));
    FeqSolution sol = solve_mv_inequality(h, Interval(-1.0, 1.0), 0.0, 1.0, tol);
    GridOptions opt;
    opt.uniform_points = 41;
    opt.lowdisc_points = 8;
    Grid g = make_grid(sol.f.domain(), opt);
    CHECK(mv_inequality_check(sol.f, h, g, tol).pass);
    Tolerance utol = tol;
    utol.abs_tol = 1e-6;
    CHECK(uniqueness_probe(sol.f, h, g, utol).pass);
}

TEST_CASE("solve_mv_equation closed forms and eta samples") {
    Tolerance tol;
    {
        FeqSolution sol = solve_mv_equation(RealFunction::parse_on("2*x", kLine),
                                            Interval(-2.0, 2.0), 0.0, 0.0, tol);
        double sup = 0.0;
        for (double t = -1.9; t <= 1.9; t += 0.05)
            sup = std::max(sup, std::abs(sol.f(t) - t * t));
        CHECK(sup <= 1e-5);
        REQUIRE(sol.eta_sampler);
        CHECK(sol.eta_sampler(0.0, 1.0) == doctest::Approx(0.5).epsilon(1e-5));
        CHECK(sol.eta_sampler(-1.5, 0.5) == doctest::Approx(-0.5).epsilon(1e-5));
    }
    {
        FeqSolution sol = solve_mv_equation(RealFunction::parse_on("exp(x)", kLine),
                                            Interval(-1.0, 1.0), 0.0, 1.0, tol);
        double sup = 0.0;
        for (double t = -0.99; t <= 0.99; t += 0.03)
            sup = std::max(sup, std::abs(sol.f(t) - std::exp(t)));
        CHECK(sup <= 1e-5);
        // eta(0, y) = log((e^y - 1)/y)
        double y = 0.9;
        double expect = std::log((std::exp(y) - 1.0) / y);
        CHECK(sol.eta_sampler(0.0, y) == doctest::Approx(expect).epsilon(1e-5));
    }
}

TEST_CASE("solve_mv_equation output passes mv_check with strictly interior eta") {
    Tolerance tol;
    RealFunction g = RealFunction::parse_on("exp(x)", kLine);
    FeqSolution sol = solve_mv_equation(g, Interval(-1.0, 1.0), 0.0, 1.0, tol);
    Tolerance vtol = tol;
    vtol.abs_tol = std::max(1e-7, 10.0 * sol.reported_error);
    GridOptions opt;
    opt.uniform_points = 41;
    opt.lowdisc_points = 8;
    Grid grid = make_grid(sol.f.domain(), opt);
    auto res = mv_check(sol.f, g, grid, vtol);
    CHECK(res.report.pass);
    CHECK(strict_mean_check(res.samples, vtol).pass);
    // eta from the sampler is strictly between its endpoints
    for (double x : {-0.8, -0.2, 0.4})
        for (double y : {-0.5, 0.1, 0.9}) {
            if (x == y) continue;
            double eta = sol.eta_sampler(x, y);
            CHECK(eta > std::min(x, y));
            CHECK(eta < std::max(x, y));
        }
}

TEST_CASE("equation solutions satisfy the inequality with h = g^{-1}") {
    Tolerance tol;
    RealFunction g = RealFunction::parse_on("exp(x)", kLine);
    FeqSolution sol = solve_mv_equation(g, Interval(-1.0, 1.0), 0.0, 1.0, tol);
    RealFunction gcopy = g;
    Tolerance tcopy = tol;
    RealFunction h = RealFunction::from_callable(
        "inverse(exp)", Interval(0.0, kInf),
        [gcopy, tcopy](double s) { return invert_monotone(gcopy, s, tcopy); });
    GridOptions opt;
    opt.uniform_points = 41;
    opt.lowdisc_points = 8;
    Grid grid = make_grid(sol.f.domain(), opt);
    CHECK(mv_inequality_check(sol.f, h, grid, tol).pass);
}

TEST_CASE("uniqueness_probe examples") {
    Tolerance tol;
    tol.abs_tol = 1e-6;
    Grid g = make_grid(Interval(-1.0, 1.0));
    CHECK(uniqueness_probe(RealFunction::parse_on("exp(x)", kLine),
                           RealFunction::parse_on("log(x)", Interval(0.0, kInf)), g, tol)
              .pass);
    Grid gp = make_grid(Interval(0.1, 2.0));
    CHECK(uniqueness_probe(RealFunction::parse_on("x^2/2", kLine),
                           RealFunction::parse_on("x", kLine), gp, tol)
              .pass);
    auto rep = uniqueness_probe(RealFunction::parse_on("exp(x)", kLine),
                                RealFunction::parse_on("log(x) + 0.1", Interval(0.0, kInf)), g,
                                tol);
    CHECK(!rep.pass);
    CHECK(rep.metrics.at("max_identity_error") == doctest::Approx(0.1).epsilon(1e-3));
}

TEST_CASE("self_convexity_check") {
    Tolerance tol;
    Grid g = make_grid(Interval(-1.0, 1.0));
    {
        auto v = self_convexity_check(RealFunction::parse_on("2*exp(x)", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("lambda") == doctest::Approx(2.0).epsilon(1e-9));
        CHECK(v.fitted_params.at("sup_distance_to_lambda_exp") <= 1e-6);
    }
    {
        auto v = self_convexity_check(RealFunction::parse_on("0", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("lambda") == 0.0);
    }
    {
        auto v = self_convexity_check(RealFunction::parse_on("x^2", kLine), g, tol);
        CHECK(!v.pass);
        CHECK(!v.witnesses.empty());
    }
}

TEST_CASE("self-convexity classification: f(0)=1 solutions are exp") {
    Tolerance tol;
    Grid g = make_grid(Interval(-1.0, 1.0));
    auto v = self_convexity_check(RealFunction::parse_on("exp(x)", kLine), g, tol);
    REQUIRE(v.pass);
    CHECK(v.fitted_params.at("lambda") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(v.fitted_params.at("sup_distance_to_lambda_exp") < 1e-5);
}

TEST_CASE("linear_comparative_solve") {
    Tolerance tol;
    RealFunction zero = RealFunction::parse_on("0", kLine);
    {
        auto v = linear_comparative_solve(1.0, zero, Interval(-1.0, 1.0), 0.0, 3.0, tol);
        CHECK(v.pass);
        REQUIRE(v.constructed.valid());
        CHECK(v.constructed(0.5) == doctest::Approx(3.0 * std::exp(0.5)).epsilon(1e-8));
        CHECK(v.constructed(-0.5) == doctest::Approx(3.0 * std::exp(-0.5)).epsilon(1e-8));
    }
    {
        auto v = linear_comparative_solve(1.0, zero, Interval(-1.0, 1.0), 0.0, -1.0, tol);
        CHECK(!v.pass);  // k f + phi = -e^t is decreasing
    }
    {
        auto v = linear_comparative_solve(0.0, zero, Interval(-1.0, 1.0), 0.0, 5.0, tol);
        CHECK(v.pass);
        CHECK(v.constructed(0.7) == doctest::Approx(5.0).epsilon(1e-10));
    }
    CHECK_THROWS_AS(linear_comparative_solve(1.0, zero, Interval(-1.0, 1.0), 5.0, 1.0, tol),
                    std::invalid_argument);
}

TEST_CASE("symmetric_convexity_check") {
    Tolerance tol;
    {
        GridOptions opt;
        opt.window_lo = 0.01;
        opt.window_hi = 5.0;
        Grid g = make_grid(Interval(0.0, kInf), opt);
        auto v = symmetric_convexity_check(
            RealFunction::parse_on("2*exp(x) + exp(-x)", kLine),
            RealFunction::parse_on("2*exp(x) - exp(-x)", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("lambda1") == doctest::Approx(2.0).epsilon(1e-6));
        CHECK(v.fitted_params.at("lambda2") == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(v.fitted_params.at("theta_I") == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(v.fitted_params.at("lambda_constraint_ok") == 1.0);
        CHECK(v.fitted_params.at("mu_constraint_ok") == 1.0);
    }
    {
        Grid g = make_grid(kLine);
        auto v = symmetric_convexity_check(RealFunction::parse_on("exp(x)", kLine),
                                           RealFunction::parse_on("exp(x)", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("theta_I") == 0.0);
        CHECK(std::abs(v.fitted_params.at("lambda2")) <= 1e-6);
        CHECK(v.fitted_params.at("lambda_constraint_ok") == 1.0);
    }
    {
        Grid g = make_grid(Interval(-1.0, 1.0));
        auto v = symmetric_convexity_check(RealFunction::parse_on("exp(x)", kLine),
                                           RealFunction::parse_on("-exp(x)", kLine), g, tol);
        CHECK(!v.pass);
        CHECK(!v.witnesses.empty());
    }
}

TEST_CASE("convex_concave_check") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    {
        auto v = convex_concave_check(RealFunction::parse_on("3*x + 1", kLine),
                                      RealFunction::parse_on("3", kLine),
                                      RealFunction::parse_on("3", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("a") == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(v.fitted_params.at("b") == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(v.fitted_params.at("g_sup_distance_to_a") <= 1e-5);
        CHECK(v.fitted_params.at("h_sup_distance_to_a") <= 1e-5);
    }
    {
        auto v = convex_concave_check(RealFunction::parse_on("0", kLine),
                                      RealFunction::parse_on("0", kLine),
                                      RealFunction::parse_on("0", kLine), g, tol);
        CHECK(v.pass);
        CHECK(v.fitted_params.at("a") == doctest::Approx(0.0));
        CHECK(v.fitted_params.at("b") == doctest::Approx(0.0));
    }
    {
        auto v = convex_concave_check(RealFunction::parse_on("x^2", kLine),
                                      RealFunction::parse_on("2*x", kLine),
                                      RealFunction::parse_on("2*x", kLine), g, tol);
        CHECK(!v.pass);
        CHECK(!v.witnesses.empty());
    }
}
