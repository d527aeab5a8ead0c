#include <doctest.h>

#include <cmath>

#include "mvconvex/gconvex.hpp"

using namespace mvconvex;

namespace {
const Interval kLine = Interval::whole_line();

RealFunction sgn_alpha(double alpha) {
    return RealFunction::from_callable("sgn_alpha", kLine, [alpha](double x) {
        return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : alpha);
    });
}
}  // namespace

TEST_CASE("gconvex_check pass and fail cases") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    CHECK(gconvex_check(RealFunction::parse_on("abs(x)", kLine),
                        RealFunction::parse_on("sgn(x)", kLine), g, tol)
              .verdict);
    CHECK(gconvex_check(RealFunction::parse_on("x^2", kLine),
                        RealFunction::parse_on("2*x", kLine), g, tol)
              .verdict);
    auto rep = gconvex_check(RealFunction::parse_on("x^2", kLine),
                             RealFunction::parse_on("3*x", kLine), g, tol);
    CHECK(!rep.verdict);
    REQUIRE(!rep.witnesses.empty());
    // the known counterexample shape: support line with slope 3 overshoots
    CHECK(rep.witnesses[0].values.at("margin") < 0.0);
}

TEST_CASE("equivalence_suite: all conditions agree") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    {
        auto rep = equivalence_suite(RealFunction::parse_on("x^2", kLine),
                                     RealFunction::parse_on("2*x", kLine), g, {}, tol);
        CHECK(rep.verdict);
        for (const auto& [k, v] : rep.per_condition) CHECK_MESSAGE(v, "condition ", k);
        CHECK(rep.notes.empty());
    }
    {
        Grid gz = grid_with_points(g, {0.0});
        auto rep = equivalence_suite(RealFunction::parse_on("abs(x)", kLine), sgn_alpha(0.0), gz,
                                     {}, tol);
        CHECK(rep.verdict);
    }
    {
        // g > f' everywhere: the defining inequality and the sandwich both break
        auto rep = equivalence_suite(RealFunction::parse_on("exp(x)", kLine),
                                     RealFunction::parse_on("exp(x) + 0.5", kLine), g, {}, tol);
        CHECK(!rep.verdict);
        CHECK(!rep.per_condition.at("def31"));
        CHECK(!rep.per_condition.at("eq34"));
    }
}

TEST_CASE("bounds_certificate") {
    Tolerance tol;
    Grid g = grid_with_points(make_grid(Interval(-2.0, 2.0)), {0.0});
    CHECK(bounds_certificate(RealFunction::parse_on("abs(x)", kLine), sgn_alpha(1.0), g, tol).pass);
    {
        auto rep = bounds_certificate(RealFunction::parse_on("abs(x)", kLine), sgn_alpha(2.0), g,
                                      tol);
        CHECK(!rep.pass);
        REQUIRE(!rep.witnesses.empty());
        CHECK(rep.witnesses[0].values.at("x") == 0.0);
    }
    CHECK(bounds_certificate(RealFunction::parse_on("x^2", kLine),
                             RealFunction::parse_on("2*x", kLine), g, tol)
              .pass);
    // non-convex f fails immediately
    CHECK(!bounds_certificate(RealFunction::parse_on("-(x^2)", kLine),
                              RealFunction::parse_on("-2*x", kLine), g, tol)
               .pass);
}

TEST_CASE("cross-characterization: gconvex_check agrees with bounds_certificate") {
    Tolerance tol;
    Grid g = grid_with_points(make_grid(Interval(-2.0, 2.0)), {0.0});
    struct Case {
        RealFunction f, gfn;
    };
    std::vector<Case> cases;
    cases.push_back({RealFunction::parse_on("x^2", kLine), RealFunction::parse_on("2*x", kLine)});
    cases.push_back({RealFunction::parse_on("abs(x)", kLine), sgn_alpha(0.5)});
    cases.push_back({RealFunction::parse_on("x^2", kLine), RealFunction::parse_on("3*x", kLine)});
    for (auto& c : cases) {
        bool a = gconvex_check(c.f, c.gfn, g, tol).verdict;
        bool b = bounds_certificate(c.f, c.gfn, g, tol).pass;
        CHECK(a == b);
    }
}

TEST_CASE("construct_from_quotient_bound closed forms") {
    Tolerance tol;
    {
        ConstructResult cr =
            construct_from_quotient_bound(RealFunction::parse_on("sgn(x)", kLine), 0.0, 0.0,
                                          Interval(-2.0, 2.0), tol);
        double sup = 0.0;
        for (double x = -1.999; x <= 1.999; x += 0.037)
            sup = std::max(sup, std::abs(cr.f(x) - std::abs(x)));
        CHECK(sup <= 1e-6);
        CHECK(cr.f(0.0) == 0.0);  // anchor is a mesh node
    }
    {
        ConstructResult cr =
            construct_from_quotient_bound(RealFunction::parse_on("2*x", kLine), 0.0, 0.0,
                                          Interval(-2.0, 2.0), tol);
        double sup = 0.0;
        for (double x = -1.999; x <= 1.999; x += 0.037)
            sup = std::max(sup, std::abs(cr.f(x) - x * x));
        CHECK(sup <= 1e-6);
    }
    {
        ConstructResult cr =
            construct_from_quotient_bound(RealFunction::parse_on("exp(x)", kLine), 0.0, 1.0,
                                          Interval(-1.0, 1.0), tol);
        double sup = 0.0;
        for (double x = -0.999; x <= 0.999; x += 0.021)
            sup = std::max(sup, std::abs(cr.f(x) - std::exp(x)));
        CHECK(sup <= 1e-6);
    }
    CHECK_THROWS_AS(construct_from_quotient_bound(RealFunction::parse_on("-(x^2)", kLine), 0.0,
                                                  0.0, Interval(-2.0, 2.0), tol),
                    std::invalid_argument);
}

TEST_CASE("construction round-trip: result is g-convex with anchor value exact") {
    Tolerance tol;
    RealFunction g = RealFunction::parse_on("exp(x)", kLine);
    ConstructResult cr = construct_from_quotient_bound(g, 0.25, 3.0, Interval(-1.0, 1.0), tol);
    CHECK(cr.f(0.25) == 3.0);
    Tolerance vtol = tol;
    vtol.abs_tol = std::max(vtol.abs_tol, 10.0 * cr.reported_error);
    Grid grid = make_grid(cr.f.domain());
    CHECK(gconvex_check(cr.f, g, grid, vtol).verdict);
}

TEST_CASE("dqb_family blends the one-sided derivatives") {
    Tolerance tol;
    RealFunction ab = RealFunction::parse_on("abs(x)", kLine);
    {
        RealFunction g = dqb_family(ab, {RealFunction::parse_on("0.5", kLine)}, tol);
        CHECK(g(0.0) == doctest::Approx(0.0).epsilon(1e-7));
        CHECK(g(1.0) == doctest::Approx(1.0).epsilon(1e-7));
        CHECK(g(-1.0) == doctest::Approx(-1.0).epsilon(1e-7));
    }
    {
        RealFunction g = dqb_family(ab, {RealFunction::parse_on("0", kLine)}, tol);
        CHECK(g(0.0) == doctest::Approx(1.0).epsilon(1e-7));  // f'+(0)
    }
    {
        RealFunction sq = RealFunction::parse_on("x^2", kLine);
        RealFunction g = dqb_family(sq, {RealFunction::parse_on("0.3", kLine)}, tol);
        CHECK(g(1.2) == doctest::Approx(2.4).epsilon(1e-6));
    }
    {
        RealFunction g = dqb_family(ab, {RealFunction::parse_on("2", kLine)}, tol);
        CHECK_THROWS_AS(g(0.5), EvalError);  // lambda outside [0,1]
    }
}

TEST_CASE("blend soundness: dqb_family output passes bounds_certificate") {
    Tolerance tol;
    RealFunction sq = RealFunction::parse_on("x^2", kLine);
    RealFunction g = dqb_family(sq, {RealFunction::parse_on("0.25", kLine)}, tol);
    GridOptions opt;
    opt.uniform_points = 41;
    opt.lowdisc_points = 8;
    Grid grid = make_grid(Interval(-2.0, 2.0), opt);
    Tolerance vtol = tol;
    vtol.abs_tol = 1e-6;  // blended g carries finite-difference noise
    CHECK(bounds_certificate(sq, g, grid, vtol).pass);
}

TEST_CASE("sandwich_check") {
    Tolerance tol;
    Grid g = grid_with_points(make_grid(Interval(-2.0, 2.0)), {0.0});
    CHECK(sandwich_check(RealFunction::parse_on("x^2", kLine),
                         RealFunction::parse_on("2*x", kLine), g, tol)
              .pass);
    CHECK(sandwich_check(RealFunction::parse_on("exp(x)", kLine),
                         RealFunction::parse_on("exp(x)", kLine), g, tol)
              .pass);
    CHECK(sandwich_check(RealFunction::parse_on("abs(x)", kLine), sgn_alpha(0.0), g, tol).pass);
    CHECK_THROWS_AS(sandwich_check(RealFunction::parse_on("x", Interval(1.0, 2.0)),
                                   RealFunction::parse_on("1", kLine), g, tol),
                    std::invalid_argument);
}

TEST_CASE("increasing MV-function implies g-convexity") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    struct Case {
        RealFunction f, gfn;
    };
    std::vector<Case> cases;
    cases.push_back({RealFunction::parse_on("x^2", kLine), RealFunction::parse_on("2*x", kLine)});
    cases.push_back(
        {RealFunction::parse_on("exp(x)", kLine), RealFunction::parse_on("exp(x)", kLine)});
    for (auto& c : cases) {
        REQUIRE(mv_check(c.f, c.gfn, g, tol).report.pass);
        REQUIRE(check_monotone(c.gfn, g, tol).pass);
        CHECK(gconvex_check(c.f, c.gfn, g, tol).verdict);
    }
}

TEST_CASE("converse failure: |x| with sgn is g-convex but has no MV witnesses across 0") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    RealFunction ab = RealFunction::parse_on("abs(x)", kLine);
    RealFunction sg = RealFunction::parse_on("sgn(x)", kLine);
    CHECK(gconvex_check(ab, sg, g, tol).verdict);
    CHECK(!mv_check(ab, sg, g, tol).report.pass);
}

TEST_CASE("0-convexity holds exactly for constants") {
    Tolerance tol;
    Grid g = make_grid(Interval(-2.0, 2.0));
    RealFunction zero = RealFunction::parse_on("0", kLine);
    CHECK(gconvex_check(RealFunction::parse_on("7", kLine), zero, g, tol).verdict);
    CHECK(!gconvex_check(RealFunction::parse_on("x", kLine), zero, g, tol).verdict);
    CHECK(!gconvex_check(RealFunction::parse_on("x^2", kLine), zero, g, tol).verdict);
}
