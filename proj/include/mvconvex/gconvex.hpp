#pragma once

// g-compared convexity: the defining support-line inequality, its
// equivalent characterizations, the one-sided-derivative bounds
// certificate, construction of g-convex functions by integration of the
// quotient bound, and the blended difference-quotient-bound family.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "expr.hpp"
#include "interval.hpp"
#include "mv.hpp"
#include "report.hpp"

namespace mvconvex {

struct GConvexReport {
    bool verdict = true;
    std::map<std::string, bool> per_condition;
    std::vector<Witness> witnesses;
    std::vector<std::string> notes;
    std::map<std::string, double> metrics;

    void record(const std::string& cond, bool ok) {
        per_condition[cond] = ok;
        verdict = verdict && ok;
    }
    void witness(Witness w) {
        if (witnesses.size() < CheckReport::kWitnessCap) witnesses.push_back(std::move(w));
    }
};

// A difference-quotient-bound description: the convex base function plus a
// finite list of exception points with chosen values d_n in the
// one-sided-derivative bracket.
struct DQBSpec {
    RealFunction base;
    std::vector<std::pair<double, double>> exceptions;  // (c_n, d_n), c_n strictly increasing
};

struct LambdaBlend {
    RealFunction lambda_fn;  // range must lie in [0,1]
};

namespace detail {

struct PairScan {
    double worst = 0.0;  // largest violation rhs - lhs
    double scale = 1.0;
    double wx = 0.0, wy = 0.0, wl = 0.0;
    double wlhs = 0.0, wrhs = 0.0;
    bool have = false;

    void visit(double x, double y, double lam, double lhs, double rhs) {
        scale = std::max({scale, std::abs(lhs), std::abs(rhs)});
        double viol = rhs - lhs;
        if (!have || viol > worst) {
            worst = viol;
            wx = x;
            wy = y;
            wl = lam;
            wlhs = lhs;
            wrhs = rhs;
            have = true;
        }
    }

    bool pass(const Tolerance& tol) const { return worst <= slack(tol, scale); }

    Witness witness(const std::string& note) const {
        return {{{"x", wx}, {"y", wy}, {"lambda", wl}, {"lhs", wlhs}, {"rhs", wrhs},
                 {"margin", -worst}},
                note};
    }
};

}  // namespace detail

// Support-line inequality f(x) >= f(y) + g(y)(x - y) over all ordered grid
// pairs (both orientations).
inline GConvexReport gconvex_check(const RealFunction& f, const RealFunction& g, const Grid& grid,
                                   const Tolerance& tol) {
    GConvexReport rep;
    std::vector<double> fv = eval_grid(f, grid);
    std::vector<double> gv = eval_grid(g, grid);
    detail::PairScan scan;
    auto pairs = detail::select_pairs(grid.size());
    for (auto [i, j] : pairs) {
        for (int swap = 0; swap < 2; ++swap) {
            std::size_t a = swap ? j : i, b = swap ? i : j;
            double lhs = fv[a];
            double rhs = fv[b] + gv[b] * (grid[a] - grid[b]);
            scan.visit(grid[a], grid[b], 1.0, lhs, rhs);
        }
    }
    bool ok = scan.pass(tol);
    rep.record("def31", ok);
    rep.metrics["worst_margin"] = -scan.worst;
    if (!ok) rep.witness(scan.witness("f(x) < f(y) + g(y)(x-y)"));
    return rep;
}

// All equivalent characterizations: the defining inequality, the two-sided
// bound, both blended-point inequalities for each lambda, the quotient
// sandwich, and the chord-slope chain over triples. Per-condition verdicts
// must agree; disagreement raises an internal consistency alarm.
inline GConvexReport equivalence_suite(const RealFunction& f, const RealFunction& g,
                                       const Grid& grid, std::vector<double> lambdas,
                                       const Tolerance& tol) {
    if (lambdas.empty()) lambdas = {0.0, 0.25, 0.5, 0.75, 1.0};
    GConvexReport rep;
    std::vector<double> fv = eval_grid(f, grid);
    std::vector<double> gv = eval_grid(g, grid);
    auto pairs = detail::select_pairs(grid.size());

    {  // def31
        detail::PairScan s;
        for (auto [i, j] : pairs)
            for (int swap = 0; swap < 2; ++swap) {
                std::size_t a = swap ? j : i, b = swap ? i : j;
                s.visit(grid[a], grid[b], 1.0, fv[a], fv[b] + gv[b] * (grid[a] - grid[b]));
            }
        rep.record("def31", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("def31: f(x) < f(y) + g(y)(x-y)"));
    }
    {  // eq32: g(x)(y-x) <= f(y)-f(x) <= g(y)(y-x)
        detail::PairScan s;
        for (auto [i, j] : pairs)
            for (int swap = 0; swap < 2; ++swap) {
                std::size_t a = swap ? j : i, b = swap ? i : j;
                double d = fv[b] - fv[a];
                s.visit(grid[a], grid[b], 0.0, d, gv[a] * (grid[b] - grid[a]));
                s.visit(grid[a], grid[b], 1.0, gv[b] * (grid[b] - grid[a]), d);
            }
        rep.record("eq32", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("eq32: two-sided bound violated"));
    }
    {  // eq33: f(lx + (1-l)y) <= f(y) + l g(x)(x-y)
        detail::PairScan s;
        for (auto [i, j] : pairs)
            for (int swap = 0; swap < 2; ++swap) {
                std::size_t a = swap ? j : i, b = swap ? i : j;
                for (double l : lambdas) {
                    double p = l * grid[a] + (1.0 - l) * grid[b];
                    s.visit(grid[a], grid[b], l, fv[b] + l * gv[a] * (grid[a] - grid[b]), f(p));
                }
            }
        rep.record("eq33", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("eq33: blended-point inequality violated"));
    }
    {  // eq34: g(x) <= DQ(x,y) <= g(y) for x < y
        detail::PairScan s;
        for (auto [i, j] : pairs) {
            double dq = (fv[j] - fv[i]) / (grid[j] - grid[i]);
            s.visit(grid[i], grid[j], 0.0, dq, gv[i]);
            s.visit(grid[i], grid[j], 1.0, gv[j], dq);
        }
        rep.record("eq34", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("eq34: quotient sandwich violated"));
    }
    {  // eq35: f(lx + (1-l)y) <= f(x) + (1-l) g(y)(y-x)
        detail::PairScan s;
        for (auto [i, j] : pairs)
            for (int swap = 0; swap < 2; ++swap) {
                std::size_t a = swap ? j : i, b = swap ? i : j;
                for (double l : lambdas) {
                    double p = l * grid[a] + (1.0 - l) * grid[b];
                    s.visit(grid[a], grid[b], l,
                            fv[a] + (1.0 - l) * gv[b] * (grid[b] - grid[a]), f(p));
                }
            }
        rep.record("eq35", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("eq35: blended-point inequality violated"));
    }
    {  // chain36 over consecutive and strided triples
        detail::PairScan s;
        const std::size_t n = grid.size();
        auto visit_triple = [&](std::size_t i, std::size_t j, std::size_t k) {
            double dql = (fv[j] - fv[i]) / (grid[j] - grid[i]);
            double dqr = (fv[k] - fv[j]) / (grid[k] - grid[j]);
            s.visit(grid[i], grid[j], 0.0, dql, gv[i]);
            s.visit(grid[i], grid[j], 0.0, gv[j], dql);
            s.visit(grid[j], grid[k], 0.0, dqr, gv[j]);
            s.visit(grid[j], grid[k], 0.0, gv[k], dqr);
            s.visit(grid[i], grid[k], 0.0, dqr, dql);
        };
        for (std::size_t i = 0; i + 2 < n; ++i) visit_triple(i, i + 1, i + 2);
        std::size_t step = std::max<std::size_t>(1, n / 24);
        for (std::size_t i = 0; i + 2 < n; i += step)
            for (std::size_t k = i + 2; k < n; k += step) visit_triple(i, (i + k) / 2, k);
        rep.record("chain36", s.pass(tol));
        if (!s.pass(tol)) rep.witness(s.witness("chain36: chord-slope chain violated"));
    }

    bool first = rep.per_condition.begin()->second;
    for (const auto& [k, v] : rep.per_condition)
        if (v != first) {
            rep.notes.push_back("internal consistency alarm: condition verdicts disagree");
            break;
        }
    return rep;
}

// Derivative-bracket certificate: f convex on the grid, f'-(x) <= g(x) <= f'+(x) at
// every grid point, and the one-sided limits of g match the one-sided
// derivatives of f within combined estimated error.
inline CheckReport bounds_certificate(const RealFunction& f, const RealFunction& g,
                                      const Grid& grid, const Tolerance& tol) {
    CheckReport rep;
    rep.name = "bounds_certificate";
    CheckReport conv = check_convex(f, grid, tol);
    if (!conv.pass) {
        rep.pass = false;
        rep.note("f is not convex on the grid");
        for (auto& w : conv.witnesses) rep.fail(std::move(w));
        return rep;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid[i];
        SidedValue dl = one_sided_derivative_auto(f, x, Side::left);
        SidedValue dr = one_sided_derivative_auto(f, x, Side::right);
        double gx = g(x);
        double s = slack(tol, std::max(std::abs(dl.value), std::abs(dr.value)));
        double lo_margin = gx - (dl.value - s - dl.est_error);
        double hi_margin = (dr.value + s + dr.est_error) - gx;
        rep.observe(std::min(lo_margin, hi_margin));
        if (lo_margin < 0.0 || hi_margin < 0.0) {
            rep.fail({{{"x", x}, {"g_x", gx}, {"f_left", dl.value}, {"f_right", dr.value}},
                      "g(x) outside [f'-(x), f'+(x)]"});
            continue;
        }
        SidedValue gl = one_sided_limit(g, x, Side::left);
        SidedValue gr = one_sided_limit(g, x, Side::right);
        double el = std::abs(gl.value - dl.value);
        double er = std::abs(gr.value - dr.value);
        double allow_l = s + dl.est_error + gl.est_error;
        double allow_r = s + dr.est_error + gr.est_error;
        if (el > allow_l || er > allow_r) {
            rep.fail({{{"x", x}, {"g_left_limit", gl.value}, {"f_left", dl.value},
                       {"g_right_limit", gr.value}, {"f_right", dr.value}},
                      "one-sided limit of g does not match one-sided derivative of f"});
        }
    }
    return rep;
}

namespace detail {

struct MeshFunction {
    std::vector<double> x;   // strictly increasing nodes
    std::vector<double> v;   // values at nodes
    // Optional per-cell endpoint slopes (sampled just inside each cell so a
    // jump of the integrand at a node does not bleed across it). When
    // present, evaluation uses cubic Hermite instead of linear interpolation.
    std::vector<double> dl;  // slope at the left end of cell k
    std::vector<double> dr;  // slope at the right end of cell k
    double interp_bound = 0.0;

    double operator()(double t) const {
        auto it = std::upper_bound(x.begin(), x.end(), t);
        if (it == x.begin() || (it == x.end() && t > x.back()))
            throw EvalError("point outside constructed mesh");
        if (it == x.end()) return v.back();
        std::size_t k = static_cast<std::size_t>(it - x.begin()) - 1;
        double h = x[k + 1] - x[k];
        double s = (t - x[k]) / h;
        if (dl.size() + 1 == x.size()) {
            double s2 = s * s, s3 = s2 * s;
            return v[k] * (2.0 * s3 - 3.0 * s2 + 1.0) + h * dl[k] * (s3 - 2.0 * s2 + s) +
                   v[k + 1] * (-2.0 * s3 + 3.0 * s2) + h * dr[k] * (s3 - s2);
        }
        return v[k] + s * (v[k + 1] - v[k]);
    }
};

}  // namespace detail

struct ConstructResult {
    RealFunction f;
    double reported_error = 0.0;  // integration total + interpolation modulus bound
};

// Antiderivative construction: f(x) = f_c + integral_c^x g, memoized on a
// 4097-node mesh (with c inserted as a node) and linearly interpolated
// between nodes. Requires g monotone on the domain.
inline ConstructResult construct_from_quotient_bound(const RealFunction& g, double c, double f_c,
                                                     const Interval& domain,
                                                     const Tolerance& tol = {}) {
    GridOptions gopt;
    gopt.uniform_points = 65;
    gopt.lowdisc_points = 16;
    gopt.tol = tol;
    Grid probe = make_grid(domain, gopt);
    CheckReport mono = check_monotone(g, probe, tol);
    bool increasing = mono.pass;
    if (!increasing) {
        // accept decreasing g too for plain antiderivative use; reject only
        // genuinely non-monotone integrands
        RealFunction neg = RealFunction::from_callable(
            "-(" + g.label() + ")", g.domain(), [g](double t) { return -g(t); });
        if (!check_monotone(neg, probe, tol).pass)
            throw std::invalid_argument(
                "construct_from_quotient_bound: g is not monotone on the domain");
    }
    if (!domain.interior_contains(c))
        throw std::invalid_argument("construct_from_quotient_bound: c must be interior");

    GridOptions wopt;
    wopt.tol = tol;
    auto [a, b] = sampling_window(domain, wopt);
    constexpr std::size_t kNodes = 4097;
    auto mesh = std::make_shared<detail::MeshFunction>();
    mesh->x.resize(kNodes);
    for (std::size_t i = 0; i < kNodes; ++i)
        mesh->x[i] = a + (b - a) * static_cast<double>(i) / (kNodes - 1);
    // insert c as a node (replace the nearest interior node)
    {
        auto it = std::lower_bound(mesh->x.begin(), mesh->x.end(), c);
        std::size_t k = std::min<std::size_t>(
            std::max<std::size_t>(1, static_cast<std::size_t>(it - mesh->x.begin())), kNodes - 2);
        if (std::abs(mesh->x[k - 1] - c) < std::abs(mesh->x[k] - c) && k > 1) --k;
        mesh->x[k] = c;
    }
    std::size_t ci = static_cast<std::size_t>(
        std::lower_bound(mesh->x.begin(), mesh->x.end(), c) - mesh->x.begin());

    Tolerance cell_tol;
    cell_tol.abs_tol = std::max(1e-13, tol.abs_tol / static_cast<double>(kNodes));
    cell_tol.rel_tol = 0.0;
    mesh->v.assign(kNodes, 0.0);
    mesh->v[ci] = f_c;
    double total_err = 0.0;
    IntegrateStats st;
    for (std::size_t k = ci; k + 1 < kNodes; ++k) {
        mesh->v[k + 1] = mesh->v[k] + integrate_monotone(g, mesh->x[k], mesh->x[k + 1], cell_tol, &st);
        total_err += st.error_bound;
    }
    for (std::size_t k = ci; k > 0; --k) {
        mesh->v[k - 1] = mesh->v[k] + integrate_monotone(g, mesh->x[k], mesh->x[k - 1], cell_tol, &st);
        total_err += st.error_bound;
    }
    // per-cell endpoint slopes, sampled just inside the cell; the bound
    // |g(right) - g(left)| * m / 2 covers the within-cell modulus
    double interp = 0.0;
    mesh->dl.resize(kNodes - 1);
    mesh->dr.resize(kNodes - 1);
    for (std::size_t k = 0; k + 1 < kNodes; ++k) {
        double m = mesh->x[k + 1] - mesh->x[k];
        double delta = m * 1e-6;
        mesh->dl[k] = g(mesh->x[k] + delta);
        mesh->dr[k] = g(mesh->x[k + 1] - delta);
        interp = std::max(interp, std::abs(mesh->dr[k] - mesh->dl[k]) * m * 0.5);
    }
    mesh->interp_bound = interp;

    Interval fdom(mesh->x.front(), mesh->x.back(), true, true);
    RealFunction gcopy = g;
    ConstructResult res;
    res.reported_error = total_err + interp;
    res.f = RealFunction::from_callable(
        "antiderivative(" + g.label() + ")", fdom,
        [mesh](double t) { return (*mesh)(t); },
        [gcopy](double t) { return gcopy(t); });
    return res;
}

// Blended quotient-bound family: g(x) = lambda(x) f'-(x) + (1-lambda(x)) f'+(x).
inline RealFunction dqb_family(const RealFunction& f, const LambdaBlend& blend,
                               const Tolerance& tol = {}) {
    RealFunction lam = blend.lambda_fn;
    RealFunction base = f;
    Interval dom(f.domain().lo, f.domain().hi, false, false);  // interior only
    Tolerance tcopy = tol;
    auto fn = [base, lam, tcopy](double x) -> double {
        double l = lam(x);
        if (l < -tcopy.abs_tol || l > 1.0 + tcopy.abs_tol)
            throw EvalError("lambda value outside [0,1] at " + std::to_string(x));
        l = std::clamp(l, 0.0, 1.0);
        SidedValue dl = one_sided_derivative_auto(base, x, Side::left);
        SidedValue dr = one_sided_derivative_auto(base, x, Side::right);
        return l * dl.value + (1.0 - l) * dr.value;
    };
    return RealFunction::from_callable("dqb_family(" + f.label() + ")", dom, fn);
}

// Origin sandwich: with a = f(0), b = g(0), certify
// a + b x <= f(x) <= a + x g(x) at every grid point.
inline CheckReport sandwich_check(const RealFunction& f, const RealFunction& g, const Grid& grid,
                                  const Tolerance& tol) {
    CheckReport rep;
    rep.name = "sandwich_check";
    if (!f.domain().contains(0.0) || !g.domain().contains(0.0))
        throw std::invalid_argument("sandwich_check: 0 must be in both domains");
    const double a = f(0.0);
    const double b = g(0.0);
    rep.metrics["a"] = a;
    rep.metrics["b"] = b;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid[i];
        double fx = f(x);
        double lo = a + b * x;
        double hi = a + x * g(x);
        double s = slack(tol, std::max({std::abs(fx), std::abs(lo), std::abs(hi)}));
        double m = std::min(fx - lo + s, hi - fx + s);
        rep.observe(m);
        if (m < 0.0) {
            rep.fail({{{"x", x}, {"f_x", fx}, {"lower", lo}, {"upper", hi}},
                      "sandwich bound violated"});
        }
    }
    return rep;
}

}  // namespace mvconvex
