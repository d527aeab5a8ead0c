#pragma once

// MV-functional equation and inequality: grid checks, the general solvers
// by integration of g or h^{-1}, the uniqueness probe, and the worked
// comparative-convexity systems (self-convexity, linear comparative,
// symmetric convexity, convex-concavity).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "calculus.hpp"
#include "expr.hpp"
#include "gconvex.hpp"
#include "interval.hpp"
#include "mv.hpp"
#include "report.hpp"

namespace mvconvex {

// Integration / inversion budget exhaustion (maps to CLI exit code 3).
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct FeqSolution {
    RealFunction f;
    std::function<double(double, double)> eta_sampler;  // (x,y) -> eta, when available
    std::map<std::string, double> params;
    double reported_error = 0.0;
};

struct SystemVerdict {
    std::string system;  // self_convex_46 | linear_47 | symmetric_48 | convex_concave_49
    bool pass = true;
    std::vector<Witness> witnesses;
    std::map<std::string, double> fitted_params;
    std::vector<std::string> notes;
    RealFunction constructed;

    void fail(Witness w) {
        pass = false;
        if (witnesses.size() < CheckReport::kWitnessCap) witnesses.push_back(std::move(w));
    }
};

// ---------------------------------------------------------------------------
// Monotone inversion by bisection: find u in the domain of h with h(u) = s.

inline double invert_monotone(const RealFunction& h, double target, const Tolerance& tol = {}) {
    GridOptions opt;
    opt.tol = tol;
    auto [a, b] = sampling_window(h.domain(), opt);
    double ha = h(a), hb = h(b);
    bool increasing = hb >= ha;
    auto below = [&](double v) { return increasing ? v < target : v > target; };
    // expand toward unbounded sides when the target is not yet bracketed
    for (int k = 0; k < 60 && below(ha) == below(hb); ++k) {
        bool want_left = increasing ? !below(ha) : !below(hb);
        bool grew = false;
        if (want_left || below(hb) == below(ha)) {
            if (h.domain().lo == -kInf && a > -1e8) {
                a = a > 0 ? a / 2 - 1 : a * 2 - 1;
                ha = h(a);
                grew = true;
            }
            if (below(ha) == below(hb) && h.domain().hi == kInf && b < 1e8) {
                b = b > 0 ? b * 2 + 1 : b / 2 + 1;
                hb = h(b);
                grew = true;
            }
        }
        if (!grew) break;
    }
    if (below(ha) == below(hb))
        throw NumericError("invert_monotone: target " + std::to_string(target) +
                           " not bracketed on the domain of " + h.label());
    double lo = a, hi = b;
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo) + std::abs(hi));
         ++it) {
        double mid = 0.5 * (lo + hi);
        // below(h(mid)) means mid is left of the root for either orientation
        if (below(h(mid)))
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// MV-functional inequality (grid check): min{x,y} < h(DQ(x,y)) < max{x,y}
// with relative strict margin; equivalently 0 < (h(DQ)-x)/(y-x) < 1.

inline CheckReport mv_inequality_check(const RealFunction& f, const RealFunction& h,
                                       const Grid& grid, const Tolerance& tol) {
    CheckReport rep;
    rep.name = "mv_inequality_check";
    auto pairs = detail::select_pairs(grid.size());
    rep.metrics["pairs_checked"] = static_cast<double>(pairs.size());
    for (auto [i, j] : pairs) {
        double x = grid[i], y = grid[j];
        double dq = difference_quotient(f, x, y);
        double hv;
        try {
            hv = h(dq);
        } catch (const EvalError& e) {
            rep.fail({{{"x", x}, {"y", y}, {"dq", dq}},
                      std::string("h undefined at DQ: ") + e.what()});
            continue;
        }
        double r = (hv - x) / (y - x);
        double margin = std::min(r, 1.0 - r) - tol.strict_margin;
        rep.observe(margin);
        if (margin < 0.0) {
            rep.fail({{{"x", x}, {"y", y}, {"dq", dq}, {"h_dq", hv}, {"rel_pos", r}},
                      "h(DQ) not strictly between x and y"});
        }
    }
    return rep;
}

// ---------------------------------------------------------------------------
// General solvers: f(t) = f_c + integral_c^t h^{-1}(s) ds (inequality) or
// integral of g (equation), via the monotone antiderivative construction.

inline FeqSolution solve_mv_inequality(const RealFunction& h, const Interval& domain, double c,
                                       double f_c, const Tolerance& tol = {}) {
    // monotonicity + injectivity probe of h
    GridOptions popt;
    popt.uniform_points = 65;
    popt.lowdisc_points = 16;
    popt.tol = tol;
    Grid probe = make_grid(h.domain(), popt);
    CheckReport inc = check_monotone(h, probe, tol);
    bool increasing = inc.pass;
    if (!increasing) {
        RealFunction neg = RealFunction::from_callable("-(" + h.label() + ")", h.domain(),
                                                       [h](double t) { return -h(t); });
        if (!check_monotone(neg, probe, tol).pass)
            throw std::invalid_argument("solve_mv_inequality: h is not monotone");
    }
    {
        std::vector<double> v = eval_grid(h, probe);
        for (std::size_t i = 0; i + 1 < v.size(); ++i)
            if (v[i] == v[i + 1])
                throw std::invalid_argument("solve_mv_inequality: h is not injective on probe");
    }
    RealFunction hcopy = h;
    Tolerance tcopy = tol;
    RealFunction hinv = RealFunction::from_callable(
        "inverse(" + h.label() + ")", Interval::whole_line(),
        [hcopy, tcopy](double s) { return invert_monotone(hcopy, s, tcopy); });
    Tolerance itol = tol;
    itol.abs_tol = std::max(itol.abs_tol, 1e-8);  // construction budget
    ConstructResult cr = construct_from_quotient_bound(hinv, c, f_c, domain, itol);
    FeqSolution sol;
    sol.f = cr.f;
    sol.reported_error = cr.reported_error;
    sol.params["c"] = c;
    sol.params["f_c"] = f_c;
    return sol;
}

inline FeqSolution solve_mv_equation(const RealFunction& g, const Interval& domain, double c,
                                     double f_c, const Tolerance& tol = {}) {
    Tolerance itol = tol;
    itol.abs_tol = std::max(itol.abs_tol, 1e-8);
    ConstructResult cr = construct_from_quotient_bound(g, c, f_c, domain, itol);
    FeqSolution sol;
    sol.f = cr.f;
    sol.reported_error = cr.reported_error;
    sol.params["c"] = c;
    sol.params["f_c"] = f_c;
    RealFunction fcopy = cr.f;
    RealFunction gcopy = g;
    Tolerance tcopy = tol;
    sol.eta_sampler = [fcopy, gcopy, tcopy](double x, double y) {
        return invert_monotone(gcopy, difference_quotient(fcopy, x, y), tcopy);
    };
    return sol;
}

// Inverse-identity probe: h(f'+(x)) = x at every grid point certifies
// h = (f')^{-1} on the probed range.
inline CheckReport uniqueness_probe(const RealFunction& f, const RealFunction& h, const Grid& grid,
                                    const Tolerance& tol) {
    CheckReport rep;
    rep.name = "uniqueness_probe";
    double max_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double x = grid[i];
        SidedValue dr = one_sided_derivative_auto(f, x, Side::right);
        SidedValue dl = one_sided_derivative_auto(f, x, Side::left);
        double agree = slack(tol, std::max(std::abs(dl.value), std::abs(dr.value))) +
                       10.0 * (dl.est_error + dr.est_error);
        if (std::abs(dl.value - dr.value) > agree) {
            rep.fail({{{"x", x}, {"f_left", dl.value}, {"f_right", dr.value}},
                      "f not differentiable at grid point"});
            continue;
        }
        double v;
        try {
            v = h(dr.value);
        } catch (const EvalError& e) {
            rep.fail({{{"x", x}, {"f_prime", dr.value}}, std::string("h undefined: ") + e.what()});
            continue;
        }
        double err = std::abs(v - x);
        max_err = std::max(max_err, err);
        double margin = slack(tol, x) - err;
        rep.observe(margin);
        if (margin < 0.0) {
            rep.fail({{{"x", x}, {"f_prime", dr.value}, {"h_fprime", v}},
                      "h(f'(x)) != x"});
        }
    }
    rep.metrics["max_identity_error"] = max_err;
    return rep;
}

// ---------------------------------------------------------------------------
// Least-squares helpers (collocation at grid nodes).

namespace detail {

// Fit v ~ c0*b0 + c1*b1 by 2x2 normal equations; returns {c0, c1, residual_sup}.
inline std::array<double, 3> fit2(const std::vector<double>& b0, const std::vector<double>& b1,
                                  const std::vector<double>& v) {
    double a00 = 0, a01 = 0, a11 = 0, r0 = 0, r1 = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        a00 += b0[i] * b0[i];
        a01 += b0[i] * b1[i];
        a11 += b1[i] * b1[i];
        r0 += b0[i] * v[i];
        r1 += b1[i] * v[i];
    }
    double det = a00 * a11 - a01 * a01;
    if (std::abs(det) < 1e-300) throw NumericError("fit2: singular normal equations");
    double c0 = (a11 * r0 - a01 * r1) / det;
    double c1 = (a00 * r1 - a01 * r0) / det;
    double sup = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        sup = std::max(sup, std::abs(c0 * b0[i] + c1 * b1[i] - v[i]));
    return {c0, c1, sup};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Worked systems.

// Self-convexity f(x) >= f(y)(1 + x - y); solutions are lambda * e^t.
inline SystemVerdict self_convexity_check(const RealFunction& f, const Grid& grid,
                                          const Tolerance& tol) {
    SystemVerdict v;
    v.system = "self_convex_46";
    std::vector<double> fv = eval_grid(f, grid);
    auto pairs = detail::select_pairs(grid.size());
    detail::PairScan scan;
    for (auto [i, j] : pairs)
        for (int swap = 0; swap < 2; ++swap) {
            std::size_t a = swap ? j : i, b = swap ? i : j;
            scan.visit(grid[a], grid[b], 1.0, fv[a],
                       fv[b] * (1.0 + grid[a] - grid[b]));
        }
    if (!scan.pass(tol)) {
        v.fail(scan.witness("self-convexity inequality violated"));
        return v;
    }
    if (f.domain().contains(0.0)) {
        double lambda = f(0.0);
        v.fitted_params["lambda"] = lambda;
        double sup = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
            sup = std::max(sup, std::abs(fv[i] - lambda * std::exp(grid[i])));
        v.fitted_params["sup_distance_to_lambda_exp"] = sup;
    } else {
        v.notes.push_back("0 not in domain; lambda not fitted");
    }
    return v;
}

// Linear comparative inequality f(x) >= f(y) + (k f + phi)(y)(x - y):
// integrate f' = k f + phi from (t0, f0) with a fixed-step classical
// 4th-order scheme, then verify the inequality and increasingness of
// k f + phi on a grid.
inline SystemVerdict linear_comparative_solve(double k, const RealFunction& phi,
                                              const Interval& domain, double t0, double f0,
                                              const Tolerance& tol = {}) {
    SystemVerdict v;
    v.system = "linear_47";
    GridOptions opt;
    opt.tol = tol;
    auto [a, b] = sampling_window(domain, opt);
    if (!(t0 > a && t0 < b))
        throw std::invalid_argument("linear_comparative_solve: t0 must be interior");

    auto rhs = [k, &phi](double t, double y) { return k * y + phi(t); };
    auto rk4_step = [&rhs](double t, double y, double h) {
        double k1 = rhs(t, y);
        double k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1);
        double k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2);
        double k4 = rhs(t + h, y + h * k3);
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };

    std::int64_t n = 4096;
    // local error from one step-doubling probe at t0; refine until <= 1e-10
    for (; n < (1 << 20); n *= 2) {
        double h = (b - a) / static_cast<double>(n);
        double one = rk4_step(t0, f0, h);
        double two = rk4_step(t0 + 0.5 * h, rk4_step(t0, f0, 0.5 * h), 0.5 * h);
        if (std::abs(one - two) / 15.0 <= 1e-10 * std::max(1.0, std::abs(f0))) break;
    }
    const double h = (b - a) / static_cast<double>(n);

    auto mesh = std::make_shared<detail::MeshFunction>();
    mesh->x.resize(static_cast<std::size_t>(n) + 1);
    mesh->v.resize(static_cast<std::size_t>(n) + 1);
    // anchor the mesh so that t0 is a node
    std::int64_t i0 = static_cast<std::int64_t>(std::llround((t0 - a) / h));
    i0 = std::clamp<std::int64_t>(i0, 1, n - 1);
    for (std::int64_t i = 0; i <= n; ++i)
        mesh->x[static_cast<std::size_t>(i)] = a + h * static_cast<double>(i);
    mesh->x[static_cast<std::size_t>(i0)] = t0;
    double y = f0;
    mesh->v[static_cast<std::size_t>(i0)] = y;
    for (std::int64_t i = i0; i < n; ++i) {
        double t = mesh->x[static_cast<std::size_t>(i)];
        double step = mesh->x[static_cast<std::size_t>(i + 1)] - t;
        y = rk4_step(t, y, step);
        if (!std::isfinite(y))
            throw NumericError("linear_comparative_solve: integration overflow");
        mesh->v[static_cast<std::size_t>(i + 1)] = y;
    }
    y = f0;
    for (std::int64_t i = i0; i > 0; --i) {
        double t = mesh->x[static_cast<std::size_t>(i)];
        double step = mesh->x[static_cast<std::size_t>(i - 1)] - t;
        y = rk4_step(t, y, step);
        if (!std::isfinite(y))
            throw NumericError("linear_comparative_solve: integration overflow");
        mesh->v[static_cast<std::size_t>(i - 1)] = y;
    }
    // f' = k f + phi is continuous, so cell endpoint slopes come straight
    // from the node values
    mesh->dl.resize(static_cast<std::size_t>(n));
    mesh->dr.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        mesh->dl[static_cast<std::size_t>(i)] =
            k * mesh->v[static_cast<std::size_t>(i)] + phi(mesh->x[static_cast<std::size_t>(i)]);
        mesh->dr[static_cast<std::size_t>(i)] = k * mesh->v[static_cast<std::size_t>(i + 1)] +
                                                phi(mesh->x[static_cast<std::size_t>(i + 1)]);
    }

    Interval fdom(mesh->x.front(), mesh->x.back(), true, true);
    RealFunction phicopy = phi;
    auto hint = [mesh, k, phicopy](double t) { return k * (*mesh)(t) + phicopy(t); };
    RealFunction f = RealFunction::from_callable(
        "linear_ode_solution", fdom, [mesh](double t) { return (*mesh)(t); }, hint);
    v.constructed = f;
    v.fitted_params["k"] = k;
    v.fitted_params["f_t0"] = f0;

    RealFunction slope = RealFunction::from_callable("k*f + phi", fdom, hint);
    GridOptions gopt;
    gopt.tol = tol;
    Grid grid = make_grid(fdom, gopt);
    Tolerance vtol = tol;
    vtol.abs_tol = std::max(vtol.abs_tol, 1e-7);  // scheme + interpolation budget
    CheckReport mono = check_monotone(slope, grid, vtol);
    GConvexReport gc = gconvex_check(f, slope, grid, vtol);
    if (!mono.pass) {
        v.pass = false;
        v.notes.push_back("k*f + phi is not increasing: inequality infeasible");
        for (auto& w : mono.witnesses) v.fail(std::move(w));
    }
    if (!gc.verdict) {
        v.pass = false;
        v.notes.push_back("constructed f fails the comparative inequality");
        for (auto& w : gc.witnesses) v.fail(std::move(w));
    }
    return v;
}

// Symmetric convexity: f g-convex and g f-convex; solutions are
// lambda1 e^t + lambda2 e^{-t} with lambda1 * theta_I >= |lambda2|.
inline SystemVerdict symmetric_convexity_check(const RealFunction& f, const RealFunction& g,
                                               const Grid& grid, const Tolerance& tol) {
    SystemVerdict v;
    v.system = "symmetric_48";
    GConvexReport fg = gconvex_check(f, g, grid, tol);
    GConvexReport gf = gconvex_check(g, f, grid, tol);
    if (!fg.verdict) {
        v.pass = false;
        v.notes.push_back("f is not g-convex");
        for (auto& w : fg.witnesses) v.fail(std::move(w));
    }
    if (!gf.verdict) {
        v.pass = false;
        v.notes.push_back("g is not f-convex");
        for (auto& w : gf.witnesses) v.fail(std::move(w));
    }
    if (!v.pass) return v;

    std::vector<double> b0(grid.size()), b1(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        b0[i] = std::exp(grid[i]);
        b1[i] = std::exp(-grid[i]);
    }
    auto ffit = detail::fit2(b0, b1, eval_grid(f, grid));
    auto gfit = detail::fit2(b0, b1, eval_grid(g, grid));
    v.fitted_params["lambda1"] = ffit[0];
    v.fitted_params["lambda2"] = ffit[1];
    v.fitted_params["mu1"] = gfit[0];
    v.fitted_params["mu2"] = gfit[1];
    v.fitted_params["f_fit_residual"] = ffit[2];
    v.fitted_params["g_fit_residual"] = gfit[2];
    double lo = grid.source_interval.lo;
    double theta = std::isfinite(lo) ? std::exp(2.0 * lo) : 0.0;
    v.fitted_params["theta_I"] = theta;
    bool c1 = ffit[0] * theta >= std::abs(ffit[1]) - slack(tol);
    bool c2 = gfit[0] * theta >= std::abs(gfit[1]) - slack(tol);
    v.fitted_params["lambda_constraint_ok"] = c1 ? 1.0 : 0.0;
    v.fitted_params["mu_constraint_ok"] = c2 ? 1.0 : 0.0;
    if (!c1 || !c2)
        v.notes.push_back("coefficient constraint lambda1*theta_I >= |lambda2| violated "
                          "(informative: fit outside the solution family)");
    return v;
}

// Convex-concavity: f g-convex and h-concave; solutions are affine with
// g = h = slope.
inline SystemVerdict convex_concave_check(const RealFunction& f, const RealFunction& g,
                                          const RealFunction& h, const Grid& grid,
                                          const Tolerance& tol) {
    SystemVerdict v;
    v.system = "convex_concave_49";
    GConvexReport fg = gconvex_check(f, g, grid, tol);
    if (!fg.verdict) {
        v.pass = false;
        v.notes.push_back("f is not g-convex");
        for (auto& w : fg.witnesses) v.fail(std::move(w));
    }
    // h-concavity: f(x) <= f(y) + h(y)(x-y)
    std::vector<double> fv = eval_grid(f, grid);
    std::vector<double> hv = eval_grid(h, grid);
    detail::PairScan scan;
    auto pairs = detail::select_pairs(grid.size());
    for (auto [i, j] : pairs)
        for (int swap = 0; swap < 2; ++swap) {
            std::size_t a2 = swap ? j : i, b2 = swap ? i : j;
            double lhs = fv[b2] + hv[b2] * (grid[a2] - grid[b2]);
            scan.visit(grid[a2], grid[b2], 1.0, lhs, fv[a2]);
        }
    if (!scan.pass(tol)) {
        v.pass = false;
        v.notes.push_back("f is not h-concave");
        v.fail(scan.witness("f(x) > f(y) + h(y)(x-y)"));
    }
    if (!v.pass) return v;

    std::vector<double> b0(grid.size(), 1.0), b1(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) b1[i] = grid[i];
    auto fit = detail::fit2(b1, b0, fv);  // f ~ a*t + b
    double a = fit[0], b = fit[1];
    v.fitted_params["a"] = a;
    v.fitted_params["b"] = b;
    v.fitted_params["f_fit_residual"] = fit[2];
    double supg = 0.0, suph = 0.0;
    std::vector<double> gv = eval_grid(g, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        supg = std::max(supg, std::abs(gv[i] - a));
        suph = std::max(suph, std::abs(hv[i] - a));
    }
    v.fitted_params["g_sup_distance_to_a"] = supg;
    v.fitted_params["h_sup_distance_to_a"] = suph;
    return v;
}

}  // namespace mvconvex
