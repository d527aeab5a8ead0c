#pragma once

// Numerical primitives shared by every checker: difference quotients,
// one-sided derivatives and limits (Richardson / Aitken accelerated),
// integration of monotone integrands with a hard error bound, and
// grid-based monotonicity / convexity tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "expr.hpp"
#include "interval.hpp"
#include "report.hpp"

namespace mvconvex {

enum class Side { left, right };

inline const char* side_name(Side s) { return s == Side::left ? "left" : "right"; }

struct SidedValue {
    double point = 0.0;
    Side side = Side::right;
    double value = 0.0;
    double est_error = 0.0;
};

inline double difference_quotient(const RealFunction& f, double x, double y) {
    if (x == y) throw std::invalid_argument("difference_quotient: degenerate pair x = y");
    // evaluate in a fixed order so DQ(x,y) == DQ(y,x) bit-exactly
    double lo = std::min(x, y), hi = std::max(x, y);
    return (f(hi) - f(lo)) / (hi - lo);
}

namespace detail {

// Largest step usable at x toward the given side without leaving the domain.
inline double side_room(const Interval& dom, double x, Side s) {
    double room = (s == Side::right) ? dom.hi - x : x - dom.lo;
    bool closed = (s == Side::right) ? dom.hi_closed : dom.lo_closed;
    if (!std::isfinite(room)) return kInf;
    if (!closed) room *= (1.0 - 1e-12);
    return room;
}

}  // namespace detail

// Second-order one-sided finite difference with a Richardson table over 6
// step halvings. est_error is the last-column difference of the table.
inline SidedValue one_sided_derivative(const RealFunction& f, double x, Side side) {
    const Interval& dom = f.domain();
    if (!dom.contains(x))
        throw EvalError("one_sided_derivative: point outside domain of " + f.label());
    // Exact derivative known by construction: take the one-sided limit of it.
    // (declared below, defined after one_sided_limit)
    double room = detail::side_room(dom, x, side);
    if (!(room > 0.0))
        throw EvalError("one_sided_derivative: no room on " + std::string(side_name(side)) +
                        " side at " + std::to_string(x));
    // base step large enough that double rounding stays below 1e-10 even for
    // function values around 1e2; Richardson removes the truncation error
    double h0 = std::max(1e-3, 1e-3 * std::abs(x));
    if (std::isfinite(room)) h0 = std::min(h0, room * 0.4);
    const double dir = (side == Side::right) ? 1.0 : -1.0;
    const double fx = f(x);
    constexpr int kLevels = 7;  // h0 halved 6 times
    double tab[kLevels][kLevels];
    double h = h0;
    for (int i = 0; i < kLevels; ++i) {
        // (-3 f(x) + 4 f(x+dh) - f(x+2dh)) / (2dh), O(h^2)
        tab[i][0] = (-3.0 * fx + 4.0 * f(x + dir * h) - f(x + dir * 2.0 * h)) / (2.0 * dir * h);
        for (int j = 1; j <= i; ++j) {
            double p = std::pow(2.0, j + 1);  // eliminates the O(h^{j+1}) term
            tab[i][j] = (p * tab[i][j - 1] - tab[i - 1][j - 1]) / (p - 1.0);
        }
        h *= 0.5;
    }
    // Ridders-style selection: the entry whose disagreement with its
    // neighbors is smallest wins, so rounding noise at tiny h cannot
    // override an already-converged large-h entry.
    double best = tab[1][1];
    double best_err = std::max(std::abs(tab[1][1] - tab[1][0]), std::abs(tab[1][1] - tab[0][0]));
    for (int i = 2; i < kLevels; ++i) {
        double err = std::max(std::abs(tab[i][i] - tab[i][i - 1]),
                              std::abs(tab[i][i] - tab[i - 1][i - 1]));
        if (err < best_err) {
            best_err = err;
            best = tab[i][i];
        }
    }
    SidedValue out;
    out.point = x;
    out.side = side;
    out.value = best;
    out.est_error = best_err + 1e-13 * std::max(1.0, std::abs(out.value));
    return out;
}

// Extrapolated one-sided limit of g at x along the geometric step sequence
// h0 * 4^{-k}, k = 0..8, with Aitken acceleration. Locks on exactly for
// piecewise-constant g; brackets the true limit for monotone g.
inline SidedValue one_sided_limit(const RealFunction& g, double x, Side side) {
    const Interval& dom = g.domain();
    double room = detail::side_room(dom, x, side);
    if (!(room > 0.0))
        throw EvalError("one_sided_limit: no room on " + std::string(side_name(side)) +
                        " side at " + std::to_string(x));
    double h0 = std::max(1e-3, 1e-3 * std::abs(x));
    if (std::isfinite(room)) h0 = std::min(h0, room * 0.5);
    const double dir = (side == Side::right) ? 1.0 : -1.0;
    std::vector<double> s;
    double h = h0;
    for (int k = 0; k <= 8; ++k) {
        s.push_back(g(x + dir * h));
        h *= 0.25;
    }
    // repeated Aitken delta-squared sweeps
    double prev = s.back();
    for (int sweep = 0; sweep < 3 && s.size() >= 3; ++sweep) {
        std::vector<double> t;
        for (std::size_t i = 0; i + 2 < s.size(); ++i) {
            double d1 = s[i + 1] - s[i];
            double d2 = s[i + 2] - 2.0 * s[i + 1] + s[i];
            if (std::abs(d2) > 1e-300)
                t.push_back(s[i] - d1 * d1 / d2);
            else
                t.push_back(s[i + 2]);
        }
        prev = s.back();
        s = std::move(t);
    }
    SidedValue out;
    out.point = x;
    out.side = side;
    out.value = s.back();
    out.est_error = std::abs(s.back() - prev) + 1e-13 * std::max(1.0, std::abs(out.value));
    return out;
}

namespace detail {

// For functions constructed with a known derivative, route one-sided
// differentiation through the one-sided limit of that derivative.
inline std::optional<SidedValue> derivative_from_hint(const RealFunction& f, double x, Side side) {
    if (!f.derivative_hint()) return std::nullopt;
    RealFunction g = RealFunction::from_callable(f.label() + "'", f.domain(), f.derivative_hint());
    return one_sided_limit(g, x, side);
}

}  // namespace detail

// One-sided derivative that honors an exact derivative hint when present.
inline SidedValue one_sided_derivative_auto(const RealFunction& f, double x, Side side) {
    if (auto v = detail::derivative_from_hint(f, x, side)) return *v;
    return one_sided_derivative(f, x, side);
}

struct IntegrateStats {
    double error_bound = 0.0;   // achieved |g(b)-g(a)| * mesh bound
    std::int64_t evaluations = 0;
    bool budget_exhausted = false;
    bool monotone_violation = false;
};

// Signed integral of a bounded monotone g over [a,b] by composite midpoint
// refinement. For monotone g the estimate with mesh m has error at most
// |g(b)-g(a)| * m; refinement stops once that bound or the successive-
// refinement difference is below tolerance. Swapping a and b flips the sign.
inline double integrate_monotone(const RealFunction& g, double a, double b, const Tolerance& tol,
                                 IntegrateStats* stats = nullptr) {
    if (a == b) return 0.0;
    double sign = 1.0;
    double lo = a, hi = b;
    if (lo > hi) {
        std::swap(lo, hi);
        sign = -1.0;
    }
    const double len = hi - lo;
    double variation = 0.0;
    {
        // endpoints may be open; fall back just inside
        double ga, gb;
        double eps = len * 1e-9;
        ga = g.domain().contains(lo) ? g(lo) : g(lo + eps);
        gb = g.domain().contains(hi) ? g(hi) : g(hi - eps);
        variation = std::abs(gb - ga);
    }
    std::int64_t n = 8;
    constexpr std::int64_t kMaxN = 1 << 16;
    double est = 0.0, prev_est = 0.0, prev_prev = 0.0;
    int pass = 0;
    std::int64_t evals = 0;
    bool mono_bad = false;
    for (;;) {
        const double m = len / static_cast<double>(n);
        double sum = 0.0;
        double last = 0.0;
        bool inc = true, dec = true;
        for (std::int64_t i = 0; i < n; ++i) {
            double v = g(lo + (static_cast<double>(i) + 0.5) * m);
            if (i > 0) {
                if (v < last) inc = false;
                if (v > last) dec = false;
            }
            last = v;
            sum += v;
        }
        evals += n;
        if (!inc && !dec) mono_bad = true;  // opportunistic contract check
        prev_prev = prev_est;
        prev_est = est;
        est = sum * m;
        ++pass;
        const double bound = variation * m;
        const double want = tol.abs_tol + tol.rel_tol * std::abs(est);
        bool converged = bound <= want;
        if (!converged && pass >= 3) {
            converged = std::abs(est - prev_est) <= want * 0.25 &&
                        std::abs(prev_est - prev_prev) <= want;
        }
        if (converged || n >= kMaxN) {
            if (stats) {
                stats->error_bound = bound;
                stats->evaluations = evals;
                stats->budget_exhausted = !converged;
                stats->monotone_violation = mono_bad;
            }
            return sign * est;
        }
        n *= 2;
    }
}

// g(x_i) <= g(x_j) + slack for all i < j. Failure carries the worst pair.
inline CheckReport check_monotone(const RealFunction& g, const Grid& grid, const Tolerance& tol) {
    CheckReport rep;
    rep.name = "check_monotone";
    std::vector<double> v = eval_grid(g, grid);
    double run_max = v[0];
    std::size_t run_arg = 0;
    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    bool strict_everywhere = true;
    double prev = v[0];
    for (std::size_t j = 1; j < v.size(); ++j) {
        if (v[j] <= prev) strict_everywhere = false;
        prev = v[j];
        double drop = run_max - v[j];
        if (drop > worst) {
            worst = drop;
            wi = run_arg;
            wj = j;
        }
        if (v[j] > run_max) {
            run_max = v[j];
            run_arg = j;
        }
    }
    rep.observe(-worst);
    rep.metrics["max_drop"] = worst;
    double s = slack(tol, std::max(std::abs(v.front()), std::abs(v.back())));
    if (worst > s) {
        rep.fail({{{"x_i", grid[wi]},
                   {"x_j", grid[wj]},
                   {"g_i", v[wi]},
                   {"g_j", v[wj]},
                   {"margin", -worst}},
                  "g decreases from x_i to x_j"});
    }
    rep.note(strict_everywhere ? "strictly increasing on grid (informative)"
                               : "non-strict or decreasing somewhere on grid (informative)");
    return rep;
}

// Chord-slope convexity: for consecutive grid triples x < y < z,
// DQ(x,y) <= DQ(y,z) + slack. Consecutive triples are complete for grid
// convexity; a strided sample of wide triples is added as a cross-check.
inline CheckReport check_convex(const RealFunction& f, const Grid& grid, const Tolerance& tol) {
    CheckReport rep;
    rep.name = "check_convex";
    std::vector<double> v = eval_grid(f, grid);
    const std::size_t n = grid.size();
    auto dq = [&](std::size_t i, std::size_t j) {
        return (v[j] - v[i]) / (grid[j] - grid[i]);
    };
    double worst = 0.0;
    std::size_t wx = 0, wy = 1, wz = 2;
    double scale = 1.0;
    auto visit = [&](std::size_t i, std::size_t j, std::size_t k) {
        double l = dq(i, j), r = dq(j, k);
        scale = std::max({scale, std::abs(l), std::abs(r)});
        double viol = l - r;
        if (viol > worst) {
            worst = viol;
            wx = i;
            wy = j;
            wz = k;
        }
    };
    for (std::size_t i = 0; i + 2 < n; ++i) visit(i, i + 1, i + 2);
    std::size_t step = std::max<std::size_t>(1, n / 24);
    for (std::size_t i = 0; i + 2 < n; i += step)
        for (std::size_t k = i + 2; k < n; k += step) visit(i, (i + k) / 2, k);
    rep.observe(-worst);
    rep.metrics["max_violation"] = worst;
    if (worst > slack(tol, scale)) {
        rep.fail({{{"x", grid[wx]},
                   {"y", grid[wy]},
                   {"z", grid[wz]},
                   {"dq_xy", dq(wx, wy)},
                   {"dq_yz", dq(wy, wz)},
                   {"margin", -worst}},
                  "chord slopes decrease across the triple"});
    }
    return rep;
}

}  // namespace mvconvex
