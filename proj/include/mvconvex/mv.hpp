#pragma once

// Mean-value-function verification: witness search for the MV relation
// f(y) - f(x) = g(c)(y - x), grid checks, strict-mean sample checks,
// pointwise MV-function generation and the associated mu functional
// equation and differential residual.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

#include "calculus.hpp"
#include "expr.hpp"
#include "interval.hpp"
#include "report.hpp"

namespace mvconvex {

struct MVWitness {
    double x = 0.0;
    double y = 0.0;
    double c = 0.0;       // strictly between x and y
    double dq = 0.0;      // (f(y)-f(x))/(y-x)
    double g_at_c = 0.0;  // |g_at_c - dq| <= tolerance of the search
};

struct MeanFunctionSample {
    double x = 0.0;
    double y = 0.0;
    double eta = 0.0;     // = x + (y-x)*lambda
    double lambda = 0.0;  // in (0,1)
};

struct PointwiseMVSpec {
    double x0 = 0.0;
    double mu = 0.5;  // in (0,1)
};

namespace detail {

struct Probe {
    double t;
    double phi;  // g(t) - dq
};

}  // namespace detail

// Search (min(x,y), max(x,y)) for c with |g(c) - dq| <= tol. Monotone
// bisection when 33 probes look monotone; dense 1024-point scan plus
// golden-section refinement otherwise. Deterministic: smallest acceptable
// c wins.
inline std::optional<MVWitness> mv_witness(const RealFunction& f, const RealFunction& g, double x,
                                           double y, const Tolerance& tol) {
    if (x == y) throw std::invalid_argument("mv_witness: degenerate pair x = y");
    const double lo = std::min(x, y), hi = std::max(x, y);
    const double dq = difference_quotient(f, x, y);
    const double accept = slack(tol, dq);

    auto make = [&](double c) {
        MVWitness w;
        w.x = x;
        w.y = y;
        w.c = c;
        w.dq = dq;
        w.g_at_c = g(c);
        return w;
    };

    // the midpoint is the classical witness; take it when it is an exact root
    {
        double cmid = 0.5 * (x + y);
        if (cmid > lo && cmid < hi && g(cmid) - dq == 0.0) return make(cmid);
    }

    constexpr int kProbes = 33;
    const double edge = (hi - lo) * 1e-9;
    std::vector<detail::Probe> probes;
    probes.reserve(kProbes + 2);
    // near-endpoint probes so roots close to lo or hi still get bracketed
    probes.push_back({lo + edge, g(lo + edge) - dq});
    for (int i = 0; i < kProbes; ++i) {
        double t = lo + (i + 1) * (hi - lo) / (kProbes + 1);
        probes.push_back({t, g(t) - dq});
    }
    probes.push_back({hi - edge, g(hi - edge) - dq});
    const int np = static_cast<int>(probes.size());

    bool inc = true, dec = true;
    for (int i = 1; i < np; ++i) {
        if (probes[i].phi < probes[i - 1].phi) inc = false;
        if (probes[i].phi > probes[i - 1].phi) dec = false;
    }

    auto bisect = [&](double a, double b, bool increasing) {
        // phi changes sign on [a,b]
        for (int it = 0; it < 100 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
            double mid = 0.5 * (a + b);
            double phi = g(mid) - dq;
            bool low = increasing ? (phi < 0.0) : (phi > 0.0);
            if (low)
                a = mid;
            else
                b = mid;
        }
        return 0.5 * (a + b);
    };

    if (inc || dec) {
        // exact roots first, then the leftmost sign-change bracket
        for (int i = 0; i < np; ++i)
            if (probes[i].phi == 0.0) return make(probes[i].t);
        for (int i = 1; i < np; ++i) {
            if ((probes[i - 1].phi < 0.0) != (probes[i].phi < 0.0)) {
                double c = bisect(probes[i - 1].t, probes[i].t, inc);
                if (std::abs(g(c) - dq) <= accept && c > lo && c < hi) return make(c);
                break;  // monotone: the unique crossing failed (jump over dq)
            }
        }
    }

    // candidate among the probes
    {
        int best = -1;
        for (int i = 0; i < np; ++i)
            if (std::abs(probes[i].phi) <= accept && (best < 0)) best = i;
        if (best >= 0) return make(probes[best].t);
    }
    if (inc || dec) return std::nullopt;  // monotone and no acceptable value

    // dense scan + golden-section refinement of |phi|
    constexpr int kDense = 1024;
    int best = -1;
    double best_abs = kInf;
    std::vector<double> dense_t(kDense), dense_phi(kDense);
    for (int i = 0; i < kDense; ++i) {
        double t = lo + (i + 1) * (hi - lo) / (kDense + 1);
        dense_t[i] = t;
        dense_phi[i] = std::abs(g(t) - dq);
        if (dense_phi[i] < best_abs) {
            best_abs = dense_phi[i];
            best = i;
        }
    }
    double a = best > 0 ? dense_t[best - 1] : lo + edge;
    double b = best + 1 < kDense ? dense_t[best + 1] : hi - edge;
    const double gr = 0.6180339887498949;
    double c1 = b - gr * (b - a), c2 = a + gr * (b - a);
    double fc1 = std::abs(g(c1) - dq), fc2 = std::abs(g(c2) - dq);
    for (int it = 0; it < 20; ++it) {
        if (fc1 <= fc2) {
            b = c2;
            c2 = c1;
            fc2 = fc1;
            c1 = b - gr * (b - a);
            fc1 = std::abs(g(c1) - dq);
        } else {
            a = c1;
            c1 = c2;
            fc1 = fc2;
            c2 = a + gr * (b - a);
            fc2 = std::abs(g(c2) - dq);
        }
    }
    double c = fc1 <= fc2 ? c1 : c2;
    if (std::abs(g(c) - dq) <= accept && c > lo && c < hi) return make(c);
    if (best_abs <= accept) return make(dense_t[best]);
    return std::nullopt;
}

namespace detail {

// Deterministic pair budget: all pairs for small grids, otherwise adjacent
// and extreme pairs plus a strided stratified fill, capped at 4096.
inline std::vector<std::pair<std::size_t, std::size_t>> select_pairs(std::size_t n,
                                                                     std::size_t cap = 4096) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (n <= 64) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
        return pairs;
    }
    std::vector<std::uint8_t> seen(n * n, 0);
    auto add = [&](std::size_t i, std::size_t j) {
        if (i >= j || j >= n) return;
        if (seen[i * n + j]) return;
        seen[i * n + j] = 1;
        pairs.emplace_back(i, j);
    };
    for (std::size_t i = 0; i + 1 < n; ++i) add(i, i + 1);
    add(0, n - 1);
    static constexpr std::size_t kStrides[] = {2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233};
    for (std::size_t s : kStrides) {
        if (pairs.size() >= cap) break;
        std::size_t step = std::max<std::size_t>(1, n / 96);
        for (std::size_t i = 0; i + s < n && pairs.size() < cap; i += step) add(i, i + s);
    }
    // fill remaining budget with wide pairs
    const std::size_t wide = std::max<std::size_t>(1, n / 64);
    for (std::size_t i = 0; i < n && pairs.size() < cap; i += wide)
        for (std::size_t j = n - 1; j > i + 1 && pairs.size() < cap;) {
            add(i, j);
            if (j < i + 2 + wide) break;  // guard unsigned wrap
            j -= wide;
        }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

}  // namespace detail

struct MVCheckResult {
    CheckReport report;
    std::vector<MVWitness> witnesses;         // capped
    std::vector<MeanFunctionSample> samples;  // lambda recovered from each witness
};

// Witness existence for every selected grid pair x < y.
inline MVCheckResult mv_check(const RealFunction& f, const RealFunction& g, const Grid& grid,
                              const Tolerance& tol) {
    MVCheckResult res;
    res.report.name = "mv_check";
    auto pairs = detail::select_pairs(grid.size());
    res.report.metrics["pairs_checked"] = static_cast<double>(pairs.size());
    std::size_t failures = 0;
    for (auto [i, j] : pairs) {
        double x = grid[i], y = grid[j];
        auto w = mv_witness(f, g, x, y, tol);
        if (w) {
            if (res.witnesses.size() < 4096) res.witnesses.push_back(*w);
            MeanFunctionSample s;
            s.x = x;
            s.y = y;
            s.eta = w->c;
            s.lambda = (w->c - x) / (y - x);
            res.samples.push_back(s);
        } else {
            ++failures;
            res.report.fail({{{"x", x}, {"y", y}, {"dq", difference_quotient(f, x, y)}},
                             "no c between x and y with g(c) = DQ(x,y)"});
        }
    }
    res.report.metrics["failing_pairs"] = static_cast<double>(failures);
    return res;
}

// Every sample must have eta strictly between its endpoints (relative
// strict margin) and satisfy the lambda-blend identity.
inline CheckReport strict_mean_check(const std::vector<MeanFunctionSample>& samples,
                                     const Tolerance& tol) {
    CheckReport rep;
    rep.name = "strict_mean_check";
    if (samples.empty()) {
        rep.pass = false;
        rep.note("empty sample list");
        return rep;
    }
    for (const auto& s : samples) {
        double lo = std::min(s.x, s.y), hi = std::max(s.x, s.y);
        double r = (s.eta - lo) / (hi - lo);  // relative position in (0,1)
        double margin = std::min(r, 1.0 - r) - tol.strict_margin;
        rep.observe(margin);
        if (margin < 0.0) {
            rep.fail({{{"x", s.x}, {"y", s.y}, {"eta", s.eta}, {"rel_pos", r}},
                      "eta not strictly between x and y"});
            continue;
        }
        if (!(s.lambda > 0.0 && s.lambda < 1.0)) {
            rep.fail({{{"x", s.x}, {"y", s.y}, {"lambda", s.lambda}}, "lambda outside (0,1)"});
            continue;
        }
        double recon = s.x + (s.y - s.x) * s.lambda;
        double err = std::abs(recon - s.eta);
        if (err > slack(tol, hi)) {
            rep.fail({{{"x", s.x}, {"y", s.y}, {"eta", s.eta}, {"lambda", s.lambda},
                       {"reconstructed", recon}},
                      "eta != x + (y-x)*lambda"});
        }
    }
    return rep;
}

// g(t) = (mu/(t-x0)) (f(x0 + (t-x0)/mu) - f(x0)); the removable point
// t = x0 is filled by the extrapolated derivative limit when both sides
// agree (or the single available side at a boundary x0).
inline RealFunction pointwise_mv_generate(const RealFunction& f, const PointwiseMVSpec& spec,
                                          const Tolerance& tol = {}) {
    if (!(spec.mu > 0.0 && spec.mu < 1.0))
        throw std::invalid_argument("pointwise_mv_generate: mu must lie in (0,1)");
    const Interval& I = f.domain();
    if (!I.contains(spec.x0))
        throw std::invalid_argument("pointwise_mv_generate: x0 outside domain of f");
    const double mu = spec.mu, x0 = spec.x0;
    // t = x0 + mu*(u - x0), u in I
    double lo = std::isfinite(I.lo) ? x0 + mu * (I.lo - x0) : -kInf;
    double hi = std::isfinite(I.hi) ? x0 + mu * (I.hi - x0) : kInf;
    Interval dom(lo, hi, std::isfinite(lo) && I.lo_closed, std::isfinite(hi) && I.hi_closed);

    // removable-point fill
    std::optional<double> fill;
    {
        std::optional<SidedValue> l, r;
        try {
            l = one_sided_derivative_auto(f, x0, Side::left);
        } catch (const EvalError&) {}
        try {
            r = one_sided_derivative_auto(f, x0, Side::right);
        } catch (const EvalError&) {}
        if (l && r) {
            double agree = slack(tol, std::max(std::abs(l->value), std::abs(r->value))) +
                           l->est_error + r->est_error;
            if (std::abs(l->value - r->value) <= agree) fill = 0.5 * (l->value + r->value);
        } else if (l) {
            fill = l->value;
        } else if (r) {
            fill = r->value;
        }
    }

    const double f_x0 = f(x0);
    const double rem_eps = 1e-12 * std::max(1.0, std::abs(x0));
    RealFunction base = f;  // shared copy keeps the evaluator alive
    auto fn = [base, mu, x0, f_x0, fill, rem_eps](double t) -> double {
        if (std::abs(t - x0) <= rem_eps) {
            if (fill) return *fill;
            throw EvalError("pointwise MV-function undefined at t = x0 "
                            "(one-sided derivatives of f disagree there)");
        }
        return (mu / (t - x0)) * (base(x0 + (t - x0) / mu) - f_x0);
    };
    return RealFunction::from_callable("pointwise_mv(" + f.label() + ")", dom, fn);
}

// mv_check restricted to pairs (x0, y) for y in the grid.
inline MVCheckResult pointwise_mv_check(const RealFunction& f, double x0, const RealFunction& g,
                                        const Grid& grid, const Tolerance& tol) {
    MVCheckResult res;
    res.report.name = "pointwise_mv_check";
    if (!f.domain().contains(x0))
        throw std::invalid_argument("pointwise_mv_check: x0 outside domain of f");
    const double eps = 1e-12 * std::max(1.0, std::abs(x0));
    std::size_t checked = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double y = grid[i];
        if (std::abs(y - x0) <= eps) continue;
        ++checked;
        auto w = mv_witness(f, g, x0, y, tol);
        if (w) {
            if (res.witnesses.size() < 4096) res.witnesses.push_back(*w);
            MeanFunctionSample s;
            s.x = x0;
            s.y = y;
            s.eta = w->c;
            s.lambda = (w->c - x0) / (y - x0);
            res.samples.push_back(s);
        } else {
            res.report.fail({{{"x0", x0}, {"y", y}, {"dq", difference_quotient(f, x0, y)}},
                             "no witness for the pair (x0, y)"});
        }
    }
    res.report.metrics["pairs_checked"] = static_cast<double>(checked);
    return res;
}

// |mu(t mu(t) - x0 mu(t) + x0) - mu(t)| <= tol on the grid. Arguments that
// leave the domain of mu are reported, not failed; mu values outside (0,1)
// are precondition failures carried in the report.
inline CheckReport mu_equation_check(const RealFunction& mu, double x0, const Grid& grid,
                                     const Tolerance& tol) {
    CheckReport rep;
    rep.name = "mu_equation_check";
    double max_resid = 0.0;
    std::size_t skipped = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        double v = mu(t);
        if (!(v > 0.0 && v < 1.0)) {
            rep.fail({{{"t", t}, {"mu_t", v}}, "precondition: mu(t) outside (0,1)"});
            continue;
        }
        double arg = t * v - x0 * v + x0;
        if (!mu.domain().contains(arg)) {
            ++skipped;
            continue;
        }
        double resid = std::abs(mu(arg) - v);
        max_resid = std::max(max_resid, resid);
        rep.observe(slack(tol) - resid);
        if (resid > slack(tol)) {
            rep.fail({{{"t", t}, {"mu_t", v}, {"arg", arg}, {"mu_arg", mu(arg)},
                       {"residual", resid}},
                      "functional-equation residual exceeds tolerance"});
        }
    }
    rep.metrics["max_residual"] = max_resid;
    if (skipped > 0)
        rep.note(std::to_string(skipped) + " grid point(s) mapped outside the domain of mu");
    return rep;
}

// |t f'(t) - mu f(t/mu) + mu f(0)| <= tol * max(1, |t f'(t)|) on the grid.
// Points where the one-sided derivatives disagree are flagged and excluded.
inline CheckReport ode_residual_check(const RealFunction& f, double mu, const Grid& grid,
                                      const Tolerance& tol) {
    CheckReport rep;
    rep.name = "ode_residual_check";
    if (!(mu > 0.0 && mu < 1.0))
        throw std::invalid_argument("ode_residual_check: mu must lie in (0,1)");
    if (!f.domain().contains(0.0))
        throw std::invalid_argument("ode_residual_check: 0 must lie in the domain of f");
    const double f0 = f(0.0);
    double max_resid = 0.0;
    std::size_t indeterminate = 0, skipped = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        double t = grid[i];
        if (!f.domain().contains(t) || !f.domain().contains(t / mu)) {
            ++skipped;
            continue;
        }
        SidedValue l, r;
        try {
            l = one_sided_derivative_auto(f, t, Side::left);
            r = one_sided_derivative_auto(f, t, Side::right);
        } catch (const EvalError&) {
            ++skipped;
            continue;
        }
        double agree = slack(tol, std::max(std::abs(l.value), std::abs(r.value))) +
                       10.0 * (l.est_error + r.est_error);
        if (std::abs(l.value - r.value) > agree) {
            ++indeterminate;
            continue;
        }
        double fp = 0.5 * (l.value + r.value);
        double resid = t * fp - mu * f(t / mu) + mu * f0;
        double denom = std::max(1.0, std::abs(t * fp));
        max_resid = std::max(max_resid, std::abs(resid) / denom);
        double margin = slack(tol) - std::abs(resid) / denom;
        rep.observe(margin);
        if (margin < 0.0) {
            rep.fail({{{"t", t}, {"f_prime", fp}, {"residual", resid}},
                      "differential residual exceeds tolerance"});
        }
    }
    rep.metrics["max_scaled_residual"] = max_resid;
    if (indeterminate > 0)
        rep.note(std::to_string(indeterminate) +
                 " non-differentiable point(s) flagged indeterminate and excluded");
    if (skipped > 0) rep.note(std::to_string(skipped) + " point(s) outside domain, skipped");
    return rep;
}

// Exact rational arithmetic for the dense-preimage midpoint witness.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n, long long d = 1) : num(n), den(d) {
        if (den == 0) throw std::invalid_argument("Rational: zero denominator");
        normalize();
    }

    void normalize() {
        if (den < 0) {
            num = -num;
            den = -den;
        }
        long long g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    friend bool operator==(const Rational& a, const Rational& b) {
        return a.num == b.num && a.den == b.den;
    }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
};

// Exact midpoint: a rational strictly between x and y. chi_Q(c) = 1 = DQ of
// the identity, so this is the witness for the Dirichlet indicator as an
// MV-function of the identity.
inline Rational rational_mean_witness(const Rational& x, const Rational& y) {
    if (x == y) throw std::invalid_argument("rational_mean_witness: degenerate pair x = y");
    return Rational(x.num * y.den + y.num * x.den, 2 * x.den * y.den);
}

}  // namespace mvconvex
