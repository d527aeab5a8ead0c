#pragma once

// Intervals (possibly unbounded, open/closed endpoints), evaluation grids
// and tolerance bundles shared by every checker.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mvconvex {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Tolerance {
    double abs_tol = 1e-9;
    double rel_tol = 1e-9;
    double strict_margin = 1e-7;
};

// Absolute slack for comparisons at the given magnitude scale.
inline double slack(const Tolerance& tol, double scale = 1.0) {
    return tol.abs_tol + tol.rel_tol * std::max(1.0, std::abs(scale));
}

struct Interval {
    double lo = -kInf;
    double hi = kInf;
    bool lo_closed = false;
    bool hi_closed = false;

    Interval() = default;
    Interval(double lo_, double hi_, bool lo_closed_ = false, bool hi_closed_ = false)
        : lo(lo_), hi(hi_), lo_closed(lo_closed_), hi_closed(hi_closed_) {
        if (!(lo < hi))
            throw std::invalid_argument("Interval: require lo < hi");
        if (std::isinf(lo) && lo_closed)
            throw std::invalid_argument("Interval: unbounded endpoint cannot be closed");
        if (std::isinf(hi) && hi_closed)
            throw std::invalid_argument("Interval: unbounded endpoint cannot be closed");
    }

    static Interval whole_line() { return Interval(-kInf, kInf); }

    bool contains(double x) const {
        if (x < lo || x > hi) return false;
        if (x == lo && !lo_closed) return false;
        if (x == hi && !hi_closed) return false;
        return true;
    }

    bool interior_contains(double x) const { return x > lo && x < hi; }

    bool bounded() const { return std::isfinite(lo) && std::isfinite(hi); }

    std::string str() const {
        auto num = [](double v) {
            if (v == -kInf) return std::string("-inf");
            if (v == kInf) return std::string("inf");
            return std::to_string(v);
        };
        return std::string(lo_closed ? "[" : "(") + num(lo) + ", " + num(hi) +
               (hi_closed ? "]" : ")");
    }
};

// Finite strictly increasing sample of the interior of an interval.
struct Grid {
    std::vector<double> points;
    Interval source_interval;

    Grid(std::vector<double> pts, Interval src)
        : points(std::move(pts)), source_interval(src) {
        if (points.size() < 3)
            throw std::invalid_argument("Grid: need at least 3 points");
        for (std::size_t i = 0; i + 1 < points.size(); ++i)
            if (!(points[i] < points[i + 1]))
                throw std::invalid_argument("Grid: points must be strictly increasing");
        for (double p : points)
            if (!source_interval.interior_contains(p))
                throw std::invalid_argument("Grid: point not interior to source interval");
    }

    std::size_t size() const { return points.size(); }
    double operator[](std::size_t i) const { return points[i]; }
};

struct GridOptions {
    int uniform_points = 201;
    int lowdisc_points = 64;
    double window_lo = -10.0;   // truncation window for unbounded intervals
    double window_hi = 10.0;
    Tolerance tol{};
};

// Effective finite window used for sampling: the interval intersected with
// the truncation window, then shrunk on open sides so that strict
// inequalities on the interior are meaningful at floating point.
inline std::pair<double, double> sampling_window(const Interval& I, const GridOptions& opt) {
    double a = std::isfinite(I.lo) ? I.lo : opt.window_lo;
    double b = std::isfinite(I.hi) ? I.hi : opt.window_hi;
    a = std::max(a, opt.window_lo);
    b = std::min(b, opt.window_hi);
    if (!(a < b))
        throw std::invalid_argument("sampling window is empty");
    double eps = std::max(opt.tol.abs_tol, opt.tol.rel_tol * (b - a));
    if (a == I.lo && !I.lo_closed) a += eps;
    if (b == I.hi && !I.hi_closed) b -= eps;
    return {a, b};
}

// Default grid: uniform interior points plus a fixed low-discrepancy
// (golden-ratio Kronecker) sequence so that grid-aligned pathologies do
// not alias. Fully deterministic.
inline Grid make_grid(const Interval& I, const GridOptions& opt = {}) {
    auto [a, b] = sampling_window(I, opt);
    const int n = std::max(3, opt.uniform_points);
    std::vector<double> pts;
    pts.reserve(static_cast<std::size_t>(n + opt.lowdisc_points));
    const double len = b - a;
    for (int i = 0; i < n; ++i)
        pts.push_back(a + (i + 1) * len / (n + 1));
    const double phi_inv = 0.6180339887498949;  // 1/phi
    double u = 0.5;                              // fixed seed
    for (int k = 0; k < opt.lowdisc_points; ++k) {
        u += phi_inv;
        u -= std::floor(u);
        pts.push_back(a + (0.002 + 0.996 * u) * len);
    }
    std::sort(pts.begin(), pts.end());
    // drop near-duplicates
    std::vector<double> out;
    out.reserve(pts.size());
    // wide enough that difference quotients over any adjacent pair keep
    // enough precision to recover blend parameters to ~1e-9
    const double min_gap = len * 1e-4;
    for (double p : pts) {
        if (out.empty() || p - out.back() > min_gap) out.push_back(p);
    }
    return Grid(std::move(out), I);
}

// Grid with specific extra points inserted (used when a check must probe an
// exact location, e.g. a kink).
inline Grid grid_with_points(const Grid& g, const std::vector<double>& extra) {
    std::vector<double> pts = g.points;
    for (double e : extra) {
        if (!g.source_interval.interior_contains(e)) continue;
        pts.push_back(e);
    }
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return Grid(std::move(pts), g.source_interval);
}

}  // namespace mvconvex
