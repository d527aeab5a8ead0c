// Command-line front end: parses function specs from flags or a config
// file, runs the checkers/constructions/solvers, and emits deterministic
// machine-readable JSON reports or CSV tables.
//
// Exit codes: 0 pass/feasible, 1 fail/infeasible, 2 usage or parse error,
// 3 numeric breakdown (integration/inversion budget exhausted).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mvconvex/calculus.hpp"
#include "mvconvex/expr.hpp"
#include "mvconvex/feq.hpp"
#include "mvconvex/gconvex.hpp"
#include "mvconvex/interval.hpp"
#include "mvconvex/json_doc.hpp"
#include "mvconvex/mv.hpp"
#include "mvconvex/report.hpp"

namespace {

using namespace mvconvex;

struct RunConfig {
    std::string command;
    std::string f_expr, g_expr, h_expr, phi_expr, mu_expr;
    std::string interval_spec = "-inf:inf";
    std::string window_spec;
    int grid_size = 201;
    double tol = 1e-9;
    std::vector<double> lambdas;
    double x0 = 0.0;
    double fc = 0.0;
    double k = 0.0;
    std::string system;
    std::string out;
    bool json = false;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

double parse_bound(const std::string& s) {
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw UsageError("bad interval bound: " + s);
        return v;
    } catch (const std::invalid_argument&) {
        throw UsageError("bad interval bound: " + s);
    }
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) parts.push_back(item);
    return parts;
}

// "LO:HI[:oo|oc|co|cc]"
Interval parse_interval(const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts.size() < 2 || parts.size() > 3)
        throw UsageError("interval must be LO:HI[:oo|oc|co|cc]: " + spec);
    double lo = parse_bound(parts[0]);
    double hi = parse_bound(parts[1]);
    bool lc = false, hc = false;
    if (parts.size() == 3) {
        const std::string& fl = parts[2];
        if (fl.size() != 2 || (fl[0] != 'o' && fl[0] != 'c') || (fl[1] != 'o' && fl[1] != 'c'))
            throw UsageError("openness flags must be one of oo|oc|co|cc: " + spec);
        lc = fl[0] == 'c';
        hc = fl[1] == 'c';
    }
    try {
        return Interval(lo, hi, lc, hc);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

RealFunction need_fn(const std::string& expr, const char* flag, const Interval& dom) {
    if (expr.empty()) throw UsageError(std::string("missing required function flag --") + flag);
    return RealFunction::parse_on(expr, dom);
}

JsonDoc witness_json(const Witness& w) {
    JsonDoc d;
    for (const auto& [k2, v] : w.values) d[k2] = v;
    if (!w.note.empty()) d["note"] = w.note;
    return d;
}

JsonDoc report_json(const CheckReport& r) {
    JsonDoc d;
    d["name"] = r.name;
    d["verdict"] = r.pass ? "pass" : "fail";
    d["worst_margin"] = r.worst_margin;
    JsonDoc wit;
    wit = JsonDoc::Array{};
    for (const auto& w : r.witnesses) wit.push_back(witness_json(w));
    d["witnesses"] = std::move(wit);
    JsonDoc met;
    met = JsonDoc::Object{};
    for (const auto& [k2, v] : r.metrics) met[k2] = v;
    d["metrics"] = std::move(met);
    JsonDoc notes;
    notes = JsonDoc::Array{};
    for (const auto& n : r.notes) notes.push_back(n);
    d["notes"] = std::move(notes);
    return d;
}

JsonDoc gconvex_json(const GConvexReport& r) {
    JsonDoc d;
    d["verdict"] = r.verdict ? "pass" : "fail";
    JsonDoc pc;
    pc = JsonDoc::Object{};
    for (const auto& [k2, v] : r.per_condition) pc[k2] = v ? "pass" : "fail";
    d["per_condition"] = std::move(pc);
    JsonDoc wit;
    wit = JsonDoc::Array{};
    for (const auto& w : r.witnesses) wit.push_back(witness_json(w));
    d["witnesses"] = std::move(wit);
    JsonDoc met;
    met = JsonDoc::Object{};
    for (const auto& [k2, v] : r.metrics) met[k2] = v;
    d["metrics"] = std::move(met);
    JsonDoc notes;
    notes = JsonDoc::Array{};
    for (const auto& n : r.notes) notes.push_back(n);
    d["notes"] = std::move(notes);
    return d;
}

JsonDoc system_json(const SystemVerdict& v) {
    JsonDoc d;
    d["system"] = v.system;
    d["verdict"] = v.pass ? "pass" : "fail";
    JsonDoc wit;
    wit = JsonDoc::Array{};
    for (const auto& w : v.witnesses) wit.push_back(witness_json(w));
    d["witnesses"] = std::move(wit);
    JsonDoc fp;
    fp = JsonDoc::Object{};
    for (const auto& [k2, val] : v.fitted_params) fp[k2] = val;
    d["fitted_params"] = std::move(fp);
    JsonDoc notes;
    notes = JsonDoc::Array{};
    for (const auto& n : v.notes) notes.push_back(n);
    d["notes"] = std::move(notes);
    return d;
}

void write_output(const RunConfig& cfg, const std::string& text) {
    if (cfg.out.empty() || cfg.out == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream os(cfg.out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file " + cfg.out);
    os << text;
    if (!text.empty() && text.back() != '\n') os << '\n';
}

std::string csv_table(const RealFunction& f, const Grid& grid) {
    std::string out = "x,f(x)\n";
    char buf[64];
    for (std::size_t i = 0; i < grid.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", grid[i]);
        out += buf;
        out += ',';
        std::snprintf(buf, sizeof(buf), "%.17g", f(grid[i]));
        out += buf;
        out += '\n';
    }
    return out;
}

int run(const RunConfig& cfg) {
    Tolerance tol;
    tol.abs_tol = cfg.tol;
    tol.rel_tol = cfg.tol;

    Interval I = parse_interval(cfg.interval_spec);
    GridOptions gopt;
    gopt.uniform_points = cfg.grid_size;
    gopt.tol = tol;
    if (!cfg.window_spec.empty()) {
        auto parts = split(cfg.window_spec, ':');
        if (parts.size() != 2) throw UsageError("window must be LO:HI");
        gopt.window_lo = parse_bound(parts[0]);
        gopt.window_hi = parse_bound(parts[1]);
    }
    if (cfg.grid_size < 3) throw UsageError("grid size must be at least 3");

    JsonDoc doc;
    doc["schema_version"] = "mvconvex-report/1";
    doc["command"] = cfg.command;
    {
        JsonDoc c;
        c["interval"] = cfg.interval_spec;
        c["grid_size"] = cfg.grid_size;
        JsonDoc t;
        t["abs_tol"] = tol.abs_tol;
        t["rel_tol"] = tol.rel_tol;
        t["strict_margin"] = tol.strict_margin;
        c["tolerances"] = std::move(t);
        if (!cfg.f_expr.empty()) c["f"] = cfg.f_expr;
        if (!cfg.g_expr.empty()) c["g"] = cfg.g_expr;
        if (!cfg.h_expr.empty()) c["h"] = cfg.h_expr;
        if (!cfg.phi_expr.empty()) c["phi"] = cfg.phi_expr;
        if (!cfg.mu_expr.empty()) c["mu"] = cfg.mu_expr;
        if (!cfg.window_spec.empty()) c["window"] = cfg.window_spec;
        doc["config"] = std::move(c);
    }

    Grid grid = make_grid(I, gopt);
    {
        JsonDoc g;
        g["size"] = grid.size();
        g["window_lo"] = grid.points.front();
        g["window_hi"] = grid.points.back();
        doc["grid"] = std::move(g);
    }

    bool pass = true;
    const std::string& cmd = cfg.command;

    if (cmd == "check-mv") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        MVCheckResult res = mv_check(f, g, grid, tol);
        pass = res.report.pass;
        doc["result"] = report_json(res.report);
        doc["result"]["witness_count"] = res.witnesses.size();
    } else if (cmd == "check-pointwise-mv") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        MVCheckResult res = pointwise_mv_check(f, cfg.x0, g, grid, tol);
        pass = res.report.pass;
        doc["result"] = report_json(res.report);
    } else if (cmd == "check-gconvex") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        GConvexReport rep = cfg.lambdas.empty()
                                ? gconvex_check(f, g, grid, tol)
                                : equivalence_suite(f, g, grid, cfg.lambdas, tol);
        pass = rep.verdict;
        doc["result"] = gconvex_json(rep);
    } else if (cmd == "check-bounds") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        CheckReport rep = bounds_certificate(f, g, grid, tol);
        pass = rep.pass;
        doc["result"] = report_json(rep);
    } else if (cmd == "check-mv-ineq") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        RealFunction h = need_fn(cfg.h_expr, "h", Interval::whole_line());
        CheckReport rep = mv_inequality_check(f, h, grid, tol);
        pass = rep.pass;
        doc["result"] = report_json(rep);
    } else if (cmd == "construct") {
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        ConstructResult cr = construct_from_quotient_bound(g, cfg.x0, cfg.fc, I, tol);
        doc["result"]["reported_error"] = cr.reported_error;
        doc["result"]["verdict"] = "pass";
        if (!cfg.json) {
            Grid tgrid = make_grid(cr.f.domain(), gopt);
            write_output(cfg, csv_table(cr.f, tgrid));
            return 0;
        }
    } else if (cmd == "solve-mv") {
        RealFunction g = need_fn(cfg.g_expr, "g", I);
        FeqSolution sol = solve_mv_equation(g, I, cfg.x0, cfg.fc, tol);
        Tolerance vtol = tol;
        vtol.abs_tol = std::max(vtol.abs_tol, 10.0 * sol.reported_error + 1e-9);
        MVCheckResult res = mv_check(sol.f, g, make_grid(sol.f.domain(), gopt), vtol);
        pass = res.report.pass;
        doc["result"] = report_json(res.report);
        doc["result"]["reported_error"] = sol.reported_error;
        for (const auto& [k2, v] : sol.params) doc["result"]["params"][k2] = v;
    } else if (cmd == "solve-mv-ineq") {
        // h keeps its own domain (--window), distinct from the solution interval
        Interval hdom = cfg.window_spec.empty() ? Interval::whole_line()
                                                : parse_interval(cfg.window_spec);
        RealFunction h = need_fn(cfg.h_expr, "h", hdom);
        FeqSolution sol = solve_mv_inequality(h, I, cfg.x0, cfg.fc, tol);
        CheckReport rep = mv_inequality_check(sol.f, h, make_grid(sol.f.domain(), gopt), tol);
        pass = rep.pass;
        doc["result"] = report_json(rep);
        doc["result"]["reported_error"] = sol.reported_error;
        for (const auto& [k2, v] : sol.params) doc["result"]["params"][k2] = v;
    } else if (cmd == "solve-feq") {
        if (cfg.system == "self-convex") {
            RealFunction f = need_fn(cfg.f_expr, "f", I);
            SystemVerdict v = self_convexity_check(f, grid, tol);
            pass = v.pass;
            doc["result"] = system_json(v);
        } else if (cfg.system == "linear") {
            RealFunction phi = need_fn(cfg.phi_expr.empty() ? "0" : cfg.phi_expr, "phi", I);
            SystemVerdict v = linear_comparative_solve(cfg.k, phi, I, cfg.x0, cfg.fc, tol);
            pass = v.pass;
            doc["result"] = system_json(v);
        } else if (cfg.system == "symmetric") {
            RealFunction f = need_fn(cfg.f_expr, "f", I);
            RealFunction g = need_fn(cfg.g_expr, "g", I);
            SystemVerdict v = symmetric_convexity_check(f, g, grid, tol);
            pass = v.pass;
            doc["result"] = system_json(v);
        } else if (cfg.system == "convex-concave") {
            RealFunction f = need_fn(cfg.f_expr, "f", I);
            RealFunction g = need_fn(cfg.g_expr, "g", I);
            RealFunction h = need_fn(cfg.h_expr, "h", I);
            SystemVerdict v = convex_concave_check(f, g, h, grid, tol);
            pass = v.pass;
            doc["result"] = system_json(v);
        } else {
            throw UsageError("unknown --system '" + cfg.system +
                             "' (expected self-convex, linear, symmetric or convex-concave)");
        }
    } else if (cmd == "emit-table") {
        RealFunction f = need_fn(cfg.f_expr, "f", I);
        write_output(cfg, csv_table(f, grid));
        return 0;
    } else {
        throw UsageError("unknown command '" + cmd + "'");
    }

    int code = pass ? 0 : 1;
    doc["verdict"] = pass ? "pass" : "fail";
    doc["exit_code"] = code;
    write_output(cfg, doc.dump(2));
    return code;
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw UsageError("cannot open config file " + path);
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(std::string("config file parse error: ") + e.what());
    }
    auto get_str = [&](const char* key, std::string& slot) {
        if (j.contains(key)) slot = j.at(key).get<std::string>();
    };
    get_str("command", cfg.command);
    get_str("f", cfg.f_expr);
    get_str("g", cfg.g_expr);
    get_str("h", cfg.h_expr);
    get_str("phi", cfg.phi_expr);
    get_str("mu", cfg.mu_expr);
    get_str("interval", cfg.interval_spec);
    get_str("window", cfg.window_spec);
    get_str("system", cfg.system);
    get_str("out", cfg.out);
    if (j.contains("grid")) cfg.grid_size = j.at("grid").get<int>();
    if (j.contains("tol")) cfg.tol = j.at("tol").get<double>();
    if (j.contains("x0")) cfg.x0 = j.at("x0").get<double>();
    if (j.contains("fc")) cfg.fc = j.at("fc").get<double>();
    if (j.contains("k")) cfg.k = j.at("k").get<double>();
    if (j.contains("json")) cfg.json = j.at("json").get<bool>();
    if (j.contains("lambda"))
        for (const auto& l : j.at("lambda")) cfg.lambdas.push_back(l.get<double>());
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"mvconvex: mean-value-function and comparative-convexity checks"};
    app.require_subcommand(0, 1);
    // long-only help so the --h function flag does not collide with -h
    app.set_help_flag("--help", "print help and exit");

    std::string config_path;
    app.add_option("--config", config_path, "flat JSON config file (flags override)");
    app.add_option("--f", cfg.f_expr, "expression for f");
    app.add_option("--g", cfg.g_expr, "expression for g");
    app.add_option("--h", cfg.h_expr, "expression for h");
    app.add_option("--phi", cfg.phi_expr, "expression for phi");
    app.add_option("--mu", cfg.mu_expr, "expression for mu");
    app.add_option("--interval", cfg.interval_spec, "domain LO:HI[:oo|oc|co|cc]");
    app.add_option("--window", cfg.window_spec, "truncation window LO:HI");
    app.add_option("--grid", cfg.grid_size, "uniform grid points (>= 3)");
    app.add_option("--tol", cfg.tol, "absolute/relative tolerance");
    app.add_option("--lambda", cfg.lambdas, "blend value in [0,1] (repeatable)");
    app.add_option("--x0", cfg.x0, "base point / anchor c");
    app.add_option("--fc", cfg.fc, "value of f at the anchor");
    app.add_option("--k", cfg.k, "linear comparative coefficient k");
    app.add_option("--system", cfg.system,
                   "solve-feq system: self-convex, linear, symmetric, convex-concave");
    app.add_option("--out", cfg.out, "output path (default stdout)");
    app.add_flag("--json", cfg.json, "emit the JSON report even for table commands");

    static const char* kCommands[] = {"check-mv",      "check-pointwise-mv", "check-gconvex",
                                      "check-bounds",  "check-mv-ineq",      "construct",
                                      "solve-mv",      "solve-mv-ineq",      "solve-feq",
                                      "emit-table"};
    for (const char* c : kCommands) {
        auto* sub = app.add_subcommand(c);
        sub->fallthrough();
        sub->set_help_flag("--help", "print help and exit");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (!config_path.empty()) {
            RunConfig file_cfg;
            apply_config_file(file_cfg, config_path);
            // command-line flags override file values
            RunConfig merged = file_cfg;
            if (!cfg.f_expr.empty()) merged.f_expr = cfg.f_expr;
            if (!cfg.g_expr.empty()) merged.g_expr = cfg.g_expr;
            if (!cfg.h_expr.empty()) merged.h_expr = cfg.h_expr;
            if (!cfg.phi_expr.empty()) merged.phi_expr = cfg.phi_expr;
            if (!cfg.mu_expr.empty()) merged.mu_expr = cfg.mu_expr;
            if (cfg.interval_spec != "-inf:inf") merged.interval_spec = cfg.interval_spec;
            if (!cfg.window_spec.empty()) merged.window_spec = cfg.window_spec;
            if (cfg.grid_size != 201) merged.grid_size = cfg.grid_size;
            if (cfg.tol != 1e-9) merged.tol = cfg.tol;
            if (!cfg.lambdas.empty()) merged.lambdas = cfg.lambdas;
            if (cfg.x0 != 0.0) merged.x0 = cfg.x0;
            if (cfg.fc != 0.0) merged.fc = cfg.fc;
            if (cfg.k != 0.0) merged.k = cfg.k;
            if (!cfg.system.empty()) merged.system = cfg.system;
            if (!cfg.out.empty()) merged.out = cfg.out;
            if (cfg.json) merged.json = true;
            cfg = merged;
        }
        for (const auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
        if (cfg.command.empty())
            throw UsageError("no command given (see --help for the list of subcommands)");
        return run(cfg);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << " (expected " << e.expected() << ")\n";
        return 2;
    } catch (const EvalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric breakdown: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
