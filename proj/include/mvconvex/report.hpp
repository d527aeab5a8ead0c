#pragma once

// Verdict carriers: a CheckReport is a pass/fail with counterexample
// witnesses, numeric margins and free-form metrics.

#include <limits>
#include <map>
#include <string>
#include <vector>

namespace mvconvex {

struct Witness {
    std::map<std::string, double> values;  // named coordinates of the counterexample
    std::string note;
};

struct CheckReport {
    std::string name;
    bool pass = true;
    // Most negative observed margin (pass requires worst_margin >= -slack).
    double worst_margin = std::numeric_limits<double>::infinity();
    std::vector<Witness> witnesses;
    std::vector<std::string> notes;
    std::map<std::string, double> metrics;

    static constexpr std::size_t kWitnessCap = 32;

    void observe(double margin) {
        if (margin < worst_margin) worst_margin = margin;
    }

    void fail(Witness w) {
        pass = false;
        if (witnesses.size() < kWitnessCap) witnesses.push_back(std::move(w));
    }

    void note(std::string s) { notes.push_back(std::move(s)); }
};

}  // namespace mvconvex
