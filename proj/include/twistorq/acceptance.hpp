#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace twistorq::acceptance {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

inline constexpr int kCriteria = 9;

CriterionResult run_criterion(int id, int threads = 1);
std::vector<CriterionResult> run_all(int threads = 1);

// One line per criterion: "[PASS] 3 twistor-line table (0.01 s): detail".
std::string format_line(const CriterionResult& r);

}  // namespace twistorq::acceptance
