#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pdl {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
    double budget = 0;   // wall-clock limit, part of the pass condition
};

constexpr int kCriteria = 15;

std::string criterion_name(int id);
// "exact", "montecarlo", "all", or a comma list of ids
std::vector<int> suite_ids(std::string_view suite);

CriterionResult run_criterion(int id, unsigned threads = 0);
// prints one line per criterion to out as it finishes
std::vector<CriterionResult> run_suite(const std::vector<int>& ids, std::ostream& out, unsigned threads = 0);
std::string format_line(const CriterionResult& r);

}  // namespace pdl
