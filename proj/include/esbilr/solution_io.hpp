#ifndef ESBILR_SOLUTION_IO_HPP
#define ESBILR_SOLUTION_IO_HPP

#include <string>
#include <vector>

#include "esbilr/bnp.hpp"
#include "esbilr/instance.hpp"
#include "esbilr/route.hpp"

namespace esbilr {

/// On-disk solution document. Deliberately excludes wall-clock data so identical
/// runs serialize byte-identically.
struct SolutionDocument {
    std::string method;
    double objective = 0.0;
    double bound = 0.0;
    double gap = 0.0;
    std::string stop_reason;
    int nodes = 0;
    int columns = 0;
    std::vector<int> fleet;
    double invest = 0.0, transport = 0.0, penalty = 0.0, shift = 0.0;
    std::vector<double> unmet;
    std::vector<std::vector<double>> shift_unmet;
    std::vector<std::pair<Route, int>> plan;
};

SolutionDocument document_from_bnp(const BnPResult& r, const std::string& method);

std::string solution_to_json(const SolutionDocument& doc);
SolutionDocument solution_from_json(const std::string& text);
void write_solution(const SolutionDocument& doc, const std::string& path);
SolutionDocument load_solution(const std::string& path);

struct ValidationReport {
    bool clean = true;
    std::vector<std::string> issues; // per-route violations and coverage mismatches
    std::vector<double> coverage_residual; // unmet demand not accounted for, per shelter
};

/// Re-validates every route against the instance and cross-checks demand coverage
/// against the recorded unmet amounts.
ValidationReport validate_solution(const SolutionDocument& doc, const Instance& inst);

} // namespace esbilr

#endif
