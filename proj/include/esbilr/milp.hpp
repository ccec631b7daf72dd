#ifndef ESBILR_MILP_HPP
#define ESBILR_MILP_HPP

#include <cmath>

#include "esbilr/lp.hpp"

namespace esbilr {

struct MilpOptions {
    double gap = 0.0;        // relative gap at which the search may stop
    double int_tol = 1e-6;
    int node_cap = 500000;
    double cutoff = kInf;    // known upper bound; nodes at or above it are pruned
};

struct MilpResult {
    bool feasible = false;
    bool proven = false; // bound closed within the requested gap
    double objective = kInf;
    double bound = -kInf;
    std::vector<double> x;
    int nodes = 0;
    LpStatus root_status = LpStatus::Numerical;

    double gap() const {
        if (!feasible) return kInf;
        if (objective == 0.0) return bound >= -1e-9 ? 0.0 : kInf;
        return (objective - bound) / std::max(1e-12, std::fabs(objective));
    }
};

/// Deterministic branch-and-bound over the LP relaxation: most-fractional branching,
/// depth-first dives with best-bound restarts. `is_int` marks integral variables.
MilpResult milp_solve(const LinearProgram& lp, const std::vector<char>& is_int,
                      const MilpOptions& opt = {});

} // namespace esbilr

#endif
