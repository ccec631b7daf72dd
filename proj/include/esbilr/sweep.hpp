#ifndef ESBILR_SWEEP_HPP
#define ESBILR_SWEEP_HPP

#include <string>
#include <vector>

#include "esbilr/instance.hpp"
#include "esbilr/solution_io.hpp"

namespace esbilr {

/// One solver run: instance source, scenario knobs, method, solver parameters.
struct RunSpec {
    std::string instance_path; // empty: generate from the bundled case tables
    int gen_shelters = 4;
    int gen_stations = 1;
    int gen_slots = 16;
    unsigned seed = 7;

    std::string method = "bnp-dp"; // compact | bnp-exact | bnp-dp
    int sparsity = 0;              // 0 keep, 1..4 apply
    std::string severity = "normal";
    double demand_scale = 1.0;
    std::vector<int> availability; // per-type cap override; empty keeps the instance's
    int service_override = 0;      // >0: uniform shelter service time
    double shift_fee = -1.0;       // >=0: shift mode with this constant fee

    bool deterministic = true;
    double gap_target = 0.01;
    bool use_milp_master = true;
    double time_cap = 0.0;
    int node_cap = 100000;
    int compact_var_cap = 400000;
    std::string trace_path;
};

Instance materialize_instance(const RunSpec& spec);

struct SolveOutcome {
    bool ok = false;
    std::string error;
    SolutionDocument doc;
    double shifted_pct = 0.0; // sum of per-slot residuals over total demand
    double runtime_seconds = 0.0;
};

SolveOutcome run_solve(const RunSpec& spec);

enum class SweepAxis { Sparsity, Demand, Availability, ServiceTime, Severity, ShiftFee };

SweepAxis axis_from_name(const std::string& name);
std::vector<double> default_grid(SweepAxis axis);

/// One CSV row per grid point, in grid order; failed points carry the error in-row
/// and the sweep continues. Each row is exactly reproducible by run_solve on the
/// corresponding spec.
std::string run_sweep(SweepAxis axis, const RunSpec& base, const std::vector<double>& grid,
                      bool parallel);

/// The spec used for one grid point (exposed so rows can be re-derived).
RunSpec spec_for_point(SweepAxis axis, const RunSpec& base, double value);

} // namespace esbilr

#endif
