#ifndef ESBILR_BNP_HPP
#define ESBILR_BNP_HPP

#include <string>
#include <vector>

#include "esbilr/instance.hpp"
#include "esbilr/master.hpp"
#include "esbilr/pricing.hpp"

namespace esbilr {

struct BnPConfig {
    PricingEngine engine = PricingEngine::Exact;
    bool use_milp_master = true;   // AcBnP; false reproduces the plain variant
    int milp_master_first_at = 10; // nodes explored before the first MILP-MP solve
    int milp_master_every = 20;
    double heuristic_stall_fraction = 0.05;
    int heuristic_stall_nodes = 5;
    double gap_target = 0.01;
    double time_cap_seconds = 0.0; // 0 = unlimited
    int node_cap = 100000;
    int max_cg_iterations = 2000;
    bool shift = false;
    bool deterministic = true; // serial pricing; parallel mode matches its results
    std::string trace_path;           // per-node trace file when nonempty
    std::string rlmp_export_prefix;   // per-node RLMP LP-text dump when nonempty
};

struct BnPNode {
    int id = 0;
    int parent = -1;
    BranchBoundSet branches;
    double parent_bound = -kInf;
    double lp_bound = -kInf;
    std::string status = "open";
};

struct BnPResult {
    bool feasible = false;
    double objective = kInf;
    double bound = -kInf;
    double gap = kInf; // (objective - bound) / objective when objective > 0
    bool heuristic = false;
    std::string stop_reason;
    int nodes_explored = 0;
    int columns_generated = 0;
    std::vector<std::pair<Route, int>> plan; // (route, copies)
    std::vector<double> unmet;
    std::vector<std::vector<double>> shift_unmet;
    std::vector<int> fleet; // per type
    double invest_cost = 0.0, penalty_cost = 0.0, transport_cost = 0.0, shift_cost = 0.0;
    double runtime_seconds = 0.0;
    std::vector<BnPNode> tree; // processed nodes in exploration order
};

struct CgResult {
    bool feasible = true;
    double bound = -kInf; // valid Lagrangian bound for the exact engine
    double rlmp_objective = kInf;
    int iterations = 0;
    int columns_added = 0;
    MasterSolution last;
};

/// Column generation at one node: solve the RLMP, price, append, repeat until no
/// negative column (or the iteration cap, in which case the Lagrangian bound is
/// still reported).
CgResult cg_loop(const Instance& inst, ColumnPool& pool, const BranchBoundSet& branches,
                 const BnPConfig& cfg);

BnPResult solve_bnp(const Instance& inst, const BnPConfig& cfg);

enum class ReportFormat { Text, Csv, Json };

std::string report(const BnPResult& result, const Instance& inst, ReportFormat format);
std::string report_csv_header();

} // namespace esbilr

#endif
