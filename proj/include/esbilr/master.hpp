#ifndef ESBILR_MASTER_HPP
#define ESBILR_MASTER_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "esbilr/duals.hpp"
#include "esbilr/instance.hpp"
#include "esbilr/lp.hpp"
#include "esbilr/route.hpp"

namespace esbilr {

/// Deduplicated column pool with stable indices; per-type views for the P_k sets.
class ColumnPool {
public:
    explicit ColumnPool(const Instance& inst);

    /// Returns the column index; structurally equal routes collapse onto one entry.
    /// Throws if the route does not validate for the instance.
    int add(Route r);
    bool contains(const Route& r) const;

    const Route& route(int p) const { return routes_[p]; }
    int size() const { return static_cast<int>(routes_.size()); }
    const std::vector<int>& of_type(int k) const { return by_type_[k]; }
    const Instance& instance() const { return inst_; }

private:
    struct Cmp {
        const std::vector<Route>* routes;
        bool operator()(int a, int b) const { return route_less((*routes)[a], (*routes)[b]); }
    };
    const Instance& inst_;
    std::vector<Route> routes_;
    std::vector<std::vector<int>> by_type_;
    std::set<int, Cmp> index_;
};

/// Branchable aggregate families, in the paper's hierarchy order.
enum class AggFamily { NEb, Fi, Dit, Bik, Mitk, Vij, Wijk, Ai, Eik, Lambda };

std::string agg_family_name(AggFamily f);

struct BranchBound {
    AggFamily family;
    int k = -1, i = -1, j = -1, t = -1; // whichever apply
    int column = -1;                    // Lambda only
    bool upper = false;                 // true: agg <= rhs, false: agg >= rhs
    int rhs = 0;

    std::string text() const;
};

struct BranchBoundSet {
    std::vector<BranchBound> bounds;
    bool empty() const { return bounds.empty(); }
};

struct MasterSolution {
    bool feasible = false;
    double objective = 0.0;
    std::vector<double> lambda;
    std::vector<double> unmet;                     // l_i
    std::vector<std::vector<double>> shift_unmet;  // l'_{i,t}, shift mode only
    DualPrices duals;
    double dual_objective = 0.0;
};

/// LP optimum of the restricted master (33) over the pooled columns with the given
/// branching bounds; duals populated for every active family, zeros elsewhere.
MasterSolution solve_rlmp(const ColumnPool& pool, const Instance& inst,
                          const BranchBoundSet& branches, bool shift);

struct IntegerMasterResult {
    bool feasible = false;
    bool proven = false;
    double objective = 0.0;
    double bound = 0.0;
    std::vector<double> lambda; // integer values
    std::vector<double> unmet;
    std::vector<std::vector<double>> shift_unmet;
};

/// The MILP-MP (model 47): integer-lambda master over the pool, fleet caps included.
IntegerMasterResult solve_milp_master(const ColumnPool& pool, const Instance& inst, bool shift,
                                      int node_cap = 200000);

struct BranchDecision {
    bool integral = true;
    BranchBound down; // <= floor
    BranchBound up;   // >= ceil
    double value = 0.0;
};

/// First fractional aggregate in the hierarchy n_EB -> {f, d, b, m} -> {v, w, a, e}
/// -> lambda; lowest index within a family, most-fractional across families of the
/// same rank.
BranchDecision pick_branch(const MasterSolution& sol, const ColumnPool& pool,
                           const Instance& inst);

/// One single-visit round-trip column per (compatible shelter, type), discharging
/// min(per-visit budget, remaining demand), floored at the per-window minimum.
std::vector<Route> initial_columns(const Instance& inst);

/// Writes the node RLMP in LP-text form (debugging hook, flag-gated by callers).
void export_rlmp(const ColumnPool& pool, const Instance& inst, const BranchBoundSet& branches,
                 bool shift, const std::string& path);

/// Aggregate value of a family member under the given lambda (used for audits and
/// branching alike).
double aggregate_value(AggFamily f, int k, int i, int j, int t, const ColumnPool& pool,
                       const Instance& inst, const std::vector<double>& lambda);

} // namespace esbilr

#endif
