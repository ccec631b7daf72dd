#ifndef ESBILR_PRICING_HPP
#define ESBILR_PRICING_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "esbilr/duals.hpp"
#include "esbilr/lp.hpp"
#include "esbilr/instance.hpp"
#include "esbilr/route.hpp"

namespace esbilr {

/// Partial-route state between two stations. `arrival` is the arrival slot at
/// last_node; for the source label it is the departure slot instead.
struct Label {
    int last_node = 0;
    int arrival = 0;
    double soc = 0.0;
    double rc = 0.0;
    uint32_t visited = 0; // shelter set
    int parent = -1;      // arena link for path reconstruction
    std::vector<double> g; // discharge at last_node, one entry per service slot
    int guard_max = 0;     // largest "must end before T2" event along the path
    bool alive = true;
};

struct SegmentQuery {
    int from_node = 0; // station node id or depot (0)
    int to_node = 0;
    int depart_slot = 0;  // t'
    int arrive_slot = 0;  // t: arrival deadline at to_node
    int esb_type = 0;
    const DualPrices* duals = nullptr;
    int max_shelters = 4; // documented cap on shelters per segment
    bool prune = true;    // dominance on/off (tests compare both)
};

/// Shelter visits of a completed segment, reconstructed from the label chain.
struct SegmentPath {
    std::vector<VisitPlan> visits;
    double rc = 0.0;
    int arrival = 0;   // at the segment destination
    int guard_max = 0; // see Label
    int src_node = 0;
    int dest_node = 0;
    int depart_slot = 0;
};

/// Best feasible shelter-visiting path from (from, t') arriving at `to` by the
/// deadline; nullopt when no feasible path exists.
std::optional<Label> label_segment(const SegmentQuery& q, const Instance& inst);

/// All undominated completed segments (one per distinct content), for the DP layer.
std::vector<SegmentPath> run_segment(const SegmentQuery& q, const Instance& inst);

/// Prop. 3 dominance filter over labels of one query. time_indexed tightens the
/// timing condition to equality (time-shifted charges are not comparable).
std::vector<Label> dominance_prune(std::vector<Label> labels, bool time_indexed);

struct DpTable {
    std::vector<std::vector<double>> rc; // [0=depot, 1+j=station][slot], +inf unreachable
    std::vector<int> t_min;              // earliest feasible arrival per station
};

struct PricingResult {
    double min_rc = kInf;        // over all routes (the empty plan excluded)
    std::optional<Route> best;   // argmin route, whenever any route exists
    bool proven = true;          // exact engine: optimality proven
};

/// Exact single-type pricing (model 34) through the compact machinery.
PricingResult price_exact(const Instance& inst, const DualPrices& duals, int type,
                          int node_cap = 500000);

/// Labeling-integrated DP pricing: heuristic, feasible by construction.
PricingResult price_dp(const Instance& inst, const DualPrices& duals, int type,
                       DpTable* table_out = nullptr, int max_shelters = 4,
                       bool use_cache = true);

enum class PricingEngine { Exact, Dp };

struct PriceAllResult {
    std::vector<Route> columns;          // negative-rc columns, ordered by type id
    std::vector<double> best_rc;         // per type; +inf when no route exists
    std::vector<char> proven;            // per type
};

/// Runs the chosen engine per type (concurrently unless deterministic), merging
/// results by type id. Only columns with rc < -tolerance are returned.
PriceAllResult price_all(const Instance& inst, const DualPrices& duals, PricingEngine engine,
                         bool parallel, double tolerance = 1e-6);

} // namespace esbilr

#endif
