#ifndef ESBILR_COMPACT_HPP
#define ESBILR_COMPACT_HPP

#include <array>
#include <string>
#include <vector>

#include "esbilr/duals.hpp"
#include "esbilr/instance.hpp"
#include "esbilr/milp.hpp"
#include "esbilr/route.hpp"

namespace esbilr {

/// Constraint families of the compact model, one tag per emitted row. Time-boundary
/// variants are realized as variable fixings (the variable is simply not
/// materialized), so they never appear here.
enum class RowFamily {
    Load,              // aggregated demand coverage per shelter
    DepartOnce,        // each bus departs the depot at most once
    OneState,          // at most one active state per slot, after departure
    FollowU,           // departure from the first shelter is forced
    FollowXCs,         // station arrival forces the later station departure
    FollowXSh,         // shelter-to-shelter arrival forces the later departure
    XWindow,           // no other departures around a shelter departure (big-M)
    ZPred,             // a station departure needs a prior arrival at that station
    FollowZ,           // station-fed visit forces the later departure
    ZWindow,           // no other departures around a station departure (big-M)
    WBeforeX,          // serving precedes a shelter departure
    WNotAfterX,        // no serving while traveling after departure
    WTravelZ,          // no serving while traveling from a station
    WServeZ,           // station-fed visit serves its window
    WBeforeU,          // no serving before the depot leg arrives
    WServeU,           // depot-fed visit serves its window
    OneShelter,        // a bus serves at most one shelter per slot
    DepartAfterServe,  // serving forces a departure within the service window
    ArriveBeforeServe, // end-of-horizon variant: serving needs a recent arrival
    ReturnLeDepart,    // cumulative returns never exceed departures
    ReturnAfterDepart, // a dispatched bus returns strictly later
    EndAfterReturn,    // nothing after the depot return (big-M)
    ServeBeforeReturn, // serving precedes the depot return
    SocU,              // SOC at arrival from the depot (sandwich)
    SocX,              // SOC propagation over shelter departures (sandwich)
    SocZ,              // SOC at arrival from a station (sandwich)
    SocDepartX,        // discharge accounting at a shelter departure (sandwich)
    SocDepartR,        // discharge accounting at a depot return (sandwich)
    SocReturn,         // enough SOC to reach the depot
    GLink,             // discharge is positive exactly on serving slots
    Symmetry,          // symmetry-breaking valid inequalities
    Shift,             // per-slot residual rows (demand shifting)
    ForceRoute,        // pricing only: exactly one departure
};

std::string row_family_name(RowFamily f);

struct RowTag {
    RowFamily fam;
    std::array<int, 4> idx; // bus/type, shelter/station, node, slot as applicable
};

/// Index maps for the compact variables. A value of -1 means the variable is fixed
/// to zero by a boundary rule or compatibility and was not materialized.
struct VariableCatalog {
    int n_buses = 0, n_shelters = 0, n_stations = 0, n_nodes = 0, n_slots = 0;
    std::vector<int> bus_type; // bus -> type index

    std::vector<int> u, w, r, g;   // [bus][shelter][slot]
    std::vector<int> x;            // [bus][shelter][node][slot]
    std::vector<int> z;            // [bus][station][shelter][slot]
    std::vector<int> soc;          // [bus][slot]
    std::vector<int> l;            // [shelter] (unmet demand; compact only)
    std::vector<int> l_shift;      // [shelter][slot] (shift mode)

    int iu(int h, int i, int t) const { return u[(h * n_shelters + i) * n_slots + t]; }
    int iw(int h, int i, int t) const { return w[(h * n_shelters + i) * n_slots + t]; }
    int ir(int h, int i, int t) const { return r[(h * n_shelters + i) * n_slots + t]; }
    int ig(int h, int i, int t) const { return g[(h * n_shelters + i) * n_slots + t]; }
    int ix(int h, int i, int q, int t) const {
        return x[((h * n_shelters + i) * n_nodes + q) * n_slots + t];
    }
    int iz(int h, int j, int i, int t) const {
        return z[((h * n_stations + j) * n_shelters + i) * n_slots + t];
    }
    int isoc(int h, int t) const { return soc[h * n_slots + t]; }
    int il(int i) const { return l[i]; }
    int ilshift(int i, int t) const { return l_shift[i * n_slots + t]; }
};

struct CompactModel {
    LinearProgram lp;
    std::vector<char> is_int;
    VariableCatalog cat;
    std::vector<RowTag> tags;

    int rows_in_family(RowFamily f) const;
    void name_everything(); // fills lp row/col names from the catalog and tags
};

struct CompactOptions {
    bool symmetry_breaking = false;
    bool with_shift = false;
    int var_cap = 400000;
    bool with_names = false;
};

/// Objective (1), constraints (2)-(29) and optionally the (31) inequalities / the
/// demand-shifting extension, over the explicit per-bus fleet of the instance.
CompactModel build_compact(const Instance& inst, const CompactOptions& opt = {});

/// Exact pricing subproblem for one bus of type k (model 34): the compact routing
/// and energy rules with the dual-adjusted objective and a forced departure.
CompactModel build_pricing_model(const Instance& inst, int type, const DualPrices& duals,
                                 bool shift);

struct MilpSolution {
    MilpResult milp;
    double objective = 0.0;
    double bound = 0.0;
    bool proven = false;
    std::vector<double> x;
};

MilpSolution solve_compact(const CompactModel& model, double gap = 0.0, int node_cap = 500000);

/// One Route per bus with a depot departure in an integral solution.
std::vector<Route> extract_routes(const std::vector<double>& x, const CompactModel& model,
                                  const Instance& inst);

void export_lp(const CompactModel& model, const std::string& path);

} // namespace esbilr

#endif
