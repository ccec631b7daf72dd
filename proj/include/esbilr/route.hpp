#ifndef ESBILR_ROUTE_HPP
#define ESBILR_ROUTE_HPP

#include <string>
#include <tuple>
#include <vector>

#include "esbilr/duals.hpp"
#include "esbilr/instance.hpp"

namespace esbilr {

enum class ActionKind { DepartDepot, DepartShelter, DepartStation, ReturnDepot };

struct RouteAction {
    ActionKind kind;
    int from; // node id
    int to;   // node id
    int slot; // departure slot
};

struct DischargeEntry {
    int shelter;
    int slot;
    double kwh;
};

/// One ESB's complete timed itinerary plus discharge schedule. Immutable value;
/// actions are ordered by slot.
struct Route {
    int esb_type = 0; // type index (0-based)
    std::vector<RouteAction> actions;
    std::vector<DischargeEntry> discharge; // sorted by (slot, shelter)
    std::vector<double> soc_trace;         // SOC at the start of each slot, kWh
    double cost = 0.0;                     // C_inv^k + C_fx * traversed arc energies

    double total_discharge(int shelter) const;
    double total_discharge() const;
    int start_slot() const { return actions.front().slot; }
    int end_slot() const { return actions.back().slot; }
};

/// Sparse master-row coefficients of a single route (coefficient per unit lambda).
struct Coverage {
    std::vector<std::pair<int, double>> g_sum;               // (shelter, kWh)
    std::vector<std::tuple<int, int, double>> g_slot;        // (shelter, slot, kWh)
    std::vector<std::pair<int, int>> serve;                  // (shelter, slot), W = 1
    std::vector<std::pair<std::pair<int, int>, int>> cs_arc; // ((shelter, station), X+Z count)
    std::vector<std::pair<int, int>> endpoints;              // (shelter, U+R count)
};

/// One shelter visit: per-service-slot discharge amounts (size = S_i).
struct VisitPlan {
    int shelter;
    std::vector<double> g;
};

/// Deterministic route assembly from a visit sequence. stations[v] is the CS index
/// taken between visit v and v+1, or -1 for a direct shelter-to-shelter leg.
/// Throws std::runtime_error on a timing/structure error; SOC violations are left
/// to validate().
Route build_route(const Instance& inst, int type, int start_slot,
                  const std::vector<VisitPlan>& visits, const std::vector<int>& stations);

/// Empty result iff the route satisfies every timing, SOC, compatibility and
/// boundary rule; entries name the violated rule.
std::vector<std::string> validate(const Route& route, const Instance& inst);

Coverage coverage(const Route& route, const Instance& inst);

double reduced_cost(const Route& route, const DualPrices& duals, const Instance& inst);

/// Structural total order used for pool deduplication.
bool route_less(const Route& a, const Route& b);
bool route_equal(const Route& a, const Route& b);

std::string action_kind_name(ActionKind k);

} // namespace esbilr

#endif
