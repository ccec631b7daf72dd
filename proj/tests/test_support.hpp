#ifndef ESBILR_TEST_SUPPORT_HPP
#define ESBILR_TEST_SUPPORT_HPP

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "esbilr/duals.hpp"
#include "esbilr/instance.hpp"
#include "esbilr/lp.hpp"
#include "esbilr/route.hpp"

namespace esbilr::testsup {

struct TinySpec {
    int shelters = 1;
    int stations = 1;
    int slots = 8;
    std::vector<int> available = {1, 1, 1};
    int depot_travel = 1;       // depot <-> every shelter
    int station_travel = 1;     // every shelter <-> every station
    int inter_shelter_travel = 1;
    std::vector<int> service_shelter = {}; // default all 1
    int service_station = 1;
    double penalty = 1000.0;
    double energy_cost = 0.25;
    std::vector<std::vector<double>> demand; // defaults to zero
};

inline Instance make_tiny(const TinySpec& s) {
    Instance inst;
    inst.horizon = {15.0, 0, s.slots - 1};
    inst.types = {{1, 250000, 100, 10, 10, 38.19, s.available[0]},
                  {2, 350000, 300, 30, 30, 53.46, s.available[1]},
                  {3, 450000, 500, 50, 50, 76.38, s.available[2]}};
    inst.network.n_shelters = s.shelters;
    inst.network.n_stations = s.stations;
    int nn = inst.network.n_nodes();
    std::vector<std::vector<int>> tt(nn, std::vector<int>(nn, 0));
    for (int i = 0; i < s.shelters; ++i) {
        tt[0][1 + i] = tt[1 + i][0] = s.depot_travel;
        for (int i2 = i + 1; i2 < s.shelters; ++i2)
            tt[1 + i][1 + i2] = tt[1 + i2][1 + i] = s.inter_shelter_travel;
        for (int j = 0; j < s.stations; ++j)
            tt[1 + i][1 + s.shelters + j] = tt[1 + s.shelters + j][1 + i] = s.station_travel;
    }
    inst.network.travel_slots.assign(3, tt);
    inst.network.service_shelter =
        s.service_shelter.empty() ? std::vector<int>(s.shelters, 1) : s.service_shelter;
    inst.network.service_station.assign(s.stations, s.service_station);
    inst.network.travel_energy.assign(3, {});
    for (int k = 0; k < 3; ++k) {
        auto& e = inst.network.travel_energy[k];
        e.assign(nn, std::vector<double>(nn, 0.0));
        for (int a = 0; a < nn; ++a)
            for (int b = 0; b < nn; ++b)
                e[a][b] = inst.types[k].consumption_rate * tt[a][b] * 0.25;
    }
    inst.demands.demand = s.demand.empty()
                              ? std::vector<std::vector<double>>(
                                    s.shelters, std::vector<double>(s.slots, 0.0))
                              : s.demand;
    inst.demands.penalty.assign(s.shelters, s.penalty);
    inst.compat.im.assign(3, std::vector<int>(s.shelters, 1));
    inst.energy_cost = s.energy_cost;
    inst.big_m1 = 1000.0;
    inst.big_m2 = std::max(1.0, 2.0 * inst.demands.total());
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// Independent route oracle: exhaustive structure enumeration plus an exact
// chain-greedy discharge optimizer. Used to certify pricing and the compact
// search; deliberately shares no code with the labeling/DP/MILP paths.
// ---------------------------------------------------------------------------

struct Structure {
    int type = 0;
    int start = 0;
    std::vector<int> shelters;
    std::vector<int> stations; // size shelters-1; -1 = direct leg
};

inline void enumerate_structures_rec(const Instance& inst, int k, Structure& cur, double soc_min,
                                     int depart_slot, std::vector<Structure>& out,
                                     size_t max_count) {
    if (out.size() >= max_count) throw std::runtime_error("structure enumeration overflow");
    const auto& net = inst.network;
    const auto& tp = inst.types[k];
    const int T2 = inst.horizon.last_slot;
    int cur_sh = cur.shelters.back();
    int cur_node = net.shelter_node(cur_sh);

    // closing the route is feasible iff the return leg keeps SOC above the floor
    if (soc_min - inst.travel_kwh(k, cur_node, 0) >= tp.cap_min - 1e-9) out.push_back(cur);

    // direct extension to another shelter
    for (int i2 = 0; i2 < inst.n_shelters(); ++i2) {
        if (i2 == cur_sh || !inst.compatible(k, i2)) continue;
        int node2 = net.shelter_node(i2);
        int arrive = depart_slot + inst.travel(k, cur_node, node2);
        int s2 = net.service_shelter[i2];
        if (arrive + s2 >= T2) continue;
        double soc2 = soc_min - inst.travel_kwh(k, cur_node, node2);
        if (soc2 < tp.cap_min - 1e-9) continue;
        double after = soc2 - s2 * tp.discharge_min;
        if (after < tp.cap_min - 1e-9) continue;
        cur.shelters.push_back(i2);
        cur.stations.push_back(-1);
        enumerate_structures_rec(inst, k, cur, after, arrive + s2, out, max_count);
        cur.shelters.pop_back();
        cur.stations.pop_back();
    }
    // extension through a recharge
    for (int j = 0; j < inst.n_stations(); ++j) {
        int cs = net.station_node(j);
        if (soc_min - inst.travel_kwh(k, cur_node, cs) < tp.cap_min - 1e-9) continue;
        int cs_depart = depart_slot + inst.travel(k, cur_node, cs) + net.service_station[j];
        if (cs_depart >= T2) continue;
        for (int i2 = 0; i2 < inst.n_shelters(); ++i2) {
            if (!inst.compatible(k, i2)) continue;
            int node2 = net.shelter_node(i2);
            int arrive = cs_depart + inst.travel(k, cs, node2);
            int s2 = net.service_shelter[i2];
            if (arrive + s2 >= T2) continue;
            double soc2 = tp.cap_max - inst.travel_kwh(k, cs, node2);
            if (soc2 < tp.cap_min - 1e-9) continue;
            double after = soc2 - s2 * tp.discharge_min;
            if (after < tp.cap_min - 1e-9) continue;
            cur.shelters.push_back(i2);
            cur.stations.push_back(j);
            enumerate_structures_rec(inst, k, cur, after, arrive + s2, out, max_count);
            cur.shelters.pop_back();
            cur.stations.pop_back();
        }
    }
}

inline std::vector<Structure> enumerate_structures(const Instance& inst, int k,
                                                   size_t max_count = 2000000) {
    std::vector<Structure> out;
    const auto& net = inst.network;
    const auto& tp = inst.types[k];
    const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
    for (int t0 = T1; t0 <= T2; ++t0) {
        for (int i = 0; i < inst.n_shelters(); ++i) {
            if (!inst.compatible(k, i)) continue;
            int node = net.shelter_node(i);
            int arrive = t0 + inst.travel(k, 0, node);
            int si = net.service_shelter[i];
            if (arrive + si >= T2) continue;
            double soc = tp.cap_max - inst.travel_kwh(k, 0, node);
            if (soc < tp.cap_min - 1e-9) continue;
            double after = soc - si * tp.discharge_min;
            if (after < tp.cap_min - 1e-9) continue;
            Structure cur;
            cur.type = k;
            cur.start = t0;
            cur.shelters = {i};
            enumerate_structures_rec(inst, k, cur, after, arrive + si, out, max_count);
        }
    }
    return out;
}

/// Arrival slot of every visit in a structure.
inline std::vector<int> structure_arrivals(const Instance& inst, const Structure& st) {
    const auto& net = inst.network;
    std::vector<int> arr;
    int cur = 0;
    int depart = st.start;
    for (size_t v = 0; v < st.shelters.size(); ++v) {
        int node = net.shelter_node(st.shelters[v]);
        int a = depart + inst.travel(st.type, cur, node);
        arr.push_back(a);
        depart = a + net.service_shelter[st.shelters[v]];
        cur = node;
        if (v + 1 < st.shelters.size() && st.stations[v] >= 0) {
            int cs = net.station_node(st.stations[v]);
            depart = depart + inst.travel(st.type, cur, cs) + net.service_station[st.stations[v]];
            cur = cs;
        }
    }
    return arr;
}

/// Exact discharge optimizer for a fixed structure: maximizes sum(weight * g)
/// subject to per-slot boxes [G_min, cap_max - cap_min] and the nested prefix
/// budgets induced by the SOC floor within each station-to-station segment.
/// Weights must be nonnegative. Empty result = structure infeasible.
inline std::vector<std::vector<double>> optimize_discharge(
    const Instance& inst, const Structure& st,
    const std::vector<std::vector<double>>& weights /* [visit][service slot] */) {
    const auto& net = inst.network;
    const auto& tp = inst.types[st.type];
    const int V = static_cast<int>(st.shelters.size());

    std::vector<std::vector<double>> g(V);
    for (int v = 0; v < V; ++v)
        g[v].assign(net.service_shelter[st.shelters[v]], tp.discharge_min);

    int seg_begin = 0;
    while (seg_begin < V) {
        int seg_end = seg_begin; // inclusive; extend over direct legs
        while (seg_end + 1 < V && st.stations[seg_end] < 0) ++seg_end;

        // prefix budgets P_v for visits in [seg_begin, seg_end]
        std::vector<double> remaining;
        {
            double travel_acc =
                inst.travel_kwh(st.type, seg_begin == 0 ? 0 : net.station_node(st.stations[seg_begin - 1]),
                                net.shelter_node(st.shelters[seg_begin]));
            double used_floor = 0.0;
            for (int v = seg_begin; v <= seg_end; ++v) {
                int node = net.shelter_node(st.shelters[v]);
                int next_node = v < seg_end ? net.shelter_node(st.shelters[v + 1])
                                : v + 1 < V ? net.station_node(st.stations[v])
                                            : 0;
                double r_next = inst.travel_kwh(st.type, node, next_node);
                double p = tp.cap_max - travel_acc - r_next - tp.cap_min;
                used_floor += tp.discharge_min * net.service_shelter[st.shelters[v]];
                if (p < used_floor - 1e-9) return {}; // floors alone overrun the budget
                remaining.push_back(p - used_floor);
                travel_acc += r_next;
            }
        }

        // greedy waterfill over the segment's serving slots, heaviest weight first
        struct Slot {
            int visit_rel; // index into remaining
            int visit;
            int s;
            double w;
        };
        std::vector<Slot> slots;
        for (int v = seg_begin; v <= seg_end; ++v)
            for (int s = 0; s < static_cast<int>(g[v].size()); ++s)
                slots.push_back({v - seg_begin, v, s, weights[v][s]});
        std::stable_sort(slots.begin(), slots.end(),
                         [](const Slot& a, const Slot& b) { return a.w > b.w; });
        for (const auto& sl : slots) {
            if (sl.w <= 0) continue;
            double headroom = tp.usable() - g[sl.visit][sl.s];
            double cap = headroom;
            for (size_t v = sl.visit_rel; v < remaining.size(); ++v)
                cap = std::min(cap, remaining[v]);
            if (cap <= 1e-12) continue;
            g[sl.visit][sl.s] += cap;
            for (size_t v = sl.visit_rel; v < remaining.size(); ++v) remaining[v] -= cap;
        }
        seg_begin = seg_end + 1;
    }
    return g;
}

inline Route structure_route(const Instance& inst, const Structure& st,
                             const std::vector<std::vector<double>>& g) {
    std::vector<VisitPlan> visits;
    for (size_t v = 0; v < st.shelters.size(); ++v) visits.push_back({st.shelters[v], g[v]});
    return build_route(inst, st.type, st.start, visits, st.stations);
}

/// Minimum reduced cost over every feasible route of type k, by exhaustive
/// enumeration; also reports the argmin route when requested.
inline double brute_force_min_rc(const Instance& inst, int k, const DualPrices& duals,
                                 Route* best_route = nullptr) {
    auto structures = enumerate_structures(inst, k);
    double best = kInf;
    const int T1 = inst.horizon.first_slot;
    for (const auto& st : structures) {
        auto arr = structure_arrivals(inst, st);
        std::vector<std::vector<double>> weights(st.shelters.size());
        for (size_t v = 0; v < st.shelters.size(); ++v) {
            int si = inst.network.service_shelter[st.shelters[v]];
            for (int s = 0; s < si; ++s)
                weights[v].push_back(duals.discharge_credit(st.shelters[v], arr[v] + s - T1));
        }
        auto g = optimize_discharge(inst, st, weights);
        if (g.empty()) continue;
        Route r = structure_route(inst, st, g);
        double rc = reduced_cost(r, duals, inst);
        if (rc < best - 1e-12) {
            best = rc;
            if (best_route) *best_route = r;
        }
    }
    return best;
}

} // namespace esbilr::testsup

#endif
