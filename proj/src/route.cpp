#include "esbilr/route.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace esbilr {

DualPrices DualPrices::zeros(const Instance& inst) {
    DualPrices d;
    const int I = inst.n_shelters(), J = inst.n_stations(), K = inst.n_types();
    const int T = inst.horizon.slot_count();
    d.pi.assign(I, 0.0);
    d.psi.assign(K, 0.0);
    d.mu.assign(I, 0.0);
    d.mu_k.assign(K, std::vector<double>(I, 0.0));
    d.rho.assign(I, std::vector<double>(T, 0.0));
    d.rho_k.assign(K, std::vector<std::vector<double>>(I, std::vector<double>(T, 0.0)));
    d.eta.assign(I, std::vector<double>(J, 0.0));
    d.eta_k.assign(K, std::vector<std::vector<double>>(I, std::vector<double>(J, 0.0)));
    d.theta.assign(I, 0.0);
    d.theta_k.assign(K, std::vector<double>(I, 0.0));
    d.delta.assign(I, std::vector<double>(T, 0.0));
    return d;
}

bool DualPrices::shaped_for(const Instance& inst) const {
    const size_t I = inst.n_shelters(), J = inst.n_stations(), K = inst.n_types();
    const size_t T = inst.horizon.slot_count();
    if (pi.size() != I || psi.size() != K || mu.size() != I || theta.size() != I) return false;
    if (mu_k.size() != K || rho.size() != I || rho_k.size() != K || eta.size() != I ||
        eta_k.size() != K || theta_k.size() != K || delta.size() != I)
        return false;
    for (const auto& r : rho)
        if (r.size() != T) return false;
    for (const auto& r : delta)
        if (r.size() != T) return false;
    for (const auto& r : eta)
        if (r.size() != J) return false;
    return true;
}

bool DualPrices::time_indexed_nonzero() const {
    for (const auto& r : rho)
        for (double v : r)
            if (v != 0.0) return true;
    for (const auto& rk : rho_k)
        for (const auto& r : rk)
            for (double v : r)
                if (v != 0.0) return true;
    for (const auto& r : delta)
        for (double v : r)
            if (v != 0.0) return true;
    return false;
}

double Route::total_discharge(int shelter) const {
    double s = 0.0;
    for (const auto& e : discharge)
        if (e.shelter == shelter) s += e.kwh;
    return s;
}

double Route::total_discharge() const {
    double s = 0.0;
    for (const auto& e : discharge) s += e.kwh;
    return s;
}

std::string action_kind_name(ActionKind k) {
    switch (k) {
        case ActionKind::DepartDepot: return "u";
        case ActionKind::DepartShelter: return "x";
        case ActionKind::DepartStation: return "z";
        case ActionKind::ReturnDepot: return "r";
    }
    return "?";
}

Route build_route(const Instance& inst, int type, int start_slot,
                  const std::vector<VisitPlan>& visits, const std::vector<int>& stations) {
    if (visits.empty()) throw std::runtime_error("build_route: a route must visit a shelter");
    if (stations.size() + 1 != visits.size())
        throw std::runtime_error("build_route: stations must have one entry per leg");
    const auto& net = inst.network;
    const auto& t = inst.types[type];
    const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
    if (start_slot < T1) throw std::runtime_error("build_route: start before horizon");

    Route r;
    r.esb_type = type;
    double transport = 0.0;
    int cur = net.depot();
    int depart = start_slot;

    for (size_t v = 0; v < visits.size(); ++v) {
        int node = net.shelter_node(visits[v].shelter);
        int s_i = net.service_shelter[visits[v].shelter];
        if (static_cast<int>(visits[v].g.size()) != s_i)
            throw std::runtime_error("build_route: discharge vector must match service time");
        if (v == 0)
            r.actions.push_back({ActionKind::DepartDepot, cur, node, depart});
        else if (net.is_station(cur))
            r.actions.push_back({ActionKind::DepartStation, cur, node, depart});
        else
            r.actions.push_back({ActionKind::DepartShelter, cur, node, depart});
        transport += inst.travel_kwh(type, cur, node);
        int arrive = depart + inst.travel(type, cur, node);
        for (int s = 0; s < s_i; ++s)
            r.discharge.push_back({visits[v].shelter, arrive + s, visits[v].g[s]});
        depart = arrive + s_i;
        if (depart >= T2)
            throw std::runtime_error("build_route: visit would end at or after the last slot");
        cur = node;

        if (v + 1 < visits.size() && stations[v] >= 0) {
            int cs = net.station_node(stations[v]);
            r.actions.push_back({ActionKind::DepartShelter, cur, cs, depart});
            transport += inst.travel_kwh(type, cur, cs);
            int cs_arrive = depart + inst.travel(type, cur, cs);
            depart = cs_arrive + net.service_station[stations[v]];
            if (depart >= T2)
                throw std::runtime_error("build_route: recharge would end at or after the last slot");
            cur = cs;
        }
    }
    r.actions.push_back({ActionKind::ReturnDepot, cur, net.depot(), depart});
    transport += inst.travel_kwh(type, cur, net.depot());
    r.cost = t.invest_cost + inst.energy_cost * transport;

    std::sort(r.discharge.begin(), r.discharge.end(), [](const auto& a, const auto& b) {
        return std::tie(a.slot, a.shelter) < std::tie(b.slot, b.shelter);
    });

    // canonical SOC trace (SOC at the start of each slot): travel consumption is
    // booked at arrival, recharging completes at the station departure slot
    r.soc_trace.assign(inst.horizon.slot_count(), t.cap_max);
    double soc = t.cap_max;
    int cursor_slot = T1;
    auto fill_to = [&](int slot_excl, double value) {
        int stop = std::min(slot_excl, T2 + 1);
        for (int s = cursor_slot; s < stop; ++s) r.soc_trace[s - T1] = value;
        cursor_slot = std::max(cursor_slot, stop);
    };
    for (const auto& a : r.actions) {
        if (a.kind == ActionKind::ReturnDepot) {
            fill_to(a.slot + 1, soc);
            double depart_soc = soc;
            int home = a.slot + inst.travel(type, a.from, a.to);
            soc -= inst.travel_kwh(type, a.from, a.to);
            fill_to(home, depart_soc);
            fill_to(T2 + 1, soc);
            break;
        }
        fill_to(a.slot + 1, soc);
        int arrive = a.slot + inst.travel(type, a.from, a.to);
        fill_to(arrive, soc);
        soc -= inst.travel_kwh(type, a.from, a.to);
        if (net.is_station(a.to)) {
            int cs_dep = arrive + net.service_station[net.station_of(a.to)];
            fill_to(cs_dep, soc);
            soc = t.cap_max;
        } else {
            int shelter = net.shelter_of(a.to);
            int s_i = net.service_shelter[shelter];
            for (int s = 0; s < s_i; ++s) {
                fill_to(arrive + s + 1, soc);
                for (const auto& e : r.discharge)
                    if (e.shelter == shelter && e.slot == arrive + s) soc -= e.kwh;
            }
        }
    }
    return r;
}

namespace {

struct Walk {
    // replays the action chain; collects violations instead of throwing
    std::vector<std::string> errs;
    void err(std::string m) { errs.push_back(std::move(m)); }
};

} // namespace

std::vector<std::string> validate(const Route& route, const Instance& inst) {
    Walk w;
    const auto& net = inst.network;
    const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
    if (route.esb_type < 0 || route.esb_type >= inst.n_types()) {
        w.err("unknown ESB type");
        return w.errs;
    }
    const auto& t = inst.types[route.esb_type];
    if (route.actions.empty()) {
        w.err("empty action list");
        return w.errs;
    }
    if (route.actions.front().kind != ActionKind::DepartDepot)
        w.err("route must begin with a depot departure");
    if (route.actions.back().kind != ActionKind::ReturnDepot)
        w.err("route must end with a depot return");
    int n_u = 0, n_r = 0;
    for (const auto& a : route.actions) {
        n_u += a.kind == ActionKind::DepartDepot;
        n_r += a.kind == ActionKind::ReturnDepot;
        if (a.slot < T1 || a.slot > T2) w.err("action outside the horizon");
    }
    if (n_u != 1) w.err("route must depart the depot exactly once");
    if (n_r != 1) w.err("route must return to the depot exactly once");
    for (size_t i = 1; i < route.actions.size(); ++i)
        if (route.actions[i].slot <= route.actions[i - 1].slot)
            w.err("actions must be strictly ordered by slot");
    if (!w.errs.empty()) return w.errs;

    // replay the chain
    struct Window {
        int shelter, start, len;
    };
    std::vector<Window> windows;
    double soc = t.cap_max;
    int cur = net.depot();
    int expected_slot = route.actions.front().slot;
    const double tol = 1e-6;

    auto arrive_shelter = [&](int node, int slot) -> int {
        int shelter = net.shelter_of(node);
        if (!inst.compatible(route.esb_type, shelter)) w.err("incompatible shelter");
        int s_i = net.service_shelter[shelter];
        windows.push_back({shelter, slot, s_i});
        if (slot + s_i >= T2) w.err("service window must end before the last slot");
        if (slot < T1) w.err("service starts before the horizon");
        return slot + s_i;
    };

    for (size_t ai = 0; ai < route.actions.size(); ++ai) {
        const auto& a = route.actions[ai];
        if (a.from != cur) {
            w.err("action chain broken: wrong origin node");
            return w.errs;
        }
        if (a.slot != expected_slot) {
            w.err("action chain broken: idling is only allowed at the depot");
            return w.errs;
        }
        switch (a.kind) {
            case ActionKind::DepartDepot: {
                if (a.from != net.depot() || !net.is_shelter(a.to)) {
                    w.err("depot departure must target a shelter");
                    return w.errs;
                }
                soc = t.cap_max - inst.travel_kwh(route.esb_type, a.from, a.to);
                if (soc < t.cap_min - tol) w.err("SOC below minimum on the first leg");
                expected_slot = arrive_shelter(a.to, a.slot + inst.travel(route.esb_type, a.from, a.to));
                cur = a.to;
                break;
            }
            case ActionKind::DepartShelter: {
                if (!net.is_shelter(a.from) || a.to == a.from ||
                    (!net.is_shelter(a.to) && !net.is_station(a.to))) {
                    w.err("shelter departure must target another shelter or a station");
                    return w.errs;
                }
                soc -= inst.travel_kwh(route.esb_type, a.from, a.to);
                if (soc < t.cap_min - tol) w.err("SOC below minimum while traveling");
                int arrive = a.slot + inst.travel(route.esb_type, a.from, a.to);
                if (net.is_station(a.to)) {
                    int j = net.station_of(a.to);
                    expected_slot = arrive + net.service_station[j];
                    if (expected_slot >= T2) w.err("recharge must end before the last slot");
                    soc = t.cap_max; // full recharge at the station
                } else {
                    expected_slot = arrive_shelter(a.to, arrive);
                }
                cur = a.to;
                break;
            }
            case ActionKind::DepartStation: {
                if (!net.is_station(a.from) || !net.is_shelter(a.to)) {
                    w.err("station departure must target a shelter");
                    return w.errs;
                }
                soc -= inst.travel_kwh(route.esb_type, a.from, a.to);
                if (soc < t.cap_min - tol) w.err("SOC below minimum while traveling");
                expected_slot = arrive_shelter(a.to, a.slot + inst.travel(route.esb_type, a.from, a.to));
                cur = a.to;
                break;
            }
            case ActionKind::ReturnDepot: {
                if (!net.is_shelter(a.from) || a.to != net.depot()) {
                    w.err("depot return must depart a shelter");
                    return w.errs;
                }
                if (soc - inst.travel_kwh(route.esb_type, a.from, a.to) < t.cap_min - tol)
                    w.err("SOC below minimum on the return leg");
                cur = a.to;
                break;
            }
        }
        // apply discharges of the window just opened
        if (ai < route.actions.size() && !windows.empty() &&
            (a.kind == ActionKind::DepartDepot || a.kind == ActionKind::DepartStation ||
             (a.kind == ActionKind::DepartShelter && net.is_shelter(a.to)))) {
            const Window& win = windows.back();
            double got = 0.0;
            for (const auto& e : route.discharge)
                if (e.shelter == win.shelter && e.slot >= win.start && e.slot < win.start + win.len)
                    got += e.kwh;
            soc -= got;
            if (soc < t.cap_min - tol) w.err("SOC below minimum after discharging");
        }
    }

    // discharge schedule must sit exactly on the serving windows
    for (const auto& e : route.discharge) {
        bool inside = false;
        for (const auto& win : windows)
            if (e.shelter == win.shelter && e.slot >= win.start && e.slot < win.start + win.len)
                inside = true;
        if (!inside) w.err("discharge outside a serving window");
        if (e.kwh < t.discharge_min - tol) w.err("discharge below minimum");
        if (e.kwh > t.usable() + tol) w.err("discharge above the per-slot cap");
    }
    for (const auto& win : windows) {
        for (int s = 0; s < win.len; ++s) {
            int found = 0;
            for (const auto& e : route.discharge)
                if (e.shelter == win.shelter && e.slot == win.start + s) ++found;
            if (found != 1) w.err("every serving slot must discharge exactly once");
        }
    }
    if (windows.empty()) w.err("route must serve at least one shelter");

    // stored aggregates
    double transport = 0.0;
    for (const auto& a : route.actions) transport += inst.travel_kwh(route.esb_type, a.from, a.to);
    double want_cost = t.invest_cost + inst.energy_cost * transport;
    if (std::fabs(want_cost - route.cost) > 1e-6) w.err("stored cost mismatch");
    if (!route.soc_trace.empty()) {
        if (static_cast<int>(route.soc_trace.size()) != inst.horizon.slot_count()) {
            w.err("SOC trace length mismatch");
        } else {
            for (double v : route.soc_trace)
                if (v < t.cap_min - tol || v > t.cap_max + tol)
                    w.err("SOC trace outside [cap_min, cap_max]");
        }
    }
    return w.errs;
}

Coverage coverage(const Route& route, const Instance& inst) {
    Coverage c;
    const auto& net = inst.network;
    std::vector<double> gsum(inst.n_shelters(), 0.0);
    for (const auto& e : route.discharge) {
        gsum[e.shelter] += e.kwh;
        c.g_slot.push_back({e.shelter, e.slot, e.kwh});
        c.serve.push_back({e.shelter, e.slot});
    }
    for (int i = 0; i < inst.n_shelters(); ++i)
        if (gsum[i] != 0.0) c.g_sum.push_back({i, gsum[i]});

    std::vector<std::vector<int>> arc(inst.n_shelters(), std::vector<int>(inst.n_stations(), 0));
    std::vector<int> ends(inst.n_shelters(), 0);
    for (const auto& a : route.actions) {
        if (a.kind == ActionKind::DepartShelter && net.is_station(a.to))
            arc[net.shelter_of(a.from)][net.station_of(a.to)]++;
        else if (a.kind == ActionKind::DepartStation)
            arc[net.shelter_of(a.to)][net.station_of(a.from)]++;
        else if (a.kind == ActionKind::DepartDepot)
            ends[net.shelter_of(a.to)]++;
        else if (a.kind == ActionKind::ReturnDepot)
            ends[net.shelter_of(a.from)]++;
    }
    for (int i = 0; i < inst.n_shelters(); ++i) {
        for (int j = 0; j < inst.n_stations(); ++j)
            if (arc[i][j]) c.cs_arc.push_back({{i, j}, arc[i][j]});
        if (ends[i]) c.endpoints.push_back({i, ends[i]});
    }
    return c;
}

double reduced_cost(const Route& route, const DualPrices& duals, const Instance& inst) {
    if (!duals.shaped_for(inst))
        throw std::runtime_error("reduced_cost: dual snapshot does not match the instance");
    const int T1 = inst.horizon.first_slot;
    const int k = route.esb_type;
    double rc = route.cost + duals.psi[k];
    Coverage c = coverage(route, inst);
    for (auto [i, slot] : c.serve) rc += duals.serve_charge(k, i, slot - T1);
    for (auto [key, count] : c.cs_arc) rc += count * duals.arc_charge(k, key.first, key.second);
    for (auto [i, count] : c.endpoints) rc += count * duals.endpoint_charge(k, i);
    for (auto [i, slot, kwh] : c.g_slot) rc -= duals.discharge_credit(i, slot - T1) * kwh;
    return rc;
}

bool route_less(const Route& a, const Route& b) {
    if (a.esb_type != b.esb_type) return a.esb_type < b.esb_type;
    if (a.actions.size() != b.actions.size()) return a.actions.size() < b.actions.size();
    for (size_t i = 0; i < a.actions.size(); ++i) {
        const auto &x = a.actions[i], &y = b.actions[i];
        auto tx = std::make_tuple(x.slot, static_cast<int>(x.kind), x.from, x.to);
        auto ty = std::make_tuple(y.slot, static_cast<int>(y.kind), y.from, y.to);
        if (tx != ty) return tx < ty;
    }
    if (a.discharge.size() != b.discharge.size()) return a.discharge.size() < b.discharge.size();
    for (size_t i = 0; i < a.discharge.size(); ++i) {
        const auto &x = a.discharge[i], &y = b.discharge[i];
        auto tx = std::make_tuple(x.slot, x.shelter, x.kwh);
        auto ty = std::make_tuple(y.slot, y.shelter, y.kwh);
        if (tx != ty) return tx < ty;
    }
    return false;
}

bool route_equal(const Route& a, const Route& b) { return !route_less(a, b) && !route_less(b, a); }

} // namespace esbilr
