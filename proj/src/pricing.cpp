#include "esbilr/pricing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "esbilr/compact.hpp"
#include "esbilr/milp.hpp"

namespace esbilr {

namespace {

bool dominates(const Label& a, const Label& b, bool time_indexed) {
    if (a.last_node != b.last_node) return false;
    if (!(a.rc < b.rc - 1e-12)) return false;
    if (time_indexed ? a.arrival != b.arrival : a.arrival > b.arrival) return false;
    if (a.soc >= b.soc - 1e-9) return true;
    return a.visited == b.visited; // rule (ii): same set ending at the same node
}

std::vector<double> split_discharge(double m, const std::vector<double>& weight,
                                    const EsbType& tp) {
    const int n = static_cast<int>(weight.size());
    bool uniform = true;
    for (int s = 1; s < n; ++s) uniform = uniform && weight[s] == weight[0];
    if (uniform) return std::vector<double>(n, m / n);
    // floors first, then headroom by descending weight, earliest slot on ties
    std::vector<double> g(n, tp.discharge_min);
    double left = m - n * tp.discharge_min;
    std::vector<int> order(n);
    for (int s = 0; s < n; ++s) order[s] = s;
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return weight[a] > weight[b]; });
    for (int s : order) {
        if (left <= 1e-12) break;
        double take = std::min(left, tp.usable() - g[s]);
        g[s] += take;
        left -= take;
    }
    return g;
}

struct SegmentRun {
    const Instance& inst;
    const SegmentQuery& q;
    bool time_dep;
    std::vector<Label> arena;
    std::vector<std::vector<int>> bucket;
    std::vector<int> completed;

    SegmentRun(const Instance& i, const SegmentQuery& qq)
        : inst(i), q(qq), time_dep(qq.duals->time_indexed_nonzero()) {
        bucket.resize(inst.network.n_nodes());
    }

    bool insert(Label&& lab) {
        auto& b = bucket[lab.last_node];
        if (q.prune) {
            for (int id : b)
                if (arena[id].alive && dominates(arena[id], lab, time_dep)) return false;
            for (int id : b)
                if (arena[id].alive && dominates(lab, arena[id], time_dep))
                    arena[id].alive = false;
        }
        arena.push_back(std::move(lab));
        b.push_back(static_cast<int>(arena.size()) - 1);
        return true;
    }

    void run() {
        const auto& net = inst.network;
        const auto& tp = inst.types[q.esb_type];
        const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
        const int k = q.esb_type;

        Label src;
        src.last_node = q.from_node;
        src.arrival = q.depart_slot;
        src.soc = tp.cap_max;
        arena.push_back(src); // the source stays out of the buckets: on depot-to-depot
                              // segments it would otherwise dominate every completion

        for (size_t head = 0; head < arena.size(); ++head) {
            if (!arena[head].alive) continue;
            const bool is_source = head == 0;
            if (!is_source && !net.is_shelter(arena[head].last_node))
                continue; // completed labels do not extend further
            const Label L = arena[head]; // value copy: extensions may grow the arena
            const int o = L.last_node;
            const int ready =
                is_source ? L.arrival : L.arrival + net.service_shelter[net.shelter_of(o)];

            // try completing into the destination
            if (!is_source) {
                int y = net.shelter_of(o);
                int a_dest = ready + inst.travel(k, o, q.to_node);
                double r_dest = inst.travel_kwh(k, o, q.to_node);
                bool ok = a_dest <= q.arrive_slot && L.soc - r_dest >= tp.cap_min - 1e-9;
                int guard = L.guard_max;
                if (net.is_station(q.to_node)) {
                    // entering a station one cannot leave in-horizon is forbidden
                    guard = std::max(guard,
                                     ready + inst.travel(k, o, q.to_node) +
                                         net.service_station[net.station_of(q.to_node)]);
                    ok = ok && guard < T2;
                }
                if (ok) {
                    Label done = L;
                    done.parent = static_cast<int>(head);
                    done.last_node = q.to_node;
                    done.arrival = a_dest;
                    done.soc = L.soc - r_dest;
                    done.guard_max = guard;
                    done.g.clear();
                    done.rc = L.rc + inst.energy_cost * r_dest;
                    if (q.to_node == net.depot())
                        done.rc += q.duals->endpoint_charge(k, y);
                    else
                        done.rc += q.duals->arc_charge(k, y, net.station_of(q.to_node));
                    if (insert(std::move(done)))
                        completed.push_back(static_cast<int>(arena.size()) - 1);
                }
            }

            if (!is_source && std::popcount(L.visited) >= q.max_shelters)
                continue;

            for (int y = 0; y < inst.n_shelters(); ++y) {
                if (!inst.compatible(k, y)) continue;
                if (L.visited & (1u << y)) continue;
                int node = net.shelter_node(y);
                if (node == o) continue;
                int arrive = ready + inst.travel(k, o, node);
                int si = net.service_shelter[y];
                if (arrive + si >= T2) continue;          // start-action boundary guard
                if (arrive + si > q.arrive_slot) continue; // can never reach the deadline
                double soc_arr = L.soc - inst.travel_kwh(k, o, node);
                double m_floor = si * tp.discharge_min;
                if (soc_arr < tp.cap_min - 1e-9) continue;
                if (soc_arr - m_floor < tp.cap_min - 1e-9) continue;

                double base = L.rc + inst.energy_cost * inst.travel_kwh(k, o, node);
                if (is_source) {
                    if (q.from_node == net.depot())
                        base += tp.invest_cost + q.duals->psi[k] + q.duals->endpoint_charge(k, y);
                    else
                        base += q.duals->arc_charge(k, y, net.station_of(q.from_node));
                }
                double charges = 0.0, wsum = 0.0;
                std::vector<double> weight(si);
                for (int s = 0; s < si; ++s) {
                    charges += q.duals->serve_charge(k, y, arrive + s - T1);
                    weight[s] = q.duals->discharge_credit(y, arrive + s - T1);
                    wsum += weight[s];
                }

                double reserve = inst.travel_kwh(k, node, q.to_node);
                double m_max = std::min(soc_arr - tp.cap_min - reserve,
                                        si * tp.usable());
                m_max = std::max(m_max, m_floor);
                double amounts[2] = {m_max, m_floor};
                int n_amounts = (wsum <= 1e-12 && m_floor < m_max - 1e-12) ? 2 : 1;

                for (int a = 0; a < n_amounts; ++a) {
                    Label nl;
                    nl.last_node = node;
                    nl.arrival = arrive;
                    nl.visited = L.visited | (1u << y);
                    nl.parent = static_cast<int>(head);
                    nl.guard_max = std::max(L.guard_max, arrive + si);
                    nl.g = split_discharge(amounts[a], weight, tp);
                    double credit = 0.0;
                    for (int s = 0; s < si; ++s) credit += weight[s] * nl.g[s];
                    nl.rc = base + charges - credit;
                    nl.soc = soc_arr - amounts[a];
                    insert(std::move(nl));
                }
            }
        }
    }

    SegmentPath reconstruct(int id) const {
        SegmentPath p;
        p.rc = arena[id].rc;
        p.arrival = arena[id].arrival;
        p.guard_max = arena[id].guard_max;
        p.src_node = q.from_node;
        p.dest_node = q.to_node;
        p.depart_slot = q.depart_slot;
        std::vector<int> chain;
        for (int cur = arena[id].parent; cur > 0; cur = arena[cur].parent) chain.push_back(cur);
        std::reverse(chain.begin(), chain.end());
        for (int cur : chain)
            p.visits.push_back({inst.network.shelter_of(arena[cur].last_node), arena[cur].g});
        return p;
    }
};

} // namespace

std::optional<Label> label_segment(const SegmentQuery& q, const Instance& inst) {
    if (!q.duals || !q.duals->shaped_for(inst)) return std::nullopt;
    SegmentRun run(inst, q);
    run.run();
    int best = -1;
    for (int id : run.completed) {
        if (!run.arena[id].alive) continue;
        if (best < 0 || run.arena[id].rc < run.arena[best].rc - 1e-12) best = id;
    }
    if (best < 0) return std::nullopt;
    return run.arena[best];
}

std::vector<SegmentPath> run_segment(const SegmentQuery& q, const Instance& inst) {
    SegmentRun run(inst, q);
    run.run();
    std::vector<SegmentPath> out;
    for (int id : run.completed)
        if (run.arena[id].alive) out.push_back(run.reconstruct(id));
    return out;
}

std::vector<Label> dominance_prune(std::vector<Label> labels, bool time_indexed) {
    const int n = static_cast<int>(labels.size());
    std::vector<char> dead(n, 0);
    for (int a = 0; a < n; ++a) {
        if (dead[a]) continue;
        for (int b = 0; b < n; ++b) {
            if (a == b || dead[b]) continue;
            if (dominates(labels[a], labels[b], time_indexed)) dead[b] = 1;
        }
    }
    std::vector<Label> out;
    for (int i = 0; i < n; ++i)
        if (!dead[i]) out.push_back(std::move(labels[i]));
    return out;
}

PricingResult price_exact(const Instance& inst, const DualPrices& duals, int type, int node_cap) {
    CompactModel m = build_pricing_model(inst, type, duals, false);
    // the DP route is feasible, so its value is a valid cutoff: pruning at
    // dp_rc + margin never cuts the true minimum
    PricingResult seed = price_dp(inst, duals, type);
    MilpOptions opt;
    opt.node_cap = node_cap;
    if (seed.best) opt.cutoff = seed.min_rc + 1e-6;
    MilpResult s = milp_solve(m.lp, m.is_int, opt);
    PricingResult out;
    if (!s.feasible) {
        if (!seed.best) return out; // no feasible route exists for this type
        out.min_rc = seed.min_rc;   // nothing beats the seed: it is the optimum
        out.best = seed.best;
        out.proven = s.proven;
        return out;
    }
    out.min_rc = s.objective;
    out.proven = s.proven;
    auto routes = extract_routes(s.x, m, inst);
    if (routes.size() == 1) out.best = routes[0];
    return out;
}

PricingResult price_dp(const Instance& inst, const DualPrices& duals, int type, DpTable* table_out,
                       int max_shelters, bool use_cache) {
    PricingResult out;
    out.proven = false; // heuristic engine
    if (!duals.shaped_for(inst)) return out;
    const auto& net = inst.network;
    const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
    const int n = inst.horizon.slot_count();
    const int J = inst.n_stations();
    const bool cache_ok = use_cache && !duals.time_indexed_nonzero();

    DpTable table;
    table.rc.assign(1 + J, std::vector<double>(n, kInf));
    for (int t = 0; t < n; ++t) table.rc[0][t] = 0.0;
    table.t_min.assign(J, 0);
    for (int j = 0; j < J; ++j) {
        int best = INT32_MAX;
        for (int i = 0; i < inst.n_shelters(); ++i)
            if (inst.compatible(type, i))
                best = std::min(best,
                                inst.travel(type, 0, net.shelter_node(i)) +
                                    net.service_shelter[i] +
                                    inst.travel(type, net.shelter_node(i), net.station_node(j)));
        table.t_min[j] = best == INT32_MAX ? n : best;
    }

    struct Pred {
        int src_slot = -1; // arrival slot at the source station; -1 for the depot
        SegmentPath seg;
    };
    std::vector<std::vector<Pred>> pred(1 + J, std::vector<Pred>(n));

    double best_rc = kInf;
    Pred best_final;

    // completed segments of one (source node, destination node) base run at T1;
    // with time-invariant duals they shift to any later departure
    std::map<std::pair<int, int>, std::vector<SegmentPath>> cache;

    auto segments_from = [&](int src_node, int dest_node,
                             int depart) -> std::vector<SegmentPath> {
        SegmentQuery q;
        q.from_node = src_node;
        q.to_node = dest_node;
        q.esb_type = type;
        q.duals = &duals;
        q.max_shelters = max_shelters;
        q.arrive_slot = T2;
        std::vector<SegmentPath> result;
        if (cache_ok) {
            auto key = std::make_pair(src_node, dest_node);
            auto it = cache.find(key);
            if (it == cache.end()) {
                q.depart_slot = T1;
                it = cache.emplace(key, run_segment(q, inst)).first;
            }
            int shift = depart - T1;
            for (const auto& p : it->second) {
                if (p.guard_max + shift >= T2) continue;
                if (p.arrival + shift > T2) continue;
                SegmentPath sp = p;
                sp.arrival += shift;
                sp.guard_max += shift;
                sp.depart_slot = depart;
                result.push_back(std::move(sp));
            }
        } else {
            q.depart_slot = depart;
            result = run_segment(q, inst);
        }
        return result;
    };

    auto relax = [&](int src_node, int src_slot, double src_rc, int depart) {
        for (int dest = 0; dest <= J; ++dest) {
            int dest_node = dest == 0 ? net.depot() : net.station_node(dest - 1);
            if (dest_node == src_node && src_node != net.depot()) continue; // no zero-length loops
            for (auto& seg : segments_from(src_node, dest_node, depart)) {
                double rc = src_rc + seg.rc;
                if (dest_node == net.depot()) {
                    if (rc < best_rc - 1e-12) {
                        best_rc = rc;
                        best_final = {src_slot, seg};
                    }
                } else {
                    int t = seg.arrival - T1;
                    if (t < 0 || t >= n) continue;
                    if (rc < table.rc[dest][t] - 1e-12) {
                        table.rc[dest][t] = rc;
                        pred[dest][t] = {src_slot, seg};
                    }
                }
            }
        }
    };

    for (int d = T1; d <= T2; ++d) relax(net.depot(), -1, 0.0, d);
    for (int t = 0; t < n; ++t)
        for (int j = 0; j < J; ++j) {
            if (table.rc[1 + j][t] == kInf) continue;
            int depart = T1 + t + net.service_station[j];
            if (depart > T2) continue;
            relax(net.station_node(j), T1 + t, table.rc[1 + j][t], depart);
        }

    if (table_out) *table_out = table;
    if (best_rc == kInf) return out;
    out.min_rc = best_rc;

    std::vector<SegmentPath> chain{best_final.seg};
    int node = best_final.seg.src_node;
    int slot = best_final.src_slot;
    while (node != net.depot()) {
        const Pred& p = pred[1 + net.station_of(node)][slot - T1];
        chain.push_back(p.seg);
        node = p.seg.src_node;
        slot = p.src_slot;
    }
    std::reverse(chain.begin(), chain.end());

    std::vector<VisitPlan> visits;
    std::vector<int> stations;
    for (size_t s = 0; s < chain.size(); ++s)
        for (size_t v = 0; v < chain[s].visits.size(); ++v) {
            if (!visits.empty())
                stations.push_back(v == 0 ? net.station_of(chain[s].src_node) : -1);
            visits.push_back(chain[s].visits[v]);
        }
    out.best = build_route(inst, type, chain.front().depart_slot, visits, stations);
    return out;
}

PriceAllResult price_all(const Instance& inst, const DualPrices& duals, PricingEngine engine,
                         bool parallel, double tolerance) {
    const int K = inst.n_types();
    PriceAllResult out;
    out.best_rc.assign(K, kInf);
    out.proven.assign(K, 1);
    std::vector<std::optional<Route>> routes(K);

    auto one = [&](int k) {
        PricingResult r = engine == PricingEngine::Exact ? price_exact(inst, duals, k)
                                                         : price_dp(inst, duals, k);
        out.best_rc[k] = r.min_rc;
        out.proven[k] = r.proven ? 1 : 0;
        routes[k] = r.best;
    };
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int k = 0; k < K; ++k) one(k);
    } else
#endif
    {
        (void)parallel;
        for (int k = 0; k < K; ++k) one(k);
    }
    for (int k = 0; k < K; ++k)
        if (routes[k] && out.best_rc[k] < -tolerance) out.columns.push_back(*routes[k]);
    return out;
}

} // namespace esbilr
