#include "esbilr/bnp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace esbilr {

namespace {

constexpr double kRcTol = 1e-6;

void perturb_zero_duals(DualPrices& d) {
    bool flip = false;
    auto bump = [&](double& v) {
        if (v == 0.0) v = flip ? -1e-9 : 1e-9;
        flip = !flip;
    };
    for (auto& v : d.pi) bump(v);
    for (auto& v : d.mu) bump(v);
    for (auto& r : d.rho)
        for (auto& v : r) bump(v);
    for (auto& r : d.eta)
        for (auto& v : r) bump(v);
    for (auto& v : d.theta) bump(v);
}

struct Incumbent {
    bool valid = false;
    double objective = kInf;
    std::vector<double> lambda;
    std::vector<double> unmet;
    std::vector<std::vector<double>> shift_unmet;
};

} // namespace

CgResult cg_loop(const Instance& inst, ColumnPool& pool, const BranchBoundSet& branches,
                 const BnPConfig& cfg) {
    CgResult out;
    double prev_obj = kInf;
    int stall = 0;
    for (int iter = 0; iter < cfg.max_cg_iterations; ++iter) {
        MasterSolution sol = solve_rlmp(pool, inst, branches, cfg.shift);
        if (!sol.feasible) {
            out.feasible = false;
            return out;
        }
        out.last = sol;
        out.rlmp_objective = sol.objective;
        out.iterations = iter + 1;

        DualPrices duals = sol.duals;
        if (std::fabs(sol.objective - prev_obj) < 1e-12) {
            if (++stall >= 10) {
                perturb_zero_duals(duals); // anti-cycling nudge on degenerate masters
                stall = 0;
            }
        } else {
            stall = 0;
        }
        prev_obj = sol.objective;

        PriceAllResult pa =
            price_all(inst, duals, cfg.engine, /*parallel=*/!cfg.deterministic, kRcTol);

        // Lagrangian bound: each type can contribute at most its fleet cap copies
        double lag = sol.objective;
        for (int k = 0; k < inst.n_types(); ++k)
            if (pa.best_rc[k] < 0 && pa.best_rc[k] != kInf)
                lag += inst.types[k].available_count * pa.best_rc[k];
        out.bound = std::max(out.bound, lag);

        if (pa.columns.empty()) {
            out.bound = std::max(out.bound, sol.objective);
            return out;
        }
        int before = pool.size();
        for (auto& r : pa.columns) pool.add(std::move(r));
        int added = pool.size() - before;
        out.columns_added += added;
        if (added == 0) {
            // duplicates only: the master already prices these at their rc; stop
            out.bound = std::max(out.bound, sol.objective);
            return out;
        }
    }
    return out; // iteration cap: Lagrangian bound stands, branching proceeds
}

BnPResult solve_bnp(const Instance& inst, const BnPConfig& cfg) {
    auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };

    BnPResult res;
    res.heuristic = cfg.engine == PricingEngine::Dp;
    ColumnPool pool(inst);
    for (auto& r : initial_columns(inst)) pool.add(std::move(r));

    std::ofstream trace;
    if (!cfg.trace_path.empty()) trace.open(cfg.trace_path);

    std::vector<BnPNode> nodes;
    nodes.push_back(BnPNode{});
    std::vector<int> open{0};
    Incumbent inc;
    std::vector<double> bound_history;

    auto global_bound = [&]() {
        double b = inc.valid ? inc.objective : kInf;
        for (int id : open) b = std::min(b, nodes[id].parent_bound);
        if (b == kInf) b = -kInf;
        return b;
    };
    auto take_incumbent = [&](double obj, const std::vector<double>& lambda,
                              const std::vector<double>& unmet,
                              const std::vector<std::vector<double>>& shift_unmet) {
        if (inc.valid && obj >= inc.objective - 1e-9) return;
        inc.valid = true;
        inc.objective = obj;
        inc.lambda = lambda;
        inc.unmet = unmet;
        inc.shift_unmet = shift_unmet;
    };

    std::string stop = "exhausted";
    int explored = 0;
    while (!open.empty()) {
        if (cfg.node_cap > 0 && explored >= cfg.node_cap) {
            stop = "node_cap";
            break;
        }
        if (cfg.time_cap_seconds > 0 && elapsed() > cfg.time_cap_seconds) {
            stop = "time_cap";
            break;
        }
        // best-first: smallest parent bound, ties by lowest id
        int pick = 0;
        for (size_t i = 1; i < open.size(); ++i)
            if (nodes[open[i]].parent_bound < nodes[open[pick]].parent_bound - 1e-12) pick = (int)i;
        int id = open[pick];
        open.erase(open.begin() + pick);
        // nodes grows while branching: no references into it survive this block
        const BranchBoundSet branches = nodes[id].branches;
        const double parent_bound = nodes[id].parent_bound;

        if (inc.valid && parent_bound >= inc.objective - 1e-9) {
            nodes[id].status = "pruned";
            continue;
        }
        CgResult cg = cg_loop(inst, pool, branches, cfg);
        ++explored;
        if (!cfg.rlmp_export_prefix.empty())
            export_rlmp(pool, inst, branches, cfg.shift,
                        cfg.rlmp_export_prefix + "node" + std::to_string(id) + ".lp");
        res.columns_generated += cg.columns_added;
        if (!cg.feasible) {
            nodes[id].status = "infeasible";
            nodes[id].lp_bound = kInf;
        } else {
            double node_bound = std::max(cg.bound, parent_bound); // child never below parent
            nodes[id].lp_bound = node_bound;
            if (inc.valid && node_bound >= inc.objective - 1e-9) {
                nodes[id].status = "pruned";
            } else {
                BranchDecision dec = pick_branch(cg.last, pool, inst);
                if (dec.integral) {
                    nodes[id].status = "integral";
                    take_incumbent(cg.last.objective, cg.last.lambda, cg.last.unmet,
                                   cg.last.shift_unmet);
                } else {
                    nodes[id].status = "branched " + dec.down.text();
                    for (const BranchBound& b : {dec.down, dec.up}) {
                        BnPNode child;
                        child.id = (int)nodes.size();
                        child.parent = id;
                        child.branches = branches;
                        child.branches.bounds.push_back(b);
                        child.parent_bound = node_bound;
                        nodes.push_back(child);
                        open.push_back(child.id);
                    }
                }
            }
        }

        if (trace.is_open())
            trace << "node " << id << " parent " << nodes[id].parent << " bound "
                  << nodes[id].lp_bound << " incumbent " << (inc.valid ? inc.objective : kInf)
                  << " status " << nodes[id].status << " columns " << cg.columns_added << "\n";

        // periodic integer master for incumbents
        if (cfg.use_milp_master &&
            (explored == cfg.milp_master_first_at ||
             (explored > cfg.milp_master_first_at &&
              (explored - cfg.milp_master_first_at) % cfg.milp_master_every == 0))) {
            IntegerMasterResult im = solve_milp_master(pool, inst, cfg.shift);
            if (im.feasible) take_incumbent(im.objective, im.lambda, im.unmet, im.shift_unmet);
        }

        double gb = global_bound();
        bound_history.push_back(gb);
        if (inc.valid && inc.objective > 0) {
            double gap = (inc.objective - gb) / inc.objective;
            if (gap <= cfg.gap_target + 1e-12) {
                stop = "gap_target";
                break;
            }
        } else if (inc.valid && inc.objective <= 1e-9 && gb >= -1e-9) {
            stop = "gap_target";
            break;
        }
        if (res.heuristic && (int)bound_history.size() > cfg.heuristic_stall_nodes) {
            double then = bound_history[bound_history.size() - 1 - cfg.heuristic_stall_nodes];
            double rel = (gb - then) / std::max(1.0, std::fabs(then));
            if (rel < cfg.heuristic_stall_fraction) {
                stop = "stall";
                break;
            }
        }
    }
    if (open.empty()) stop = res.heuristic ? "exhausted" : "optimal";

    // fall back to the integer master if branching never produced an incumbent
    if (!inc.valid) {
        IntegerMasterResult im = solve_milp_master(pool, inst, cfg.shift);
        if (im.feasible) take_incumbent(im.objective, im.lambda, im.unmet, im.shift_unmet);
    }

    res.stop_reason = stop;
    res.nodes_explored = explored;
    res.bound = global_bound();
    if (open.empty() && inc.valid) res.bound = std::min(inc.objective, res.bound);
    res.tree = nodes;
    if (!inc.valid) return res; // no feasible plan (cannot happen with finite penalties)

    res.feasible = true;
    res.objective = inc.objective;
    res.gap = res.objective > 0
                  ? (res.objective - res.bound) / res.objective
                  : (res.bound >= -1e-9 ? 0.0 : kInf);
    res.unmet = inc.unmet;
    res.shift_unmet = inc.shift_unmet;
    res.fleet.assign(inst.n_types(), 0);
    for (int p = 0; p < (int)inc.lambda.size(); ++p) {
        int count = (int)std::llround(inc.lambda[p]);
        if (count <= 0) continue;
        const Route& r = pool.route(p);
        res.plan.push_back({r, count});
        res.fleet[r.esb_type] += count;
        res.invest_cost += count * inst.types[r.esb_type].invest_cost;
        res.transport_cost += count * (r.cost - inst.types[r.esb_type].invest_cost);
    }
    for (int i = 0; i < inst.n_shelters(); ++i)
        res.penalty_cost += inst.demands.penalty[i] * res.unmet[i];
    if (cfg.shift && inst.demands.has_shift_fee())
        for (int i = 0; i < inst.n_shelters(); ++i)
            for (int t = 0; t < inst.horizon.slot_count(); ++t)
                res.shift_cost += inst.demands.shift_fee[i][t] * res.shift_unmet[i][t];
    res.runtime_seconds = elapsed();
    return res;
}

std::string report_csv_header() {
    return "objective,bound,gap,nodes,columns,fleet_type1,fleet_type2,fleet_type3,"
           "invest,transport,penalty,shift,unmet_kwh,stop_reason,runtime_s";
}

std::string report(const BnPResult& r, const Instance& inst, ReportFormat format) {
    std::ostringstream os;
    double unmet_total = 0.0;
    for (double v : r.unmet) unmet_total += v;
    switch (format) {
        case ReportFormat::Text: {
            os << "objective " << r.objective << " (bound " << r.bound << ", gap " << r.gap
               << ", " << r.stop_reason << ")\n";
            os << "fleet:";
            for (size_t k = 0; k < r.fleet.size(); ++k)
                os << " type" << inst.types[k].id << "=" << r.fleet[k];
            os << "\ncost split: invest " << r.invest_cost << " transport " << r.transport_cost
               << " penalty " << r.penalty_cost;
            if (r.shift_cost != 0.0) os << " shift " << r.shift_cost;
            os << "\nnodes " << r.nodes_explored << ", columns " << r.columns_generated
               << ", unmet " << unmet_total << " kWh\n";
            for (const auto& [route, count] : r.plan) {
                os << "  " << count << "x type" << inst.types[route.esb_type].id << ":";
                for (const auto& a : route.actions)
                    os << " " << action_kind_name(a.kind) << "@" << a.slot << "(" << a.from
                       << "->" << a.to << ")";
                os << " delivers " << route.total_discharge() << " kWh\n";
            }
            break;
        }
        case ReportFormat::Csv: {
            std::vector<int> fleet3(3, 0);
            for (size_t k = 0; k < r.fleet.size() && k < 3; ++k) fleet3[k] = r.fleet[k];
            os << (long long)std::llround(r.objective) << "," << (long long)std::llround(r.bound)
               << "," << r.gap << "," << r.nodes_explored << "," << r.columns_generated << ","
               << fleet3[0] << "," << fleet3[1] << "," << fleet3[2] << ","
               << (long long)std::llround(r.invest_cost) << ","
               << (long long)std::llround(r.transport_cost) << ","
               << (long long)std::llround(r.penalty_cost) << ","
               << (long long)std::llround(r.shift_cost) << "," << unmet_total << ","
               << r.stop_reason << "," << r.runtime_seconds;
            break;
        }
        case ReportFormat::Json: {
            nlohmann::json j;
            j["objective"] = r.objective;
            j["bound"] = r.bound;
            j["gap"] = r.gap;
            j["stop_reason"] = r.stop_reason;
            j["nodes"] = r.nodes_explored;
            j["columns"] = r.columns_generated;
            j["fleet"] = r.fleet;
            j["cost"] = {{"invest", r.invest_cost},
                         {"transport", r.transport_cost},
                         {"penalty", r.penalty_cost},
                         {"shift", r.shift_cost}};
            j["unmet_kwh"] = unmet_total;
            os << j.dump(2);
            break;
        }
    }
    return os.str();
}

} // namespace esbilr
