#include "esbilr/sweep.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "esbilr/compact.hpp"

namespace esbilr {

Instance materialize_instance(const RunSpec& spec) {
    Instance inst = spec.instance_path.empty()
                        ? case_study_instance(spec.seed, spec.gen_shelters, spec.gen_stations,
                                              spec.gen_slots)
                        : load_instance(spec.instance_path);
    if (spec.sparsity > 0) inst = apply_sparsity(inst, spec.sparsity);
    if (spec.severity == "moderate") inst = apply_severity(inst, Severity::Moderate);
    else if (spec.severity == "adverse") inst = apply_severity(inst, Severity::Adverse);
    else if (spec.severity != "normal")
        throw std::runtime_error("unknown severity: " + spec.severity);

    if (spec.demand_scale != 1.0) {
        if (spec.demand_scale < 0) throw std::runtime_error("demand scale must be >= 0");
        for (auto& row : inst.demands.demand)
            for (auto& v : row) v *= spec.demand_scale;
        inst.big_m2 = std::max(inst.big_m2, 2.0 * inst.demands.total());
        if (inst.big_m2 <= 0) inst.big_m2 = 1.0;
    }
    if (!spec.availability.empty()) {
        if ((int)spec.availability.size() != inst.n_types())
            throw std::runtime_error("availability override needs one entry per type");
        for (int k = 0; k < inst.n_types(); ++k)
            if (spec.availability[k] >= 0) inst.types[k].available_count = spec.availability[k];
    }
    if (spec.service_override > 0)
        inst.network.service_shelter.assign(inst.n_shelters(), spec.service_override);
    if (spec.shift_fee >= 0.0)
        inst.demands.shift_fee.assign(inst.n_shelters(),
                                      std::vector<double>(inst.horizon.slot_count(),
                                                          spec.shift_fee));
    return inst;
}

SolveOutcome run_solve(const RunSpec& spec) {
    SolveOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    try {
        Instance inst = materialize_instance(spec);
        bool shift = spec.shift_fee >= 0.0 || inst.demands.has_shift_fee();

        if (spec.method == "compact") {
            CompactOptions opt;
            opt.symmetry_breaking = true;
            opt.with_shift = shift;
            opt.var_cap = spec.compact_var_cap;
            CompactModel m = build_compact(inst, opt);
            MilpSolution s = solve_compact(m, spec.gap_target, spec.node_cap);
            if (!s.milp.feasible) {
                out.error = "compact search found no feasible solution";
                return out;
            }
            SolutionDocument d;
            d.method = "compact";
            d.objective = s.objective;
            d.bound = s.bound;
            d.gap = s.milp.gap();
            d.stop_reason = s.proven ? "optimal" : "node_cap";
            d.nodes = s.milp.nodes;
            d.fleet.assign(inst.n_types(), 0);
            auto routes = extract_routes(s.x, m, inst);
            for (const auto& r : routes) {
                d.fleet[r.esb_type] += 1;
                d.plan.push_back({r, 1});
                d.invest += inst.types[r.esb_type].invest_cost;
                d.transport += r.cost - inst.types[r.esb_type].invest_cost;
            }
            d.unmet.assign(inst.n_shelters(), 0.0);
            for (int i = 0; i < inst.n_shelters(); ++i) {
                d.unmet[i] = s.x[m.cat.il(i)];
                d.penalty += inst.demands.penalty[i] * d.unmet[i];
            }
            double shifted = 0.0;
            if (shift) {
                d.shift_unmet.assign(inst.n_shelters(),
                                     std::vector<double>(inst.horizon.slot_count(), 0.0));
                for (int i = 0; i < inst.n_shelters(); ++i)
                    for (int t = 0; t < inst.horizon.slot_count(); ++t) {
                        double v = s.x[m.cat.ilshift(i, t)];
                        d.shift_unmet[i][t] = v;
                        shifted += v;
                        if (inst.demands.has_shift_fee())
                            d.shift += inst.demands.shift_fee[i][t] * v;
                    }
            }
            out.doc = d;
            out.shifted_pct =
                inst.demands.total() > 0 ? 100.0 * shifted / inst.demands.total() : 0.0;
            out.ok = true;
        } else if (spec.method == "bnp-exact" || spec.method == "bnp-dp") {
            BnPConfig cfg;
            cfg.engine =
                spec.method == "bnp-exact" ? PricingEngine::Exact : PricingEngine::Dp;
            cfg.gap_target = spec.gap_target;
            cfg.use_milp_master = spec.use_milp_master;
            cfg.deterministic = spec.deterministic;
            cfg.time_cap_seconds = spec.time_cap;
            cfg.node_cap = spec.node_cap;
            cfg.shift = shift;
            cfg.trace_path = spec.trace_path;
            BnPResult r = solve_bnp(inst, cfg);
            if (!r.feasible) {
                out.error = "branch-and-price found no feasible plan";
                return out;
            }
            out.doc = document_from_bnp(r, spec.method);
            double shifted = 0.0;
            for (const auto& row : r.shift_unmet)
                for (double v : row) shifted += v;
            out.shifted_pct =
                inst.demands.total() > 0 ? 100.0 * shifted / inst.demands.total() : 0.0;
            out.ok = true;
        } else {
            out.error = "unknown method: " + spec.method;
            return out;
        }
    } catch (const std::exception& e) {
        out.error = e.what();
        return out;
    }
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

SweepAxis axis_from_name(const std::string& name) {
    if (name == "sparsity") return SweepAxis::Sparsity;
    if (name == "demand") return SweepAxis::Demand;
    if (name == "availability") return SweepAxis::Availability;
    if (name == "service_time") return SweepAxis::ServiceTime;
    if (name == "severity") return SweepAxis::Severity;
    if (name == "shift_fee") return SweepAxis::ShiftFee;
    throw std::runtime_error("unknown sweep axis: " + name);
}

std::vector<double> default_grid(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::Sparsity: return {1, 2, 3, 4};
        case SweepAxis::Demand: return {0.5, 0.75, 1.0, 1.25, 1.5};
        case SweepAxis::Availability: return {50, 3, 2, 1, 0}; // cap on the largest type
        case SweepAxis::ServiceTime: return {1, 2, 3};
        case SweepAxis::Severity: return {0, 1, 2};
        case SweepAxis::ShiftFee: return {0, 1, 10, 100, 10000};
    }
    return {};
}

RunSpec spec_for_point(SweepAxis axis, const RunSpec& base, double value) {
    RunSpec s = base;
    switch (axis) {
        case SweepAxis::Sparsity: s.sparsity = (int)value; break;
        case SweepAxis::Demand: s.demand_scale = value; break;
        case SweepAxis::Availability: {
            Instance probe = materialize_instance(base);
            s.availability.assign(probe.n_types(), -1);
            s.availability.back() = (int)value; // tighten the largest-capacity type
            break;
        }
        case SweepAxis::ServiceTime: s.service_override = (int)value; break;
        case SweepAxis::Severity:
            s.severity = value == 0 ? "normal" : value == 1 ? "moderate" : "adverse";
            break;
        case SweepAxis::ShiftFee: s.shift_fee = value; break;
    }
    return s;
}

std::string run_sweep(SweepAxis axis, const RunSpec& base, const std::vector<double>& grid,
                      bool parallel) {
    std::vector<std::string> rows(grid.size());
    std::vector<SolveOutcome> outs(grid.size());

    auto solve_point = [&](int g) { outs[g] = run_solve(spec_for_point(axis, base, grid[g])); };
#ifdef _OPENMP
    if (parallel && !base.deterministic) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int g = 0; g < (int)grid.size(); ++g) solve_point(g);
    } else
#endif
    {
        (void)parallel;
        for (int g = 0; g < (int)grid.size(); ++g) solve_point(g);
    }

    double base_cost = 0.0;
    bool have_base = false;
    std::ostringstream os;
    os << "axis_value,total_cost,cost_delta_pct,fleet_type1,fleet_type2,fleet_type3,"
          "unmet_kwh,shifted_pct,gap,runtime_s,status\n";
    for (size_t g = 0; g < grid.size(); ++g) {
        const SolveOutcome& o = outs[g];
        os << grid[g] << ",";
        if (!o.ok) {
            os << ",,,,,,,,," << "error: " << o.error << "\n";
            continue;
        }
        if (!have_base) {
            base_cost = o.doc.objective;
            have_base = true;
        }
        double delta =
            base_cost != 0.0 ? 100.0 * (o.doc.objective - base_cost) / base_cost : 0.0;
        std::vector<int> fleet3(3, 0);
        for (size_t k = 0; k < o.doc.fleet.size() && k < 3; ++k) fleet3[k] = o.doc.fleet[k];
        double unmet = 0.0;
        for (double v : o.doc.unmet) unmet += v;
        os << (long long)std::llround(o.doc.objective) << "," << delta << "," << fleet3[0] << ","
           << fleet3[1] << "," << fleet3[2] << "," << unmet << "," << o.shifted_pct << ","
           << o.doc.gap << "," << o.runtime_seconds << ",ok\n";
    }
    return os.str();
}

} // namespace esbilr
