#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "esbilr/bnp.hpp"
#include "esbilr/compact.hpp"
#include "esbilr/metrics.hpp"
#include "esbilr/solution_io.hpp"
#include "esbilr/sweep.hpp"

using namespace esbilr;

namespace {

// exit codes: 0 ok, 1 violation/infeasible, 2 usage, 3 internal
constexpr int kOk = 0, kViolation = 1, kInternal = 3, kUsage = 2;

void add_spec_options(CLI::App* cmd, RunSpec& spec) {
    cmd->add_option("--instance", spec.instance_path, "instance file (omit to generate)");
    cmd->add_option("--gen-shelters", spec.gen_shelters, "generated case: shelters (1-10)");
    cmd->add_option("--gen-stations", spec.gen_stations, "generated case: stations (1-3)");
    cmd->add_option("--gen-slots", spec.gen_slots, "generated case: time slots");
    cmd->add_option("--seed", spec.seed, "demand generator seed");
    cmd->add_option("--method", spec.method, "compact | bnp-exact | bnp-dp")
        ->check(CLI::IsMember({"compact", "bnp-exact", "bnp-dp"}));
    cmd->add_option("--sparsity", spec.sparsity, "compatibility sparsity level 1-4 (0 keeps)")
        ->check(CLI::Range(0, 4));
    cmd->add_option("--severity", spec.severity, "normal | moderate | adverse")
        ->check(CLI::IsMember({"normal", "moderate", "adverse"}));
    cmd->add_option("--demand-scale", spec.demand_scale, "demand multiplier (0.5-1.5 typical)");
    cmd->add_option("--availability", spec.availability,
                    "per-type fleet caps, -1 keeps the instance value");
    cmd->add_option("--service-time", spec.service_override,
                    "uniform shelter service time override (slots)");
    cmd->add_option("--shift-fee", spec.shift_fee,
                    "enable demand shifting with this fee ($/kWh)");
    cmd->add_option("--gap", spec.gap_target, "relative optimality gap target");
    cmd->add_option("--time-cap", spec.time_cap, "wall-clock cap in seconds (0 = none)");
    cmd->add_option("--node-cap", spec.node_cap, "tree node cap");
    cmd->add_flag_callback("--no-milp-master", [&spec] { spec.use_milp_master = false; },
                           "disable the periodic integer-master incumbent");
    cmd->add_flag_callback("--parallel", [&spec] { spec.deterministic = false; },
                           "parallel per-type pricing (results match serial)");
    cmd->add_flag_callback("--deterministic", [&spec] { spec.deterministic = true; },
                           "single-threaded, byte-stable output (default)");
    cmd->add_option("--trace", spec.trace_path, "write a per-node trace file");
}

int cmd_solve(RunSpec& spec, const std::string& out_path, const std::string& export_lp_path,
              const std::string& rlmp_prefix) {
    if (!export_lp_path.empty()) {
        Instance inst = materialize_instance(spec);
        CompactOptions opt;
        opt.symmetry_breaking = true;
        opt.with_shift = spec.shift_fee >= 0.0 || inst.demands.has_shift_fee();
        opt.with_names = true;
        export_lp(build_compact(inst, opt), export_lp_path);
        std::cout << "compact model written to " << export_lp_path << "\n";
    }
    SolveOutcome o;
    if (!rlmp_prefix.empty() && spec.method != "compact") {
        Instance inst = materialize_instance(spec);
        BnPConfig cfg;
        cfg.engine = spec.method == "bnp-exact" ? PricingEngine::Exact : PricingEngine::Dp;
        cfg.gap_target = spec.gap_target;
        cfg.use_milp_master = spec.use_milp_master;
        cfg.deterministic = spec.deterministic;
        cfg.time_cap_seconds = spec.time_cap;
        cfg.node_cap = spec.node_cap;
        cfg.shift = spec.shift_fee >= 0.0 || inst.demands.has_shift_fee();
        cfg.trace_path = spec.trace_path;
        cfg.rlmp_export_prefix = rlmp_prefix;
        BnPResult r = solve_bnp(inst, cfg);
        if (!r.feasible) {
            std::cerr << "no feasible plan\n";
            return kViolation;
        }
        o.ok = true;
        o.doc = document_from_bnp(r, spec.method);
        o.runtime_seconds = r.runtime_seconds;
    } else {
        o = run_solve(spec);
    }
    if (!o.ok) {
        std::cerr << "solve failed: " << o.error << "\n";
        return o.error.find("feasible") != std::string::npos ? kViolation : kInternal;
    }
    if (!out_path.empty()) write_solution(o.doc, out_path);
    std::cout << "method " << o.doc.method << " objective " << o.doc.objective << " bound "
              << o.doc.bound << " gap " << o.doc.gap << " (" << o.doc.stop_reason << ") fleet";
    for (int f : o.doc.fleet) std::cout << " " << f;
    std::cout << " runtime " << o.runtime_seconds << "s\n";
    return kOk;
}

int cmd_metrics(const RunSpec& spec, double t_avg_arg, const std::vector<double>& mix,
                double increment, const std::string& solution_path) {
    Instance inst = materialize_instance(spec);
    std::cout << "type  t_avg_h  zeta_kwh  upsilon_per_kwh\n";
    for (int k = 0; k < inst.n_types(); ++k) {
        double ta = t_avg_arg >= 0 ? t_avg_arg : mean_access_time_hours(inst, k);
        double z = effective_usable_capacity(inst.types[k], ta);
        auto u = capacity_cost(inst.types[k], ta);
        std::cout << inst.types[k].id << "     " << ta << "  " << z << "  "
                  << (u ? std::to_string(*u) : std::string("unusable")) << "\n";
    }
    if (!mix.empty()) {
        double ta = t_avg_arg >= 0 ? t_avg_arg : mean_access_time_hours(inst, 0);
        auto r = capacity_utilization(inst.types, mix, ta, increment);
        if (!r) {
            std::cerr << "capacity utilization undefined for this mix\n";
            return kViolation;
        }
        std::cout << "zeta_bar " << r->zeta_bar << " kWh, utilization " << r->ratio << "\n";
    }
    if (!solution_path.empty()) {
        SolutionDocument doc = load_solution(solution_path);
        double delivered = 0.0;
        for (const auto& [route, count] : doc.plan) delivered += count * route.total_discharge();
        double fleet_capacity = 0.0;
        for (size_t k = 0; k < doc.fleet.size() && (int)k < inst.n_types(); ++k) {
            double ta = t_avg_arg >= 0 ? t_avg_arg : mean_access_time_hours(inst, (int)k);
            fleet_capacity += doc.fleet[k] * effective_usable_capacity(inst.types[k], ta);
        }
        if (fleet_capacity > 0)
            std::cout << "plan utilization " << delivered / fleet_capacity << " (" << delivered
                      << " kWh over " << fleet_capacity << " kWh fleet capacity)\n";
        else
            std::cout << "plan utilization undefined (empty fleet)\n";
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ESB isolated-load restoration solver"};
    app.require_subcommand(1);

    RunSpec spec;
    std::string out_path, export_lp_path, rlmp_prefix;
    auto* solve = app.add_subcommand("solve", "solve one instance");
    add_spec_options(solve, spec);
    solve->add_option("--out", out_path, "solution document path");
    solve->add_option("--export-lp", export_lp_path, "also write the compact model as LP text");
    solve->add_option("--export-rlmp", rlmp_prefix, "dump each node's RLMP with this prefix");

    RunSpec sweep_spec;
    std::string axis_name = "demand", sweep_out;
    std::vector<double> grid;
    std::vector<unsigned> seeds;
    bool sweep_parallel = false;
    auto* sweep = app.add_subcommand("sweep", "run a scenario sweep, emit CSV");
    add_spec_options(sweep, sweep_spec);
    sweep->add_option("--axis", axis_name,
                      "sparsity | demand | availability | service_time | severity | shift_fee")
        ->required();
    sweep->add_option("--grid", grid, "axis grid values (defaults per axis)");
    sweep->add_option("--seeds", seeds, "replicate the sweep over these demand seeds");
    sweep->add_flag("--points-parallel", sweep_parallel, "solve grid points concurrently");
    sweep->add_option("--out", sweep_out, "CSV path (stdout when omitted)");

    RunSpec val_spec;
    std::string val_solution;
    auto* validate_cmd = app.add_subcommand("validate", "validate a solution document");
    add_spec_options(validate_cmd, val_spec);
    validate_cmd->add_option("--solution", val_solution, "solution document")->required();

    RunSpec met_spec;
    double t_avg = -1.0, increment = 1636.0;
    std::vector<double> mix;
    std::string met_solution;
    auto* metrics_cmd = app.add_subcommand("metrics", "fleet-design metrics");
    add_spec_options(metrics_cmd, met_spec);
    metrics_cmd->add_option("--t-avg", t_avg, "average access time in hours (default: derived)");
    metrics_cmd->add_option("--mix", mix, "cost-contribution mix per type (sums to 1)");
    metrics_cmd->add_option("--increment", increment, "demand increment in kWh");
    metrics_cmd->add_option("--solution", met_solution, "report plan-level utilization");

    RunSpec gen_spec;
    std::string gen_out = "instance.json";
    auto* gen = app.add_subcommand("gen", "write a generated case instance");
    add_spec_options(gen, gen_spec);
    gen->add_option("--out", gen_out, "output instance path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(spec, out_path, export_lp_path, rlmp_prefix);
        if (sweep->parsed()) {
            SweepAxis axis = axis_from_name(axis_name);
            if (grid.empty()) grid = default_grid(axis);
            if (seeds.empty()) seeds = {sweep_spec.seed};
            std::ostringstream all;
            for (size_t si = 0; si < seeds.size(); ++si) {
                RunSpec base = sweep_spec;
                base.seed = seeds[si];
                std::string csv = run_sweep(axis, base, grid, sweep_parallel);
                if (si == 0) all << "seed," << csv.substr(0, csv.find('\n') + 1);
                std::istringstream is(csv);
                std::string line;
                std::getline(is, line);
                while (std::getline(is, line)) all << seeds[si] << "," << line << "\n";
            }
            if (sweep_out.empty()) {
                std::cout << all.str();
            } else {
                std::ofstream f(sweep_out);
                f << all.str();
                std::cout << "sweep written to " << sweep_out << "\n";
            }
            return kOk;
        }
        if (validate_cmd->parsed()) {
            Instance inst = materialize_instance(val_spec);
            SolutionDocument doc = load_solution(val_solution);
            ValidationReport rep = validate_solution(doc, inst);
            for (const auto& issue : rep.issues) std::cout << "violation: " << issue << "\n";
            std::cout << (rep.clean ? "clean" : "NOT clean") << "\n";
            return rep.clean ? kOk : kViolation;
        }
        if (metrics_cmd->parsed())
            return cmd_metrics(met_spec, t_avg, mix, increment, met_solution);
        if (gen->parsed()) {
            Instance inst = materialize_instance(gen_spec);
            save_instance(inst, gen_out);
            std::cout << "instance written to " << gen_out << "\n";
            return kOk;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInternal;
    }
    return kUsage;
}
