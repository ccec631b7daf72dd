#include "esbilr/solution_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace esbilr {

using nlohmann::json;

namespace {

json route_to_json(const Route& r, int count) {
    json jr;
    jr["type"] = r.esb_type;
    jr["count"] = count;
    jr["cost"] = r.cost;
    jr["actions"] = json::array();
    for (const auto& a : r.actions)
        jr["actions"].push_back({{"action", action_kind_name(a.kind)},
                                 {"from", a.from},
                                 {"to", a.to},
                                 {"slot", a.slot}});
    jr["discharge"] = json::array();
    for (const auto& e : r.discharge)
        jr["discharge"].push_back({{"shelter", e.shelter}, {"slot", e.slot}, {"kwh", e.kwh}});
    jr["soc_trace"] = r.soc_trace;
    return jr;
}

Route route_from_json(const json& jr) {
    Route r;
    r.esb_type = jr.at("type").get<int>();
    r.cost = jr.at("cost").get<double>();
    for (const auto& ja : jr.at("actions")) {
        RouteAction a{};
        std::string kind = ja.at("action").get<std::string>();
        if (kind == "u") a.kind = ActionKind::DepartDepot;
        else if (kind == "x") a.kind = ActionKind::DepartShelter;
        else if (kind == "z") a.kind = ActionKind::DepartStation;
        else if (kind == "r") a.kind = ActionKind::ReturnDepot;
        else throw std::runtime_error("solution: unknown action kind " + kind);
        a.from = ja.at("from").get<int>();
        a.to = ja.at("to").get<int>();
        a.slot = ja.at("slot").get<int>();
        r.actions.push_back(a);
    }
    for (const auto& je : jr.at("discharge"))
        r.discharge.push_back({je.at("shelter").get<int>(), je.at("slot").get<int>(),
                               je.at("kwh").get<double>()});
    if (jr.contains("soc_trace")) r.soc_trace = jr.at("soc_trace").get<std::vector<double>>();
    return r;
}

} // namespace

SolutionDocument document_from_bnp(const BnPResult& r, const std::string& method) {
    SolutionDocument d;
    d.method = method;
    d.objective = r.objective;
    d.bound = r.bound;
    d.gap = r.gap;
    d.stop_reason = r.stop_reason;
    d.nodes = r.nodes_explored;
    d.columns = r.columns_generated;
    d.fleet = r.fleet;
    d.invest = r.invest_cost;
    d.transport = r.transport_cost;
    d.penalty = r.penalty_cost;
    d.shift = r.shift_cost;
    d.unmet = r.unmet;
    d.shift_unmet = r.shift_unmet;
    d.plan = r.plan;
    return d;
}

std::string solution_to_json(const SolutionDocument& d) {
    json j;
    j["method"] = d.method;
    j["objective"] = d.objective;
    j["bound"] = d.bound;
    j["gap"] = d.gap;
    j["stop_reason"] = d.stop_reason;
    j["nodes"] = d.nodes;
    j["columns"] = d.columns;
    j["fleet"] = d.fleet;
    j["cost"] = {{"invest", d.invest},
                 {"transport", d.transport},
                 {"penalty", d.penalty},
                 {"shift", d.shift}};
    j["unmet"] = d.unmet;
    if (!d.shift_unmet.empty()) j["shift_unmet"] = d.shift_unmet;
    j["routes"] = json::array();
    for (const auto& [route, count] : d.plan) j["routes"].push_back(route_to_json(route, count));
    return j.dump(2);
}

SolutionDocument solution_from_json(const std::string& text) {
    json j = json::parse(text);
    SolutionDocument d;
    d.method = j.value("method", "");
    d.objective = j.at("objective").get<double>();
    d.bound = j.value("bound", 0.0);
    d.gap = j.value("gap", 0.0);
    d.stop_reason = j.value("stop_reason", "");
    d.nodes = j.value("nodes", 0);
    d.columns = j.value("columns", 0);
    d.fleet = j.value("fleet", std::vector<int>{});
    if (j.contains("cost")) {
        d.invest = j["cost"].value("invest", 0.0);
        d.transport = j["cost"].value("transport", 0.0);
        d.penalty = j["cost"].value("penalty", 0.0);
        d.shift = j["cost"].value("shift", 0.0);
    }
    d.unmet = j.value("unmet", std::vector<double>{});
    if (j.contains("shift_unmet"))
        d.shift_unmet = j.at("shift_unmet").get<std::vector<std::vector<double>>>();
    for (const auto& jr : j.at("routes"))
        d.plan.push_back({route_from_json(jr), jr.at("count").get<int>()});
    return d;
}

void write_solution(const SolutionDocument& doc, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out << solution_to_json(doc) << "\n";
}

SolutionDocument load_solution(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path + ": cannot open solution file");
    std::stringstream ss;
    ss << in.rdbuf();
    return solution_from_json(ss.str());
}

ValidationReport validate_solution(const SolutionDocument& doc, const Instance& inst) {
    ValidationReport rep;
    std::vector<double> delivered(inst.n_shelters(), 0.0);
    std::vector<int> fleet(inst.n_types(), 0);
    int idx = 0;
    for (const auto& [route, count] : doc.plan) {
        auto viol = validate(route, inst);
        for (const auto& v : viol) {
            rep.issues.push_back("route " + std::to_string(idx) + ": " + v);
            rep.clean = false;
        }
        for (int i = 0; i < inst.n_shelters(); ++i)
            delivered[i] += count * route.total_discharge(i);
        if (route.esb_type >= 0 && route.esb_type < inst.n_types())
            fleet[route.esb_type] += count;
        ++idx;
    }
    for (int k = 0; k < inst.n_types(); ++k)
        if (fleet[k] > inst.types[k].available_count) {
            rep.issues.push_back("fleet of type " + std::to_string(inst.types[k].id) +
                                 " exceeds availability");
            rep.clean = false;
        }
    rep.coverage_residual.assign(inst.n_shelters(), 0.0);
    for (int i = 0; i < inst.n_shelters(); ++i) {
        double shortfall = std::max(0.0, inst.demands.shelter_total(i) - delivered[i]);
        double recorded = i < (int)doc.unmet.size() ? doc.unmet[i] : 0.0;
        double residual = shortfall - recorded;
        rep.coverage_residual[i] = residual;
        if (residual > 1e-4) {
            rep.issues.push_back("shelter " + std::to_string(i) + ": unaccounted unmet demand (" +
                                 std::to_string(residual) + " kWh)");
            rep.clean = false;
        }
    }
    return rep;
}

} // namespace esbilr
