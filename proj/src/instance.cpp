#include "esbilr/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace esbilr {

using nlohmann::json;

double DemandProfile::total() const {
    double s = 0.0;
    for (const auto& row : demand)
        for (double v : row) s += v;
    return s;
}

double DemandProfile::shelter_total(int i) const {
    double s = 0.0;
    for (double v : demand[i]) s += v;
    return s;
}

std::vector<int> Instance::compatible_shelters(int type) const {
    std::vector<int> out;
    for (int i = 0; i < n_shelters(); ++i)
        if (compatible(type, i)) out.push_back(i);
    return out;
}

std::vector<int> Instance::compatible_types(int shelter) const {
    std::vector<int> out;
    for (int k = 0; k < n_types(); ++k)
        if (compatible(k, shelter)) out.push_back(k);
    return out;
}

int Instance::max_depot_travel() const {
    int m = 0;
    for (int k = 0; k < n_types(); ++k)
        for (int i = 0; i < n_shelters(); ++i)
            m = std::max(m, travel(k, 0, network.shelter_node(i)));
    return m;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw std::runtime_error(path + ": " + msg);
}

std::string idx(const std::string& base, int i) {
    return base + "[" + std::to_string(i) + "]";
}

} // namespace

void Instance::validate() const {
    if (types.empty()) fail("esb_types", "at least one ESB type required");
    if (horizon.first_slot >= horizon.last_slot)
        fail("horizon", "first_slot must be < last_slot");
    if (horizon.slot_minutes <= 0) fail("horizon.slot_minutes", "must be positive");

    for (int k = 0; k < n_types(); ++k) {
        const auto& t = types[k];
        const std::string base = idx("esb_types", k);
        if (!(t.cap_min >= 0 && t.cap_min < t.cap_max))
            fail(base + ".cap_min", "requires 0 <= cap_min < cap_max");
        if (t.discharge_min <= 0) fail(base + ".discharge_min", "must be positive");
        if (t.invest_cost <= 0) fail(base + ".invest_cost", "must be positive");
        if (t.consumption_rate <= 0) fail(base + ".consumption_rate", "must be positive");
        if (t.available_count < 0) fail(base + ".available_count", "must be >= 0");
    }

    const int nn = network.n_nodes();
    if (static_cast<int>(network.travel_slots.size()) != n_types())
        fail("network.travel_slots", "one table per ESB type required");
    for (int k = 0; k < n_types(); ++k) {
        const auto& ts = network.travel_slots[k];
        if (static_cast<int>(ts.size()) != nn)
            fail("network.travel_slots" + idx("", k), "matrix must cover depot+shelters+stations");
        for (int a = 0; a < nn; ++a) {
            if (static_cast<int>(ts[a].size()) != nn)
                fail("network.travel_slots", "matrix must be square");
            if (ts[a][a] != 0) fail("network.travel_slots", "diagonal must be zero");
            for (int b = 0; b < nn; ++b) {
                if (ts[a][b] < 0) fail("network.travel_slots", "entries must be >= 0");
                if (ts[a][b] != ts[b][a])
                    fail("network.travel_slots",
                         "must be symmetric (" + std::to_string(a) + "," + std::to_string(b) + ")");
            }
        }
    }
    if (static_cast<int>(network.service_shelter.size()) != n_shelters())
        fail("network.service_slots.shelters", "one entry per shelter required");
    if (static_cast<int>(network.service_station.size()) != n_stations())
        fail("network.service_slots.stations", "one entry per station required");
    for (int i = 0; i < n_shelters(); ++i)
        if (network.service_shelter[i] < 1)
            fail(idx("network.service_slots.shelters", i), "must be >= 1");
    for (int j = 0; j < n_stations(); ++j)
        if (network.service_station[j] < 1)
            fail(idx("network.service_slots.stations", j), "must be >= 1");

    if (static_cast<int>(demands.demand.size()) != n_shelters())
        fail("demand", "one row per shelter required");
    for (int i = 0; i < n_shelters(); ++i) {
        if (static_cast<int>(demands.demand[i].size()) != horizon.slot_count())
            fail(idx("demand", i), "row length must equal slot count");
        for (int t = 0; t < horizon.slot_count(); ++t)
            if (demands.demand[i][t] < 0) fail(idx("demand", i), "entries must be >= 0");
    }
    // Case-data convention: the slots nobody can reach carry no demand. Checked at
    // load/build time only; scenario transforms that stretch travel times are exempt.
    const int prefix = std::min(max_depot_travel(), horizon.slot_count());
    for (int i = 0; i < n_shelters(); ++i)
        for (int t = 0; t < prefix; ++t)
            if (demands.demand[i][t] != 0.0)
                fail(idx("demand", i),
                     "first " + std::to_string(prefix) + " slots must be zero (unreachable)");

    if (static_cast<int>(demands.penalty.size()) != n_shelters())
        fail("costs.penalty", "one entry per shelter required");
    for (int i = 0; i < n_shelters(); ++i)
        if (demands.penalty[i] < 0) fail(idx("costs.penalty", i), "must be >= 0");
    if (demands.has_shift_fee()) {
        if (static_cast<int>(demands.shift_fee.size()) != n_shelters())
            fail("costs.shift_fee", "one row per shelter required");
        for (int i = 0; i < n_shelters(); ++i)
            if (static_cast<int>(demands.shift_fee[i].size()) != horizon.slot_count())
                fail(idx("costs.shift_fee", i), "row length must equal slot count");
    }

    if (static_cast<int>(compat.im.size()) != n_types())
        fail("compat", "one row per ESB type required");
    for (int k = 0; k < n_types(); ++k)
        if (static_cast<int>(compat.im[k].size()) != n_shelters())
            fail(idx("compat", k), "row length must equal shelter count");
    for (int i = 0; i < n_shelters(); ++i) {
        bool any = false;
        for (int k = 0; k < n_types(); ++k) any = any || compat.compatible(k, i);
        if (!any) fail("compat", "uncoverable shelter " + std::to_string(i) + " (no compatible type)");
    }

    double max_cap = 0.0;
    for (const auto& t : types) max_cap = std::max(max_cap, t.cap_max);
    if (!(big_m1 > max_cap)) fail("big_m.m1", "must exceed the largest cap_max");
    if (!(big_m2 > demands.total())) fail("big_m.m2", "must exceed the total demand");

    if (energy_cost < 0) fail("costs.energy_cost", "must be >= 0");
}

// ---------------------------------------------------------------------------
// JSON schema (see README): horizon, esb_types[], network{travel_slots,
// service_slots}, demand{matrix|generator}, compat{matrix|level},
// costs{energy_cost, penalty[], shift_fee?}, big_m{m1?, m2?}.
// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<int>> parse_int_matrix(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected a matrix");
    std::vector<std::vector<int>> m;
    for (const auto& row : j) m.push_back(row.get<std::vector<int>>());
    return m;
}

std::vector<std::vector<double>> parse_double_matrix(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected a matrix");
    std::vector<std::vector<double>> m;
    for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
    return m;
}

void derive_travel_energy(Instance& inst) {
    const int nn = inst.network.n_nodes();
    inst.network.travel_energy.assign(inst.n_types(), {});
    for (int k = 0; k < inst.n_types(); ++k) {
        auto& e = inst.network.travel_energy[k];
        e.assign(nn, std::vector<double>(nn, 0.0));
        for (int a = 0; a < nn; ++a)
            for (int b = 0; b < nn; ++b)
                e[a][b] = inst.types[k].consumption_rate * inst.network.travel_slots[k][a][b] *
                          inst.horizon.slot_hours();
    }
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

Instance parse_instance_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        fail(origin, std::string("parse error: ") + e.what());
    }

    Instance inst;
    const auto& jh = j.at("horizon");
    inst.horizon.slot_minutes = jh.value("slot_minutes", 15.0);
    inst.horizon.first_slot = jh.value("first_slot", 0);
    inst.horizon.last_slot = jh.at("last_slot").get<int>();

    for (const auto& jt : j.at("esb_types")) {
        EsbType t;
        t.id = jt.value("id", static_cast<int>(inst.types.size()) + 1);
        t.invest_cost = jt.at("invest_cost").get<double>();
        t.cap_max = jt.at("cap_max").get<double>();
        t.cap_min = jt.at("cap_min").get<double>();
        t.discharge_min = jt.at("discharge_min").get<double>();
        t.consumption_rate = jt.at("consumption_rate").get<double>();
        t.available_count = jt.at("available_count").get<int>();
        inst.types.push_back(t);
    }
    const int K = inst.n_types();

    const auto& jn = j.at("network");
    inst.network.n_shelters = jn.at("n_shelters").get<int>();
    inst.network.n_stations = jn.at("n_stations").get<int>();
    const auto& jts = jn.at("travel_slots");
    if (jts.is_array() && !jts.empty() && jts[0].is_array() && !jts[0].empty() &&
        jts[0][0].is_array()) {
        for (const auto& m : jts)
            inst.network.travel_slots.push_back(parse_int_matrix(m, "network.travel_slots"));
        if (static_cast<int>(inst.network.travel_slots.size()) != K)
            fail("network.travel_slots", "per-type list must have one matrix per type");
    } else {
        auto shared = parse_int_matrix(jts, "network.travel_slots");
        inst.network.travel_slots.assign(K, shared);
    }
    const auto& jsv = jn.at("service_slots");
    inst.network.service_shelter = jsv.at("shelters").get<std::vector<int>>();
    inst.network.service_station = jsv.at("stations").get<std::vector<int>>();

    const auto& jc = j.at("costs");
    inst.energy_cost = jc.at("energy_cost").get<double>();
    inst.demands.penalty = jc.at("penalty").get<std::vector<double>>();
    if (jc.contains("shift_fee"))
        inst.demands.shift_fee = parse_double_matrix(jc.at("shift_fee"), "costs.shift_fee");

    const auto& jd = j.at("demand");
    if (jd.contains("matrix")) {
        inst.demands.demand = parse_double_matrix(jd.at("matrix"), "demand.matrix");
    } else if (jd.contains("generator")) {
        const auto& jg = jd.at("generator");
        unsigned seed = jg.value("seed", 7u);
        DemandShape shape =
            jg.value("shape", std::string("mega_shelter")) == "flat" ? DemandShape::Flat
                                                                     : DemandShape::MegaShelter;
        std::vector<double> means;
        if (jg.contains("mean_kwh_per_shelter"))
            means = jg.at("mean_kwh_per_shelter").get<std::vector<double>>();
        else
            means.assign(inst.network.n_shelters, jg.at("mean_kwh").get<double>());
        if (static_cast<int>(means.size()) != inst.network.n_shelters)
            fail("demand.generator.mean_kwh_per_shelter", "one entry per shelter required");
        // Zero prefix covers the longest depot->shelter travel so early demand is reachable.
        int prefix = 0;
        for (int k = 0; k < K; ++k)
            for (int i = 0; i < inst.network.n_shelters; ++i)
                prefix = std::max(prefix, inst.network.travel_slots[k][0][1 + i]);
        inst.demands.demand.clear();
        for (int i = 0; i < inst.network.n_shelters; ++i) {
            unsigned si = static_cast<unsigned>(splitmix64(seed * 1000003ULL + i));
            auto one = generate_demand(si, 1, inst.horizon.slot_count(), means[i], shape, prefix);
            inst.demands.demand.push_back(one[0]);
        }
    } else {
        fail("demand", "either matrix or generator required");
    }

    if (j.contains("compat") && j.at("compat").contains("matrix")) {
        inst.compat.im = parse_int_matrix(j.at("compat").at("matrix"), "compat.matrix");
    } else if (j.contains("compat") && j.at("compat").contains("level")) {
        int level = j.at("compat").at("level").get<int>();
        if (level < 1 || level > 4) fail("compat.level", "must be within 1..4");
        if (K != 3 || inst.network.n_shelters > 10)
            fail("compat.level", "sparsity levels are defined for 3 types and <= 10 shelters");
        const auto& full = sparsity_matrix(level);
        inst.compat.im.assign(K, {});
        for (int k = 0; k < K; ++k)
            inst.compat.im[k].assign(full[k].begin(), full[k].begin() + inst.network.n_shelters);
    } else {
        inst.compat.im.assign(K, std::vector<int>(inst.network.n_shelters, 1));
    }

    if (jn.contains("travel_energy")) {
        const auto& jte = jn.at("travel_energy");
        if (jte.is_array() && !jte.empty() && jte[0].is_array() && !jte[0].empty() &&
            jte[0][0].is_array()) {
            for (const auto& m : jte)
                inst.network.travel_energy.push_back(parse_double_matrix(m, "network.travel_energy"));
        } else {
            auto shared = parse_double_matrix(jte, "network.travel_energy");
            inst.network.travel_energy.assign(K, shared);
        }
    } else {
        derive_travel_energy(inst);
    }

    inst.big_m1 = 1000.0;
    inst.big_m2 = 2.0 * inst.demands.total();
    if (j.contains("big_m")) {
        inst.big_m1 = j.at("big_m").value("m1", inst.big_m1);
        inst.big_m2 = j.at("big_m").value("m2", inst.big_m2);
    }
    if (inst.big_m2 <= 0) inst.big_m2 = 1.0; // all-zero demand still needs a positive M2

    inst.validate();
    return inst;
}

Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open instance file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_instance_json(ss.str(), path);
}

std::string instance_to_json(const Instance& inst) {
    json j;
    j["horizon"] = {{"slot_minutes", inst.horizon.slot_minutes},
                    {"first_slot", inst.horizon.first_slot},
                    {"last_slot", inst.horizon.last_slot}};
    j["esb_types"] = json::array();
    for (const auto& t : inst.types)
        j["esb_types"].push_back({{"id", t.id},
                                  {"invest_cost", t.invest_cost},
                                  {"cap_max", t.cap_max},
                                  {"cap_min", t.cap_min},
                                  {"discharge_min", t.discharge_min},
                                  {"consumption_rate", t.consumption_rate},
                                  {"available_count", t.available_count}});
    j["network"] = {{"n_shelters", inst.network.n_shelters},
                    {"n_stations", inst.network.n_stations},
                    {"travel_slots", inst.network.travel_slots},
                    {"travel_energy", inst.network.travel_energy},
                    {"service_slots",
                     {{"shelters", inst.network.service_shelter},
                      {"stations", inst.network.service_station}}}};
    j["demand"] = {{"matrix", inst.demands.demand}};
    j["compat"] = {{"matrix", inst.compat.im}};
    json costs = {{"energy_cost", inst.energy_cost}, {"penalty", inst.demands.penalty}};
    if (inst.demands.has_shift_fee()) costs["shift_fee"] = inst.demands.shift_fee;
    j["costs"] = costs;
    j["big_m"] = {{"m1", inst.big_m1}, {"m2", inst.big_m2}};
    return j.dump(2);
}

void save_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open file for writing");
    out << instance_to_json(inst) << "\n";
}

Instance apply_severity(const Instance& inst, Severity level) {
    if (level == Severity::Normal) return inst;
    Instance out = inst;
    const int nn = inst.network.n_nodes();
    for (int k = 0; k < inst.n_types(); ++k) {
        double factor = level == Severity::Moderate ? 1.2 : 1.5;
        out.types[k].consumption_rate = inst.types[k].consumption_rate * factor;
        for (int a = 0; a < nn; ++a)
            for (int b = 0; b < nn; ++b) {
                int s = inst.network.travel_slots[k][a][b];
                if (s > 0) s = level == Severity::Moderate ? s + 1 : 2 * s;
                out.network.travel_slots[k][a][b] = s;
            }
    }
    derive_travel_energy(out);
    return out;
}

const std::vector<std::vector<int>>& sparsity_matrix(int level) {
    static const std::vector<std::vector<std::vector<int>>> sl = {
        {{1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
         {1, 1, 1, 1, 1, 1, 1, 1, 1, 1},
         {1, 1, 1, 1, 1, 1, 1, 1, 1, 1}},
        {{1, 1, 0, 1, 0, 1, 1, 1, 0, 1},
         {1, 1, 1, 1, 1, 0, 1, 1, 1, 0},
         {1, 0, 1, 0, 1, 1, 1, 0, 1, 1}},
        {{1, 1, 0, 1, 0, 1, 1, 0, 0, 1},
         {0, 1, 0, 1, 1, 0, 0, 1, 0, 0},
         {1, 0, 1, 0, 0, 1, 1, 0, 1, 1}},
        {{1, 0, 0, 1, 0, 0, 1, 0, 0, 1},
         {0, 1, 0, 0, 1, 0, 0, 1, 0, 0},
         {0, 0, 1, 0, 0, 1, 0, 0, 1, 0}}};
    if (level < 1 || level > 4) throw std::runtime_error("sparsity level must be within 1..4");
    return sl[level - 1];
}

Instance apply_sparsity(const Instance& inst, int level) {
    if (inst.n_types() != 3 || inst.n_shelters() > 10)
        throw std::runtime_error(
            "apply_sparsity: matrices are defined for 3 types and <= 10 shelters");
    Instance out = inst;
    const auto& full = sparsity_matrix(level);
    out.compat.im.assign(3, {});
    for (int k = 0; k < 3; ++k)
        out.compat.im[k].assign(full[k].begin(), full[k].begin() + inst.n_shelters());
    return out;
}

std::vector<std::vector<double>> generate_demand(unsigned seed, int shelters, int slots,
                                                 double mean_kwh, DemandShape shape,
                                                 int zero_prefix) {
    if (mean_kwh < 0) throw std::runtime_error("generate_demand: mean must be >= 0");
    if (slots <= zero_prefix)
        throw std::runtime_error("generate_demand: slots must exceed the zero prefix");
    std::vector<std::vector<double>> out(shelters, std::vector<double>(slots, 0.0));
    for (int i = 0; i < shelters; ++i) {
        std::mt19937 rng(static_cast<uint32_t>(splitmix64(seed * 2654435761ULL + i)));
        for (int t = zero_prefix; t < slots; ++t) {
            // mt19937 output is bit-identical everywhere; avoid distributions, which are not.
            double u = rng() / 4294967296.0;
            double v;
            if (shape == DemandShape::Flat)
                v = mean_kwh;
            else
                v = (100.0 + 150.0 * u) * (mean_kwh / 175.0);
            out[i][t] = std::round(v * 1000.0) / 1000.0;
        }
    }
    return out;
}

Instance case_study_instance(unsigned demand_seed, int shelters, int stations, int slots) {
    if (shelters < 1 || shelters > 10 || stations < 1 || stations > 3)
        throw std::runtime_error("case_study_instance: supports 1..10 shelters, 1..3 stations");

    Instance inst;
    inst.horizon = {15.0, 0, slots - 1};
    inst.types = {{1, 250000, 100, 10, 10, 38.19, 50},
                  {2, 350000, 300, 30, 30, 53.46, 50},
                  {3, 450000, 500, 50, 50, 76.38, 50}};

    // Shelter-to-{shelters, depot, stations} travel slots; depot/station pairs are never
    // traversed by the model and stay zero.
    static const int tt[10][14] = {
        {0, 1, 1, 3, 2, 2, 3, 2, 2, 3, 1, 2, 3, 2}, {1, 0, 1, 3, 2, 2, 3, 3, 3, 3, 1, 2, 3, 2},
        {1, 1, 0, 3, 2, 2, 3, 2, 2, 3, 1, 2, 2, 2}, {3, 3, 3, 0, 2, 3, 5, 3, 2, 2, 3, 3, 1, 2},
        {2, 2, 2, 2, 0, 2, 4, 2, 2, 2, 2, 1, 2, 1}, {2, 2, 2, 3, 2, 0, 2, 2, 3, 3, 2, 2, 3, 2},
        {3, 3, 3, 5, 4, 2, 0, 3, 4, 4, 3, 3, 4, 4}, {2, 3, 2, 3, 2, 2, 3, 0, 2, 2, 2, 2, 2, 2},
        {2, 3, 2, 2, 2, 3, 4, 2, 0, 2, 3, 3, 2, 1}, {3, 3, 3, 2, 2, 3, 4, 2, 2, 0, 3, 2, 1, 2}};
    static const int service_shelter_full[10] = {1, 1, 2, 3, 2, 3, 1, 1, 3, 3};
    static const int service_station_full[3] = {1, 2, 1};

    inst.network.n_shelters = shelters;
    inst.network.n_stations = stations;
    const int nn = inst.network.n_nodes();
    std::vector<std::vector<int>> ts(nn, std::vector<int>(nn, 0));
    for (int i = 0; i < shelters; ++i) {
        for (int i2 = 0; i2 < shelters; ++i2) ts[1 + i][1 + i2] = tt[i][i2];
        ts[1 + i][0] = ts[0][1 + i] = tt[i][10];
        for (int j = 0; j < stations; ++j)
            ts[1 + i][1 + shelters + j] = ts[1 + shelters + j][1 + i] = tt[i][11 + j];
    }
    inst.network.travel_slots.assign(3, ts);
    inst.network.service_shelter.assign(service_shelter_full, service_shelter_full + shelters);
    inst.network.service_station.assign(service_station_full, service_station_full + stations);
    derive_travel_energy(inst);

    static const double mean_full[10] = {175, 175, 175, 175, 175, 175, 85, 60, 240, 240};
    int prefix = inst.max_depot_travel();
    inst.demands.demand.clear();
    for (int i = 0; i < shelters; ++i) {
        unsigned si = static_cast<unsigned>(splitmix64(demand_seed * 1000003ULL + i));
        auto one = generate_demand(si, 1, slots, mean_full[i], DemandShape::MegaShelter, prefix);
        inst.demands.demand.push_back(one[0]);
    }
    inst.demands.penalty.assign(shelters, 1000.0);
    inst.compat.im.assign(3, std::vector<int>(shelters, 1));
    inst.energy_cost = 0.25;
    inst.big_m1 = 1000.0;
    inst.big_m2 = 2.0 * inst.demands.total();
    inst.validate();
    return inst;
}

} // namespace esbilr
