#ifndef ESBILR_INSTANCE_HPP
#define ESBILR_INSTANCE_HPP

#include <string>
#include <vector>

namespace esbilr {

/// One ESB type. Energies in kWh, rates in kWh/h, money in currency units.
struct EsbType {
    int id = 0;
    double invest_cost = 0.0;
    double cap_max = 0.0;
    double cap_min = 0.0;
    double discharge_min = 0.0;    // minimum kWh per active serving slot
    double consumption_rate = 0.0; // kWh per hour of travel
    int available_count = 0;

    double usable() const { return cap_max - cap_min; }
};

struct Horizon {
    double slot_minutes = 15.0;
    int first_slot = 0;
    int last_slot = 0;

    int slot_count() const { return last_slot - first_slot + 1; }
    double slot_hours() const { return slot_minutes / 60.0; }
};

/// Node layout: depot = 0, shelters 1..n_shelters, stations n_shelters+1 .. n_shelters+n_stations.
/// Travel tables are stored per type; loaders duplicate a shared table across types.
struct Network {
    int n_shelters = 0;
    int n_stations = 0;
    std::vector<std::vector<std::vector<int>>> travel_slots;     // [type][from][to]
    std::vector<std::vector<std::vector<double>>> travel_energy; // [type][from][to], kWh
    std::vector<int> service_shelter; // S_i, slots
    std::vector<int> service_station; // S_j, slots

    int n_nodes() const { return 1 + n_shelters + n_stations; }
    int depot() const { return 0; }
    int shelter_node(int i) const { return 1 + i; }
    int station_node(int j) const { return 1 + n_shelters + j; }
    bool is_shelter(int node) const { return node >= 1 && node <= n_shelters; }
    bool is_station(int node) const { return node > n_shelters && node < n_nodes(); }
    int shelter_of(int node) const { return node - 1; }
    int station_of(int node) const { return node - 1 - n_shelters; }
};

struct DemandProfile {
    std::vector<std::vector<double>> demand; // [shelter][slot], kWh deliverable within the slot
    std::vector<double> penalty;             // F_i, currency per kWh unmet
    std::vector<std::vector<double>> shift_fee; // F'_{i,t}, empty when shifting is not modeled

    bool has_shift_fee() const { return !shift_fee.empty(); }
    double total() const;
    double shelter_total(int i) const;
};

struct CompatibilityMatrix {
    std::vector<std::vector<int>> im; // [type][shelter] in {0,1}

    bool compatible(int type, int shelter) const { return im[type][shelter] != 0; }
};

enum class Severity { Normal, Moderate, Adverse };
enum class DemandShape { MegaShelter, Flat };

struct Instance {
    std::vector<EsbType> types;
    Network network;
    Horizon horizon;
    DemandProfile demands;
    CompatibilityMatrix compat;
    double energy_cost = 0.0; // C_fx, currency per kWh of transport energy
    double big_m1 = 1000.0;
    double big_m2 = 0.0;

    int n_types() const { return static_cast<int>(types.size()); }
    int n_shelters() const { return network.n_shelters; }
    int n_stations() const { return network.n_stations; }
    int travel(int type, int from, int to) const { return network.travel_slots[type][from][to]; }
    double travel_kwh(int type, int from, int to) const { return network.travel_energy[type][from][to]; }
    bool compatible(int type, int shelter) const { return compat.compatible(type, shelter); }
    std::vector<int> compatible_shelters(int type) const;
    std::vector<int> compatible_types(int shelter) const;
    int max_depot_travel() const; // max_{i,k} T_{0,i}

    /// Throws std::runtime_error naming the offending field on the first violated invariant.
    void validate() const;
};

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);
Instance parse_instance_json(const std::string& text, const std::string& origin = "<string>");
std::string instance_to_json(const Instance& inst);

Instance apply_severity(const Instance& inst, Severity level);

/// Replaces the compatibility matrix with the sparsity-level matrix (levels 1..4),
/// truncated to the instance's shelter count. Requires <= 10 shelters and exactly 3 types.
Instance apply_sparsity(const Instance& inst, int level);

/// Deterministic demand generator. Values land in the 100..250 kWh band scaled by
/// mean/175 for MegaShelter, or exactly mean for Flat; the first zero_prefix slots are zero.
std::vector<std::vector<double>> generate_demand(unsigned seed, int shelters, int slots,
                                                 double mean_kwh, DemandShape shape,
                                                 int zero_prefix = 3);

/// Bundled case study instance (10 shelters, 3 stations, 3 types, 48 slots of 15 min).
Instance case_study_instance(unsigned demand_seed = 7, int shelters = 10, int stations = 3,
                             int slots = 48);

const std::vector<std::vector<int>>& sparsity_matrix(int level);

} // namespace esbilr

#endif
