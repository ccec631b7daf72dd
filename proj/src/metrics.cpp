#include "esbilr/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace esbilr {

double effective_usable_capacity(const EsbType& type, double t_avg_hours) {
    if (t_avg_hours < 0) throw std::runtime_error("effective_usable_capacity: t_avg must be >= 0");
    return type.cap_max - type.cap_min - 2.0 * t_avg_hours * type.consumption_rate;
}

std::optional<double> capacity_cost(const EsbType& type, double t_avg_hours) {
    double zeta = effective_usable_capacity(type, t_avg_hours);
    if (zeta <= 0) return std::nullopt;
    return type.invest_cost / zeta;
}

std::optional<UtilizationResult> capacity_utilization(const std::vector<EsbType>& types,
                                                      const std::vector<double>& cost_mix,
                                                      double t_avg_hours,
                                                      double demand_increment_kwh) {
    if (cost_mix.size() != types.size())
        throw std::runtime_error("capacity_utilization: one mix entry per type required");
    double sum = 0.0;
    for (double v : cost_mix) {
        if (v < 0) throw std::runtime_error("capacity_utilization: mix entries must be >= 0");
        sum += v;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::runtime_error("capacity_utilization: mix must sum to 1");
    double zeta_bar = 0.0;
    for (size_t k = 0; k < types.size(); ++k)
        zeta_bar += cost_mix[k] * effective_usable_capacity(types[k], t_avg_hours);
    if (zeta_bar <= 0) return std::nullopt;
    return UtilizationResult{zeta_bar, demand_increment_kwh / zeta_bar};
}

double mean_access_time_hours(const Instance& inst, int type) {
    double total = 0.0;
    int count = 0;
    for (int i = 0; i < inst.n_shelters(); ++i) {
        if (!inst.compatible(type, i)) continue;
        int node = inst.network.shelter_node(i);
        total += inst.travel(type, 0, node);
        ++count;
        for (int j = 0; j < inst.n_stations(); ++j) {
            total += inst.travel(type, inst.network.station_node(j), node);
            ++count;
        }
    }
    if (count == 0) return 0.0;
    return total / count * inst.horizon.slot_hours();
}

} // namespace esbilr
