#ifndef ESBILR_METRICS_HPP
#define ESBILR_METRICS_HPP

#include <optional>
#include <vector>

#include "esbilr/instance.hpp"

namespace esbilr {

/// zeta^k = cap_max - cap_min - 2 * t_avg * consumption_rate; the deliverable energy
/// per shelter visit after reserving the out-and-back travel. Negative means the
/// type cannot operate at this radius.
double effective_usable_capacity(const EsbType& type, double t_avg_hours);

/// Upsilon^k = invest_cost / zeta^k; currency per kWh of effective usable capacity.
/// Undefined (nullopt) when zeta <= 0.
std::optional<double> capacity_cost(const EsbType& type, double t_avg_hours);

struct UtilizationResult {
    double zeta_bar = 0.0; // fleet-mix-weighted effective usable capacity
    double ratio = 0.0;    // demand_increment / zeta_bar
};

/// cost_mix entries are the per-type cost contributions (sum to 1).
std::optional<UtilizationResult> capacity_utilization(const std::vector<EsbType>& types,
                                                      const std::vector<double>& cost_mix,
                                                      double t_avg_hours,
                                                      double demand_increment_kwh);

/// Unweighted mean travel time, in hours, over (depot-or-station, compatible shelter)
/// pairs for type k.
double mean_access_time_hours(const Instance& inst, int type);

} // namespace esbilr

#endif
