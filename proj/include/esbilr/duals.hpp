#ifndef ESBILR_DUALS_HPP
#define ESBILR_DUALS_HPP

#include <vector>

#include "esbilr/instance.hpp"

namespace esbilr {

/// Dual snapshot consumed by pricing. pi/delta are credits per discharged kWh
/// (coverage rows, nonnegative); the rest are per-event charges added to a
/// route's reduced cost (branching rows, any sign). psi is charged once per route.
struct DualPrices {
    std::vector<double> pi;                               // [shelter]
    std::vector<double> psi;                              // [type]
    std::vector<double> mu;                               // [shelter]
    std::vector<std::vector<double>> mu_k;                // [type][shelter]
    std::vector<std::vector<double>> rho;                 // [shelter][slot]
    std::vector<std::vector<std::vector<double>>> rho_k;  // [type][shelter][slot]
    std::vector<std::vector<double>> eta;                 // [shelter][station]
    std::vector<std::vector<std::vector<double>>> eta_k;  // [type][shelter][station]
    std::vector<double> theta;                            // [shelter]
    std::vector<std::vector<double>> theta_k;             // [type][shelter]
    std::vector<std::vector<double>> delta;               // [shelter][slot], shift rows

    static DualPrices zeros(const Instance& inst);
    bool shaped_for(const Instance& inst) const;
    bool time_indexed_nonzero() const;

    /// Charge for one serving slot of `shelter` at `slot` by a type-`k` route.
    double serve_charge(int k, int shelter, int slot) const {
        return mu[shelter] + mu_k[k][shelter] + rho[shelter][slot] + rho_k[k][shelter][slot];
    }
    /// Credit per kWh discharged to `shelter` at `slot`.
    double discharge_credit(int shelter, int slot) const {
        return pi[shelter] + delta[shelter][slot];
    }
    double arc_charge(int k, int shelter, int station) const {
        return eta[shelter][station] + eta_k[k][shelter][station];
    }
    double endpoint_charge(int k, int shelter) const {
        return theta[shelter] + theta_k[k][shelter];
    }
};

} // namespace esbilr

#endif
