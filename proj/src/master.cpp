#include "esbilr/master.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "esbilr/milp.hpp"

namespace esbilr {

ColumnPool::ColumnPool(const Instance& inst)
    : inst_(inst), by_type_(inst.n_types()), index_(Cmp{&routes_}) {}

int ColumnPool::add(Route r) {
    auto viol = validate(r, inst_);
    if (!viol.empty())
        throw std::runtime_error("ColumnPool::add: invalid column: " + viol.front());
    routes_.push_back(std::move(r));
    auto [it, inserted] = index_.insert(static_cast<int>(routes_.size()) - 1);
    if (!inserted) {
        routes_.pop_back();
        return *it;
    }
    int p = static_cast<int>(routes_.size()) - 1;
    by_type_[routes_[p].esb_type].push_back(p);
    return p;
}

bool ColumnPool::contains(const Route& r) const {
    for (int p : by_type_[r.esb_type])
        if (route_equal(routes_[p], r)) return true;
    return false;
}

std::string agg_family_name(AggFamily f) {
    switch (f) {
        case AggFamily::NEb: return "n_eb";
        case AggFamily::Fi: return "f";
        case AggFamily::Dit: return "d";
        case AggFamily::Bik: return "b";
        case AggFamily::Mitk: return "m";
        case AggFamily::Vij: return "v";
        case AggFamily::Wijk: return "w";
        case AggFamily::Ai: return "a";
        case AggFamily::Eik: return "e";
        case AggFamily::Lambda: return "lambda";
    }
    return "?";
}

std::string BranchBound::text() const {
    std::string s = agg_family_name(family) + "[";
    bool first = true;
    for (int v : {k, i, j, t, column}) {
        if (v < 0) continue;
        if (!first) s += ",";
        s += std::to_string(v);
        first = false;
    }
    s += upper ? "] <= " : "] >= ";
    s += std::to_string(rhs);
    return s;
}

namespace {

/// Coefficient of one column in the family member (f, k, i, j, t); slots are
/// horizon-relative.
double column_coef(AggFamily f, int k, int i, int j, int t, int T1, const Route& r,
                   const Coverage& cov) {
    switch (f) {
        case AggFamily::NEb:
            return r.esb_type == k ? 1.0 : 0.0;
        case AggFamily::Bik:
            if (r.esb_type != k) return 0.0;
            [[fallthrough]];
        case AggFamily::Fi: {
            double c = 0.0;
            for (auto [si, st] : cov.serve) c += si == i;
            return c;
        }
        case AggFamily::Mitk:
            if (r.esb_type != k) return 0.0;
            [[fallthrough]];
        case AggFamily::Dit: {
            double c = 0.0;
            for (auto [si, st] : cov.serve) c += si == i && st - T1 == t;
            return c;
        }
        case AggFamily::Wijk:
            if (r.esb_type != k) return 0.0;
            [[fallthrough]];
        case AggFamily::Vij: {
            for (auto [key, n] : cov.cs_arc)
                if (key.first == i && key.second == j) return n;
            return 0.0;
        }
        case AggFamily::Eik:
            if (r.esb_type != k) return 0.0;
            [[fallthrough]];
        case AggFamily::Ai: {
            for (auto [si, n] : cov.endpoints)
                if (si == i) return n;
            return 0.0;
        }
        case AggFamily::Lambda:
            return 0.0;
    }
    return 0.0;
}

struct FamilyKey {
    AggFamily f;
    int k, i, j, t;
    bool operator<(const FamilyKey& o) const {
        return std::tie(f, k, i, j, t) < std::tie(o.f, o.k, o.i, o.j, o.t);
    }
};

struct MasterLp {
    LinearProgram lp;
    std::vector<int> lambda_var;
    std::vector<int> unmet_var;
    std::vector<std::vector<int>> shift_var;
    std::vector<int> coverage_row;
    std::vector<std::vector<int>> shift_row;
    std::vector<int> avail_row;
    std::map<FamilyKey, std::pair<int, int>> family_rows; // key -> (row, agg var)
    std::vector<Coverage> covs;
};

MasterLp build_master_lp(const ColumnPool& pool, const Instance& inst,
                         const BranchBoundSet& branches, bool shift) {
    MasterLp m;
    const int I = inst.n_shelters(), K = inst.n_types();
    const int T = inst.horizon.slot_count(), T1 = inst.horizon.first_slot;

    m.covs.reserve(pool.size());
    for (int p = 0; p < pool.size(); ++p) m.covs.push_back(coverage(pool.route(p), inst));

    m.lambda_var.resize(pool.size());
    for (int p = 0; p < pool.size(); ++p)
        m.lambda_var[p] = m.lp.add_var(0.0, kInf, pool.route(p).cost);
    m.unmet_var.resize(I);
    for (int i = 0; i < I; ++i) m.unmet_var[i] = m.lp.add_var(0.0, kInf, inst.demands.penalty[i]);
    if (shift) {
        m.shift_var.assign(I, std::vector<int>(T, -1));
        for (int i = 0; i < I; ++i)
            for (int t = 0; t < T; ++t) {
                double fee = inst.demands.has_shift_fee() ? inst.demands.shift_fee[i][t] : 0.0;
                m.shift_var[i][t] = m.lp.add_var(0.0, kInf, fee);
            }
    }

    m.coverage_row.resize(I);
    for (int i = 0; i < I; ++i) {
        std::vector<std::pair<int, double>> c;
        for (int p = 0; p < pool.size(); ++p)
            for (auto [si, kwh] : m.covs[p].g_sum)
                if (si == i) c.push_back({m.lambda_var[p], kwh});
        c.push_back({m.unmet_var[i], 1.0});
        m.coverage_row[i] = m.lp.add_row(Sense::GE, inst.demands.shelter_total(i), std::move(c));
    }
    if (shift) {
        m.shift_row.assign(I, std::vector<int>(T, -1));
        for (int i = 0; i < I; ++i)
            for (int t = 0; t < T; ++t) {
                std::vector<std::pair<int, double>> c;
                for (int p = 0; p < pool.size(); ++p)
                    for (auto [si, st, kwh] : m.covs[p].g_slot)
                        if (si == i && st - T1 == t) c.push_back({m.lambda_var[p], kwh});
                c.push_back({m.shift_var[i][t], 1.0});
                m.shift_row[i][t] = m.lp.add_row(Sense::GE, inst.demands.demand[i][t], std::move(c));
            }
    }
    m.avail_row.assign(K, -1);
    for (int k = 0; k < K; ++k) {
        if (pool.of_type(k).empty()) continue;
        std::vector<std::pair<int, double>> c;
        for (int p : pool.of_type(k)) c.push_back({m.lambda_var[p], 1.0});
        m.avail_row[k] = m.lp.add_row(Sense::LE, inst.types[k].available_count, std::move(c));
    }

    // defining rows only for families carrying an active bound
    for (const auto& b : branches.bounds) {
        if (b.family == AggFamily::Lambda) {
            if (b.column >= 0 && b.column < pool.size()) {
                int v = m.lambda_var[b.column];
                if (b.upper) m.lp.up[v] = std::min(m.lp.up[v], double(b.rhs));
                else m.lp.lo[v] = std::max(m.lp.lo[v], double(b.rhs));
            }
            continue;
        }
        FamilyKey key{b.family, b.k, b.i, b.j, b.t};
        auto it = m.family_rows.find(key);
        int agg_var;
        if (it == m.family_rows.end()) {
            agg_var = m.lp.add_var(0.0, kInf, 0.0);
            std::vector<std::pair<int, double>> c{{agg_var, 1.0}};
            for (int p = 0; p < pool.size(); ++p) {
                double coef =
                    column_coef(b.family, b.k, b.i, b.j, b.t, T1, pool.route(p), m.covs[p]);
                if (coef != 0.0) c.push_back({m.lambda_var[p], -coef});
            }
            int row = m.lp.add_row(Sense::EQ, 0.0, std::move(c));
            m.family_rows[key] = {row, agg_var};
        } else {
            agg_var = it->second.second;
        }
        if (b.upper) m.lp.up[agg_var] = std::min(m.lp.up[agg_var], double(b.rhs));
        else m.lp.lo[agg_var] = std::max(m.lp.lo[agg_var], double(b.rhs));
    }
    return m;
}

} // namespace

void export_rlmp(const ColumnPool& pool, const Instance& inst, const BranchBoundSet& branches,
                 bool shift, const std::string& path) {
    MasterLp m = build_master_lp(pool, inst, branches, shift);
    for (int p = 0; p < pool.size(); ++p)
        m.lp.col_name[m.lambda_var[p]] = "lambda" + std::to_string(p);
    for (int i = 0; i < inst.n_shelters(); ++i) {
        m.lp.col_name[m.unmet_var[i]] = "l" + std::to_string(i);
        m.lp.row_name[m.coverage_row[i]] = "cover" + std::to_string(i);
    }
    write_lp_text(m.lp, std::vector<char>(m.lp.n_vars(), 0), path);
}

MasterSolution solve_rlmp(const ColumnPool& pool, const Instance& inst,
                          const BranchBoundSet& branches, bool shift) {
    MasterLp m = build_master_lp(pool, inst, branches, shift);
    LpResult r = lp_solve(m.lp);
    MasterSolution out;
    if (r.status == LpStatus::Infeasible) return out; // node prunable
    if (r.status != LpStatus::Optimal)
        throw std::runtime_error("solve_rlmp: LP did not solve to optimality");

    out.feasible = true;
    out.objective = r.objective;
    out.dual_objective = r.dual_objective;
    if (std::fabs(out.objective - out.dual_objective) >
        1e-6 * (1.0 + std::fabs(out.objective)))
        throw std::runtime_error("solve_rlmp: strong duality audit failed");
    out.lambda.resize(pool.size());
    for (int p = 0; p < pool.size(); ++p) out.lambda[p] = r.x[m.lambda_var[p]];
    out.unmet.resize(inst.n_shelters());
    for (int i = 0; i < inst.n_shelters(); ++i) out.unmet[i] = r.x[m.unmet_var[i]];
    if (shift) {
        out.shift_unmet.assign(inst.n_shelters(),
                               std::vector<double>(inst.horizon.slot_count(), 0.0));
        for (int i = 0; i < inst.n_shelters(); ++i)
            for (int t = 0; t < inst.horizon.slot_count(); ++t)
                out.shift_unmet[i][t] = r.x[m.shift_var[i][t]];
    }

    out.duals = DualPrices::zeros(inst);
    for (int i = 0; i < inst.n_shelters(); ++i) out.duals.pi[i] = r.duals[m.coverage_row[i]];
    if (shift)
        for (int i = 0; i < inst.n_shelters(); ++i)
            for (int t = 0; t < inst.horizon.slot_count(); ++t)
                out.duals.delta[i][t] = r.duals[m.shift_row[i][t]];
    for (int k = 0; k < inst.n_types(); ++k)
        if (m.avail_row[k] >= 0) out.duals.psi[k] -= r.duals[m.avail_row[k]];
    for (const auto& [key, rowvar] : m.family_rows) {
        double y = r.duals[rowvar.first];
        switch (key.f) {
            case AggFamily::NEb: out.duals.psi[key.k] += y; break;
            case AggFamily::Fi: out.duals.mu[key.i] += y; break;
            case AggFamily::Bik: out.duals.mu_k[key.k][key.i] += y; break;
            case AggFamily::Dit: out.duals.rho[key.i][key.t] += y; break;
            case AggFamily::Mitk: out.duals.rho_k[key.k][key.i][key.t] += y; break;
            case AggFamily::Vij: out.duals.eta[key.i][key.j] += y; break;
            case AggFamily::Wijk: out.duals.eta_k[key.k][key.i][key.j] += y; break;
            case AggFamily::Ai: out.duals.theta[key.i] += y; break;
            case AggFamily::Eik: out.duals.theta_k[key.k][key.i] += y; break;
            case AggFamily::Lambda: break;
        }
    }
    return out;
}

IntegerMasterResult solve_milp_master(const ColumnPool& pool, const Instance& inst, bool shift,
                                      int node_cap) {
    BranchBoundSet none;
    MasterLp m = build_master_lp(pool, inst, none, shift);
    std::vector<char> is_int(m.lp.n_vars(), 0);
    for (int v : m.lambda_var) is_int[v] = 1;
    MilpOptions opt;
    opt.node_cap = node_cap;
    MilpResult r = milp_solve(m.lp, is_int, opt);
    IntegerMasterResult out;
    out.feasible = r.feasible;
    out.proven = r.proven;
    if (!r.feasible) return out;
    out.objective = r.objective;
    out.bound = r.bound;
    out.lambda.resize(pool.size());
    for (int p = 0; p < pool.size(); ++p) out.lambda[p] = r.x[m.lambda_var[p]];
    out.unmet.resize(inst.n_shelters());
    for (int i = 0; i < inst.n_shelters(); ++i) out.unmet[i] = r.x[m.unmet_var[i]];
    if (shift) {
        out.shift_unmet.assign(inst.n_shelters(),
                               std::vector<double>(inst.horizon.slot_count(), 0.0));
        for (int i = 0; i < inst.n_shelters(); ++i)
            for (int t = 0; t < inst.horizon.slot_count(); ++t)
                out.shift_unmet[i][t] = r.x[m.shift_var[i][t]];
    }
    return out;
}

double aggregate_value(AggFamily f, int k, int i, int j, int t, const ColumnPool& pool,
                       const Instance& inst, const std::vector<double>& lambda) {
    double v = 0.0;
    const int T1 = inst.horizon.first_slot;
    for (int p = 0; p < pool.size(); ++p) {
        if (lambda[p] == 0.0) continue;
        Coverage cov = coverage(pool.route(p), inst);
        v += lambda[p] * column_coef(f, k, i, j, t, T1, pool.route(p), cov);
    }
    return v;
}

namespace {

double fractionality(double v) {
    double f = v - std::floor(v);
    return std::min(f, 1.0 - f);
}

struct Candidate {
    bool found = false;
    AggFamily f = AggFamily::Lambda;
    int k = -1, i = -1, j = -1, t = -1, column = -1;
    double value = 0.0;
    double frac = 0.0;
};

} // namespace

BranchDecision pick_branch(const MasterSolution& sol, const ColumnPool& pool,
                           const Instance& inst) {
    const double tol = 1e-6;
    const int I = inst.n_shelters(), J = inst.n_stations(), K = inst.n_types();
    const int T = inst.horizon.slot_count(), T1 = inst.horizon.first_slot;
    BranchDecision dec;

    std::vector<Coverage> covs;
    covs.reserve(pool.size());
    for (int p = 0; p < pool.size(); ++p) covs.push_back(coverage(pool.route(p), inst));

    auto agg = [&](AggFamily f, int k, int i, int j, int t) {
        double v = 0.0;
        for (int p = 0; p < pool.size(); ++p)
            if (sol.lambda[p] != 0.0)
                v += sol.lambda[p] * column_coef(f, k, i, j, t, T1, pool.route(p), covs[p]);
        return v;
    };

    auto with = [&](Candidate& best, AggFamily f, int k, int i, int j, int t) {
        if (best.found) return; // lowest index within a family
        double v = agg(f, k, i, j, t);
        double fr = fractionality(v);
        if (fr > tol) best = {true, f, k, i, j, t, -1, v, fr};
    };

    auto decide = [&](const Candidate& c) {
        dec.integral = false;
        dec.value = c.value;
        dec.down = {c.f, c.k, c.i, c.j, c.t, c.column, true, (int)std::floor(c.value)};
        dec.up = {c.f, c.k, c.i, c.j, c.t, c.column, false, (int)std::ceil(c.value)};
        return dec;
    };

    {
        Candidate c;
        for (int k = 0; k < K && !c.found; ++k) with(c, AggFamily::NEb, k, -1, -1, -1);
        if (c.found) return decide(c);
    }
    {
        Candidate cands[4];
        for (int i = 0; i < I && !cands[0].found; ++i) with(cands[0], AggFamily::Fi, -1, i, -1, -1);
        for (int i = 0; i < I && !cands[1].found; ++i)
            for (int t = 0; t < T && !cands[1].found; ++t)
                with(cands[1], AggFamily::Dit, -1, i, -1, t);
        for (int i = 0; i < I && !cands[2].found; ++i)
            for (int k = 0; k < K && !cands[2].found; ++k)
                with(cands[2], AggFamily::Bik, k, i, -1, -1);
        for (int i = 0; i < I && !cands[3].found; ++i)
            for (int t = 0; t < T && !cands[3].found; ++t)
                for (int k = 0; k < K && !cands[3].found; ++k)
                    with(cands[3], AggFamily::Mitk, k, i, -1, t);
        const Candidate* best = nullptr;
        for (const auto& c : cands)
            if (c.found && (!best || c.frac > best->frac + 1e-12)) best = &c;
        if (best) return decide(*best);
    }
    {
        Candidate cands[4];
        for (int i = 0; i < I && !cands[0].found; ++i)
            for (int j = 0; j < J && !cands[0].found; ++j)
                with(cands[0], AggFamily::Vij, -1, i, j, -1);
        for (int i = 0; i < I && !cands[1].found; ++i)
            for (int j = 0; j < J && !cands[1].found; ++j)
                for (int k = 0; k < K && !cands[1].found; ++k)
                    with(cands[1], AggFamily::Wijk, k, i, j, -1);
        for (int i = 0; i < I && !cands[2].found; ++i) with(cands[2], AggFamily::Ai, -1, i, -1, -1);
        for (int i = 0; i < I && !cands[3].found; ++i)
            for (int k = 0; k < K && !cands[3].found; ++k)
                with(cands[3], AggFamily::Eik, k, i, -1, -1);
        const Candidate* best = nullptr;
        for (const auto& c : cands)
            if (c.found && (!best || c.frac > best->frac + 1e-12)) best = &c;
        if (best) return decide(*best);
    }
    for (int p = 0; p < pool.size(); ++p) {
        if (fractionality(sol.lambda[p]) > tol) {
            Candidate c{true, AggFamily::Lambda, -1, -1, -1, -1, p, sol.lambda[p],
                        fractionality(sol.lambda[p])};
            BranchDecision d = decide(c);
            d.down.column = p;
            d.up.column = p;
            return d;
        }
    }
    dec.integral = true;
    return dec;
}

std::vector<Route> initial_columns(const Instance& inst) {
    std::vector<Route> out;
    const int T1 = inst.horizon.first_slot, T2 = inst.horizon.last_slot;
    for (int k = 0; k < inst.n_types(); ++k) {
        if (inst.types[k].available_count <= 0) continue;
        const auto& tp = inst.types[k];
        for (int i = 0; i < inst.n_shelters(); ++i) {
            if (!inst.compatible(k, i)) continue;
            int node = inst.network.shelter_node(i);
            int si = inst.network.service_shelter[i];
            if (T1 + inst.travel(k, 0, node) + si >= T2) continue; // never fits
            double budget = tp.usable() - inst.travel_kwh(k, 0, node) - inst.travel_kwh(k, node, 0);
            double floor_total = si * tp.discharge_min;
            if (budget < floor_total - 1e-9) continue; // unusable pairing
            double want = std::min({budget, si * tp.usable(),
                                    std::max(inst.demands.shelter_total(i), floor_total)});
            std::vector<double> g(si, want / si);
            out.push_back(build_route(inst, k, T1, {{i, g}}, {}));
        }
    }
    return out;
}

} // namespace esbilr
