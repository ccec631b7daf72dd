#include "esbilr/milp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>

namespace esbilr {

namespace {

struct Node {
    int id = 0;
    int parent = -1;
    int branch_var = -1;
    double new_lo = -kInf; // one of the two is active
    double new_up = kInf;
    bool is_up_child = false;
    double parent_obj = -kInf;
    bool open = true;
};

} // namespace

MilpResult milp_solve(const LinearProgram& lp, const std::vector<char>& is_int,
                      const MilpOptions& opt) {
    MilpResult res;
    const int n = lp.n_vars();

    std::deque<Node> nodes;
    nodes.push_back(Node{});
    std::vector<double> lo(lp.lo), up(lp.up);
    LinearProgram work = lp;

    double incumbent = opt.cutoff;
    std::vector<double> best_x;
    Basis rolling;

    auto materialize = [&](int id) {
        lo = lp.lo;
        up = lp.up;
        for (int cur = id; cur > 0; cur = nodes[cur].parent) {
            const Node& nd = nodes[cur];
            if (nd.new_lo != -kInf) lo[nd.branch_var] = std::max(lo[nd.branch_var], nd.new_lo);
            if (nd.new_up != kInf) up[nd.branch_var] = std::min(up[nd.branch_var], nd.new_up);
        }
    };

    auto open_best = [&]() {
        int best = -1;
        for (size_t i = 0; i < nodes.size(); ++i) {
            if (!nodes[i].open) continue;
            if (best < 0 || nodes[i].parent_obj < nodes[best].parent_obj - 1e-12) best = (int)i;
        }
        return best;
    };

    int next = 0;
    int processed = 0;
    while (next >= 0) {
        Node& nd = nodes[next];
        nd.open = false;
        ++processed;
        if (processed > opt.node_cap) {
            nd.open = true; // count it back among the open bounds
            break;
        }

        bool prune = false;
        double node_obj = 0.0;
        LpResult sol;
        if (nd.parent_obj >= incumbent - 1e-9) {
            prune = true;
        } else {
            materialize(next);
            work.lo = lo;
            work.up = up;
            sol = lp_solve(work, rolling.empty() ? nullptr : &rolling);
            if (sol.status != LpStatus::Optimal && sol.status != LpStatus::Infeasible &&
                !rolling.empty())
                sol = lp_solve(work, nullptr); // retry cold before giving up on the node
            if (next == 0) res.root_status = sol.status;
            if (sol.status == LpStatus::Infeasible) {
                prune = true;
            } else if (sol.status != LpStatus::Optimal) {
                if (next == 0) return res; // unbounded or numerical at the root
                prune = true;              // conservative: drop the subtree bound
                nd.parent_obj = -kInf;     // cannot certify; keep global bound honest
                nd.open = true;
                break;
            } else {
                rolling = sol.basis;
                node_obj = sol.objective;
                if (node_obj >= incumbent - 1e-9) prune = true;
            }
        }

        int dive_child = -1;
        if (!prune) {
            // most fractional integral variable, ties by lowest index
            int bvar = -1;
            double bscore = opt.int_tol;
            for (int j = 0; j < n; ++j) {
                if (!is_int[j]) continue;
                double v = sol.x[j];
                double f = v - std::floor(v);
                double dist = std::min(f, 1.0 - f);
                if (dist > bscore + 1e-12) {
                    bscore = dist;
                    bvar = j;
                }
            }
            if (bvar < 0) {
                if (node_obj < incumbent - 1e-9) {
                    incumbent = node_obj;
                    best_x = sol.x;
                    for (int j = 0; j < n; ++j)
                        if (is_int[j]) best_x[j] = std::round(best_x[j]);
                    res.feasible = true;
                }
            } else {
                double v = sol.x[bvar];
                Node down;
                down.id = (int)nodes.size();
                down.parent = next;
                down.branch_var = bvar;
                down.new_up = std::floor(v);
                down.parent_obj = node_obj;
                nodes.push_back(down);
                Node upc;
                upc.id = (int)nodes.size();
                upc.parent = next;
                upc.branch_var = bvar;
                upc.new_lo = std::ceil(v);
                upc.is_up_child = true;
                upc.parent_obj = node_obj;
                nodes.push_back(upc);
                dive_child = down.id;
            }
        }

        // next node: dive, else best-bound restart
        if (dive_child >= 0) {
            next = dive_child;
        } else {
            next = open_best();
        }
        if (next >= 0) {
            // gap check against the open-node bound
            double bnd = incumbent;
            for (const auto& o : nodes)
                if (o.open) bnd = std::min(bnd, o.parent_obj);
            if (res.feasible) {
                double g = incumbent == 0.0 ? (bnd >= -1e-9 ? 0.0 : kInf)
                                            : (incumbent - bnd) / std::max(1e-12, std::fabs(incumbent));
                if (g <= opt.gap + 1e-12) break;
            }
        }
    }

    double bnd = res.feasible || incumbent != kInf ? incumbent : kInf;
    for (const auto& o : nodes)
        if (o.open) bnd = std::min(bnd, o.parent_obj);
    res.bound = bnd == kInf ? incumbent : bnd;
    res.nodes = processed;
    if (res.feasible) {
        res.objective = incumbent;
        res.x = best_x;
        res.proven = res.gap() <= opt.gap + 1e-12;
    } else {
        // nothing found: an exhausted tree proves there is no solution below the
        // cutoff (or none at all when no cutoff was given)
        bool any_open = false;
        for (const auto& o : nodes) any_open = any_open || o.open;
        res.proven = !any_open;
        res.objective = kInf;
    }
    return res;
}

} // namespace esbilr
