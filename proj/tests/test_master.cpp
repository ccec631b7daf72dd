#include "doctest.h"

#include <cmath>

#include "esbilr/master.hpp"
#include "test_support.hpp"

using namespace esbilr;
using testsup::make_tiny;

namespace {

Instance one_shelter(double demand_kwh, double penalty = 1000.0) {
    testsup::TinySpec s;
    s.slots = 8;
    s.demand = std::vector<std::vector<double>>(1, std::vector<double>(8, 0.0));
    s.demand[0][3] = demand_kwh;
    s.penalty = penalty;
    Instance inst = make_tiny(s);
    return inst;
}

Route single_visit(const Instance& inst, int type, double g0, int start = 0) {
    return build_route(inst, type, start, {{0, {g0}}}, {});
}

} // namespace

TEST_CASE("rlmp with an empty pool prices unmet demand at the penalty") {
    double D = 120.0, F = 1000.0;
    Instance inst = one_shelter(D, F);
    ColumnPool pool(inst);
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    CHECK(sol.objective == doctest::Approx(F * D));
    CHECK(sol.unmet[0] == doctest::Approx(D));
    CHECK(sol.duals.pi[0] == doctest::Approx(F));
    CHECK(std::fabs(sol.objective - sol.dual_objective) < 1e-6);
}

TEST_CASE("a covering column takes over and the dual drops to cost per kWh") {
    double D = 60.0, F = 10000.0; // paying the penalty must not beat dispatching
    Instance inst = one_shelter(D, F);
    ColumnPool pool(inst);
    Route r = single_visit(inst, 0, D);
    pool.add(r);
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    CHECK(sol.objective == doctest::Approx(r.cost));
    CHECK(sol.lambda[0] == doctest::Approx(1.0));
    CHECK(sol.unmet[0] == doctest::Approx(0.0));
    CHECK(sol.duals.pi[0] == doctest::Approx(r.cost / D));
}

TEST_CASE("degenerate zero-demand master") {
    Instance inst = one_shelter(0.0);
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, 50.0));
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    CHECK(sol.objective == doctest::Approx(0.0));
    CHECK(sol.duals.pi[0] == doctest::Approx(0.0));
    CHECK(sol.lambda[0] == doctest::Approx(0.0));
}

TEST_CASE("branching a type to zero forces the penalty") {
    double D = 60.0, F = 1000.0;
    Instance inst = one_shelter(D, F);
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, D));
    BranchBoundSet branches;
    branches.bounds.push_back({AggFamily::NEb, 0, -1, -1, -1, -1, true, 0});
    MasterSolution sol = solve_rlmp(pool, inst, branches, false);
    REQUIRE(sol.feasible);
    CHECK(sol.objective == doctest::Approx(F * D));
    CHECK(sol.lambda[0] == doctest::Approx(0.0));
}

TEST_CASE("infeasible branch sets certify prunable nodes") {
    Instance inst = one_shelter(60.0);
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, 60.0));
    BranchBoundSet branches;
    // more buses than the fleet owns
    branches.bounds.push_back(
        {AggFamily::NEb, 0, -1, -1, -1, -1, false, inst.types[0].available_count + 1});
    MasterSolution sol = solve_rlmp(pool, inst, branches, false);
    CHECK_FALSE(sol.feasible);
}

TEST_CASE("fractional coverage flags branching on the fleet size first") {
    double cap = 70.0;
    Instance inst = one_shelter(2.5 * cap, 10000.0);
    inst.types[0].available_count = 5;
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, cap));
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    CHECK(sol.lambda[0] == doctest::Approx(2.5));
    BranchDecision dec = pick_branch(sol, pool, inst);
    REQUIRE_FALSE(dec.integral);
    CHECK(dec.down.family == AggFamily::NEb);
    CHECK(dec.down.rhs == 2);
    CHECK(dec.up.rhs == 3);
    CHECK(dec.down.k == 0);
}

TEST_CASE("lambda branching is the last resort") {
    // two columns identical in every aggregate family (same serve slots, arcs,
    // endpoints) but different per-slot discharge: only lambda can separate them
    testsup::TinySpec s;
    s.slots = 10;
    s.service_shelter = {2};
    s.demand = std::vector<std::vector<double>>(1, std::vector<double>(10, 0.0));
    s.demand[0][3] = 70.0;
    Instance inst = make_tiny(s);
    ColumnPool pool(inst);
    int a = pool.add(build_route(inst, 0, 0, {{0, {10.0, 60.0}}}, {}));
    int b = pool.add(build_route(inst, 0, 0, {{0, {60.0, 10.0}}}, {}));
    REQUIRE(a != b);
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    sol.lambda = {0.5, 0.5}; // hand-crafted: aggregates integral, lambdas not
    BranchDecision dec = pick_branch(sol, pool, inst);
    REQUIRE_FALSE(dec.integral);
    CHECK(dec.down.family == AggFamily::Lambda);
    CHECK(dec.down.column == 0);
}

TEST_CASE("integral detection") {
    Instance inst = one_shelter(60.0);
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, 60.0));
    MasterSolution sol = solve_rlmp(pool, inst, {}, false);
    REQUIRE(sol.feasible);
    BranchDecision dec = pick_branch(sol, pool, inst);
    CHECK(dec.integral);
}

TEST_CASE("adding a column never increases the master objective") {
    double D = 150.0;
    Instance inst = one_shelter(D, 10000.0);
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, 60.0));
    double prev = solve_rlmp(pool, inst, {}, false).objective;
    pool.add(single_visit(inst, 1, 150.0));
    double with2 = solve_rlmp(pool, inst, {}, false).objective;
    CHECK(with2 <= prev + 1e-9);
    pool.add(single_visit(inst, 2, 150.0, 1));
    double with3 = solve_rlmp(pool, inst, {}, false).objective;
    CHECK(with3 <= with2 + 1e-9);
}

TEST_CASE("aggregate consistency against hand counts") {
    Instance inst = one_shelter(100.0);
    ColumnPool pool(inst);
    Route two_visit = build_route(inst, 2, 0, {{0, {80.0}}, {0, {80.0}}}, {0});
    int p = pool.add(two_visit);
    std::vector<double> lambda(pool.size(), 0.0);
    lambda[p] = 2.0;
    CHECK(aggregate_value(AggFamily::NEb, 2, -1, -1, -1, pool, inst, lambda) ==
          doctest::Approx(2.0));
    CHECK(aggregate_value(AggFamily::Fi, -1, 0, -1, -1, pool, inst, lambda) ==
          doctest::Approx(4.0)); // two serving slots per route, two copies
    CHECK(aggregate_value(AggFamily::Vij, -1, 0, 0, -1, pool, inst, lambda) ==
          doctest::Approx(4.0)); // one x + one z per route
    CHECK(aggregate_value(AggFamily::Ai, -1, 0, -1, -1, pool, inst, lambda) ==
          doctest::Approx(4.0)); // one u + one r per route
    CHECK(aggregate_value(AggFamily::Eik, 2, 0, -1, -1, pool, inst, lambda) ==
          doctest::Approx(4.0));
    CHECK(aggregate_value(AggFamily::Eik, 0, 0, -1, -1, pool, inst, lambda) ==
          doctest::Approx(0.0));
}

TEST_CASE("integer master respects availability and dominates the LP") {
    double cap = 70.0;
    Instance inst = one_shelter(2.5 * cap, 10000.0);
    inst.types[0].available_count = 5;
    inst.types[1].available_count = 0;
    inst.types[2].available_count = 0;
    ColumnPool pool(inst);
    pool.add(single_visit(inst, 0, cap));
    MasterSolution lp = solve_rlmp(pool, inst, {}, false);
    IntegerMasterResult ip = solve_milp_master(pool, inst, false);
    REQUIRE(lp.feasible);
    REQUIRE(ip.feasible);
    CHECK(ip.objective >= lp.objective - 1e-9);
    double copies = 0;
    for (double l : ip.lambda) copies += l;
    CHECK(copies <= 5 + 1e-9);
    for (double l : ip.lambda) CHECK(std::fabs(l - std::round(l)) < 1e-6);

    SUBCASE("exact-cover pool matches the LP") {
        Instance inst2 = one_shelter(60.0);
        ColumnPool pool2(inst2);
        pool2.add(single_visit(inst2, 0, 60.0));
        MasterSolution lp2 = solve_rlmp(pool2, inst2, {}, false);
        IntegerMasterResult ip2 = solve_milp_master(pool2, inst2, false);
        CHECK(ip2.objective == doctest::Approx(lp2.objective));
    }
    SUBCASE("empty pool pays the full penalty") {
        Instance inst2 = one_shelter(60.0);
        ColumnPool pool2(inst2);
        IntegerMasterResult ip2 = solve_milp_master(pool2, inst2, false);
        REQUIRE(ip2.feasible);
        CHECK(ip2.objective == doctest::Approx(1000.0 * 60.0));
    }
}

TEST_CASE("shift mode master") {
    testsup::TinySpec s;
    s.slots = 12;
    s.available = {4, 4, 4};
    s.demand = std::vector<std::vector<double>>(1, std::vector<double>(12, 0.0));
    s.demand[0][4] = 50.0;
    s.demand[0][6] = 50.0;
    Instance inst = make_tiny(s);

    ColumnPool pool(inst);
    // serve slot 4 and slot 6 with separate visits of one bus
    pool.add(build_route(inst, 2, 3, {{0, {50.0}}}, {}));          // arrives slot 4
    pool.add(build_route(inst, 2, 5, {{0, {50.0}}}, {}));          // arrives slot 6
    pool.add(build_route(inst, 2, 2, {{0, {100.0}}}, {}));         // arrives slot 3: wrong slot

    SUBCASE("zero fee never beats the aggregate objective") {
        inst.demands.shift_fee.assign(1, std::vector<double>(12, 0.0));
        MasterSolution agg = solve_rlmp(pool, inst, {}, false);
        MasterSolution sh = solve_rlmp(pool, inst, {}, true);
        REQUIRE(agg.feasible);
        REQUIRE(sh.feasible);
        CHECK(sh.objective <= agg.objective + 1e-9);
    }
    SUBCASE("a huge fee forces slot-exact coverage") {
        inst.demands.shift_fee.assign(1, std::vector<double>(12, 1e7));
        MasterSolution sh = solve_rlmp(pool, inst, {}, true);
        REQUIRE(sh.feasible);
        double shifted = 0.0;
        for (const auto& row : sh.shift_unmet)
            for (double v : row) shifted += v;
        CHECK(shifted < 1e-6);
        CHECK(sh.duals.delta.size() == 1); // delta populated in shift mode
    }
}

TEST_CASE("initial columns cover every compatible pairing") {
    Instance inst = one_shelter(500.0);
    auto cols = initial_columns(inst);
    CHECK(cols.size() == 3); // three types, one shelter
    for (const auto& r : cols) {
        CHECK(validate(r, inst).empty());
        CHECK(r.total_discharge() > 0);
    }
    SUBCASE("sparsity prunes pairings") {
        Instance s4 = inst;
        s4.compat.im = {{1}, {0}, {0}};
        auto cols4 = initial_columns(s4);
        CHECK(cols4.size() == 1);
        CHECK(cols4[0].esb_type == 0);
    }
    SUBCASE("discharge respects the remaining demand") {
        Instance small = one_shelter(20.0);
        auto c = initial_columns(small);
        REQUIRE(!c.empty());
        // demand 20 < per-visit budget: the column carries max(demand, floor)
        CHECK(c[0].total_discharge() == doctest::Approx(20.0));
    }
}
