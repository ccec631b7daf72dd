#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "esbilr/bnp.hpp"
#include "esbilr/compact.hpp"
#include "test_support.hpp"

using namespace esbilr;
using testsup::make_tiny;

namespace {

Instance demo_instance(double demand, int slots = 8, std::vector<int> avail = {1, 1, 1}) {
    testsup::TinySpec s;
    s.slots = slots;
    s.available = std::move(avail);
    s.demand = std::vector<std::vector<double>>(1, std::vector<double>(slots, 0.0));
    s.demand[0][3] = demand;
    s.penalty = 10000.0;
    Instance inst = make_tiny(s);
    inst.big_m2 = std::max(1.0, 2 * demand);
    return inst;
}

BnPConfig exact_cfg() {
    BnPConfig cfg;
    cfg.engine = PricingEngine::Exact;
    cfg.gap_target = 0.0;
    return cfg;
}

} // namespace

TEST_CASE("zero demand solves at the root with no columns") {
    Instance inst = demo_instance(0.0);
    BnPResult r = solve_bnp(inst, exact_cfg());
    REQUIRE(r.feasible);
    CHECK(r.objective == doctest::Approx(0.0));
    CHECK(r.nodes_explored == 1);
    CHECK(r.columns_generated == 0);
    CHECK(r.fleet == std::vector<int>{0, 0, 0});
    CHECK(r.plan.empty());
}

TEST_CASE("exact branch-and-price matches the compact oracle") {
    for (double demand : {70.0, 120.0, 190.0}) {
        Instance inst = demo_instance(demand);
        CompactOptions copt;
        copt.symmetry_breaking = true;
        MilpSolution oracle = solve_compact(build_compact(inst, copt));
        REQUIRE(oracle.milp.feasible);
        REQUIRE(oracle.proven);

        BnPResult r = solve_bnp(inst, exact_cfg());
        REQUIRE(r.feasible);
        CAPTURE(demand);
        CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
        CHECK(r.bound <= r.objective + 1e-6);
        CHECK(r.bound >= oracle.objective - 1e-6);

        // sandwich: compact LP relaxation <= root bound <= integer optimum
        auto relax = lp_solve(build_compact(inst, {}).lp);
        REQUIRE(relax.status == LpStatus::Optimal);
        CHECK(r.tree[0].lp_bound >= relax.objective - 1e-6);
        CHECK(r.tree[0].lp_bound <= oracle.objective + 1e-6);
    }
}

TEST_CASE("dp engine stays within the heuristic band") {
    for (double demand : {70.0, 120.0, 190.0}) {
        Instance inst = demo_instance(demand);
        BnPConfig ecfg = exact_cfg();
        BnPResult exact = solve_bnp(inst, ecfg);
        BnPConfig dcfg = exact_cfg();
        dcfg.engine = PricingEngine::Dp;
        BnPResult dp = solve_bnp(inst, dcfg);
        REQUIRE(exact.feasible);
        REQUIRE(dp.feasible);
        CHECK(dp.heuristic);
        CHECK(dp.objective >= exact.objective - 1e-6);
        CHECK(dp.objective <= 1.15 * exact.objective + 1e-6);
    }
}

TEST_CASE("determinism: identical runs and parallel pricing agree") {
    Instance inst = demo_instance(150.0);
    BnPConfig cfg = exact_cfg();
    BnPResult a = solve_bnp(inst, cfg);
    BnPResult b = solve_bnp(inst, cfg);
    REQUIRE(a.feasible);
    CHECK(a.objective == b.objective);
    CHECK(a.nodes_explored == b.nodes_explored);
    CHECK(a.fleet == b.fleet);
    CHECK(a.columns_generated == b.columns_generated);

    BnPConfig par = cfg;
    par.deterministic = false;
    BnPResult c = solve_bnp(inst, par);
    CHECK(c.objective == a.objective);
    CHECK(c.fleet == a.fleet);
}

TEST_CASE("node bounds never fall below their parent") {
    Instance inst = demo_instance(190.0, 8, {2, 2, 2});
    BnPResult r = solve_bnp(inst, exact_cfg());
    REQUIRE(r.feasible);
    for (const auto& nd : r.tree) {
        if (nd.parent < 0 || nd.status == "open") continue;
        if (nd.lp_bound == kInf || nd.lp_bound == -kInf) continue;
        CHECK(nd.lp_bound >= r.tree[nd.parent].lp_bound - 1e-9);
    }
}

TEST_CASE("pool audit: converged duals price every column nonnegative") {
    Instance inst = demo_instance(150.0);
    BnPConfig cfg = exact_cfg();
    BnPResult r = solve_bnp(inst, cfg);
    REQUIRE(r.feasible);

    ColumnPool pool(inst);
    for (auto& route : initial_columns(inst)) pool.add(std::move(route));
    CgResult cg = cg_loop(inst, pool, {}, cfg);
    REQUIRE(cg.feasible);
    for (int p = 0; p < pool.size(); ++p)
        CHECK(reduced_cost(pool.route(p), cg.last.duals, inst) >= -1e-6);
    // and pricing certifies convergence against the exhaustive enumeration
    for (int k = 0; k < inst.n_types(); ++k)
        CHECK(testsup::brute_force_min_rc(inst, k, cg.last.duals) >= -1e-6);
}

TEST_CASE("report formats") {
    Instance inst = demo_instance(120.0);
    BnPResult r = solve_bnp(inst, exact_cfg());
    REQUIRE(r.feasible);

    SUBCASE("cost split sums to the objective") {
        CHECK(r.invest_cost + r.transport_cost + r.penalty_cost + r.shift_cost ==
              doctest::Approx(r.objective).epsilon(1e-9));
    }
    SUBCASE("text and csv mention the essentials") {
        std::string text = report(r, inst, ReportFormat::Text);
        CHECK(text.find("objective") != std::string::npos);
        CHECK(text.find("fleet:") != std::string::npos);
        std::string csv = report(r, inst, ReportFormat::Csv);
        int commas = 0;
        for (char c : csv) commas += c == ',';
        int header_commas = 0;
        for (char c : report_csv_header()) header_commas += c == ',';
        CHECK(commas == header_commas);
    }
    SUBCASE("zero-demand report") {
        Instance z = demo_instance(0.0);
        BnPResult zr = solve_bnp(z, exact_cfg());
        std::string text = report(zr, z, ReportFormat::Text);
        CHECK(text.find("type1=0") != std::string::npos);
    }
}

TEST_CASE("availability binds the fleet") {
    // demand needs two type-1-sized visits but only one bus of any type is allowed
    Instance inst = demo_instance(800.0, 8, {1, 0, 0});
    BnPResult r = solve_bnp(inst, exact_cfg());
    REQUIRE(r.feasible);
    CHECK(r.fleet[0] <= 1);
    double unmet = 0;
    for (double v : r.unmet) unmet += v;
    CHECK(unmet > 0); // penalties absorb what the fleet cannot carry
    CompactOptions copt;
    copt.symmetry_breaking = true;
    MilpSolution oracle = solve_compact(build_compact(inst, copt));
    CHECK(r.objective == doctest::Approx(oracle.objective).epsilon(1e-9));
}

TEST_CASE("trace file records one line per node") {
    Instance inst = demo_instance(150.0);
    BnPConfig cfg = exact_cfg();
    cfg.trace_path = "bnp_trace_test.txt";
    BnPResult r = solve_bnp(inst, cfg);
    std::ifstream in(cfg.trace_path);
    REQUIRE(in.good());
    int lines = 0;
    std::string line;
    bool monotone = true;
    double prev_inc = kInf;
    while (std::getline(in, line)) {
        ++lines;
        auto pos = line.find("incumbent ");
        if (pos != std::string::npos) {
            double v = std::stod(line.substr(pos + 10));
            monotone = monotone && v <= prev_inc + 1e-9;
            prev_inc = v;
        }
    }
    in.close();
    std::remove(cfg.trace_path.c_str());
    CHECK(lines >= r.nodes_explored);
    CHECK(monotone); // the incumbent never worsens over the run
}
