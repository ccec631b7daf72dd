#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "esbilr/compact.hpp"
#include "test_support.hpp"

using namespace esbilr;
using testsup::make_tiny;

namespace {

Instance tiny(int slots = 8, std::vector<int> avail = {1, 1, 1},
              std::vector<std::vector<double>> demand = {}) {
    testsup::TinySpec s;
    s.slots = slots;
    s.available = std::move(avail);
    s.demand = std::move(demand);
    return make_tiny(s);
}

std::vector<std::vector<double>> demand_at(int shelters, int slots, int shelter, int slot,
                                           double kwh) {
    std::vector<std::vector<double>> d(shelters, std::vector<double>(slots, 0.0));
    d[shelter][slot] = kwh;
    return d;
}

} // namespace

TEST_CASE("row counts match an independent enumeration of applicable tuples") {
    Instance inst = tiny();
    CompactModel m = build_compact(inst);

    // independent count of applicable tuples for the 1-shelter/1-station/8-slot case:
    // travel = 1 slot everywhere, all service times 1, 3 buses (one per type)
    const int last = 7;
    int n_u = 0, n_x = 0, n_z = 0, n_w = 0;
    for (int t = 0; t <= last; ++t) {
        if (t + 1 + 1 < last) {
            ++n_u;
            ++n_x;
            if (t - 1 - 1 >= 0) ++n_z;
        }
        if (t < last) ++n_w;
    }
    CHECK(m.rows_in_family(RowFamily::DepartOnce) == 3);
    CHECK(m.rows_in_family(RowFamily::OneState) == 3 * 8);
    CHECK(m.rows_in_family(RowFamily::FollowU) == 3 * n_u);
    CHECK(m.rows_in_family(RowFamily::FollowXCs) == 3 * n_x);
    CHECK(m.rows_in_family(RowFamily::FollowXSh) == 0); // one shelter: no direct legs
    CHECK(m.rows_in_family(RowFamily::XWindow) == 3 * n_x);
    CHECK(m.rows_in_family(RowFamily::ZPred) == 3 * n_z);
    CHECK(m.rows_in_family(RowFamily::FollowZ) == 3 * n_z);
    CHECK(m.rows_in_family(RowFamily::ZWindow) == 3 * n_z);
    CHECK(m.rows_in_family(RowFamily::WServeU) == 3 * n_u);
    CHECK(m.rows_in_family(RowFamily::WServeZ) == 3 * n_z);
    CHECK(m.rows_in_family(RowFamily::GLink) == 2 * 3 * n_w);
    CHECK(m.rows_in_family(RowFamily::SocU) == 2 * 3 * n_u);
    CHECK(m.rows_in_family(RowFamily::SocZ) == 2 * 3 * n_z);
    CHECK(m.rows_in_family(RowFamily::SocX) == 2 * 3 * n_x);
    CHECK(m.rows_in_family(RowFamily::SocReturn) == 3 * 8);
    CHECK(m.rows_in_family(RowFamily::OneShelter) == 0);
    CHECK(m.rows_in_family(RowFamily::Load) == 1);
    CHECK(m.rows_in_family(RowFamily::Symmetry) == 0);
    // depart-after-serve splits by the horizon guard: t + S_i < last vs >= last
    int n_das = 0, n_abs = 0;
    for (int t = 0; t < last; ++t) (t + 1 < last ? n_das : n_abs) += 1;
    CHECK(m.rows_in_family(RowFamily::DepartAfterServe) == 3 * n_das);
    CHECK(m.rows_in_family(RowFamily::ArriveBeforeServe) == 3 * n_abs);

    // all active families present exactly once in the tag set
    std::map<RowFamily, int> fams;
    for (const auto& t : m.tags) fams[t.fam]++;
    CHECK(fams.size() == 28); // all families except FollowXSh, OneShelter, Symmetry,
                              // Shift and ForceRoute
}

TEST_CASE("symmetry rows vanish with one bus per type and appear with two") {
    Instance inst = tiny();
    CompactOptions opt;
    opt.symmetry_breaking = true;
    CHECK(build_compact(inst, opt).rows_in_family(RowFamily::Symmetry) == 0);

    Instance two = tiny(8, {2, 1, 1});
    CHECK(build_compact(two, opt).rows_in_family(RowFamily::Symmetry) == 8);
}

TEST_CASE("zero demand solves to zero with no routes") {
    Instance inst = tiny();
    CompactModel m = build_compact(inst);
    MilpSolution s = solve_compact(m);
    REQUIRE(s.milp.feasible);
    CHECK(s.proven);
    CHECK(s.objective == doctest::Approx(0.0));
    CHECK(extract_routes(s.x, m, inst).empty());
}

TEST_CASE("penalty-only closed form when no buses exist") {
    double D = 321.5;
    Instance inst = tiny(8, {0, 0, 0}, demand_at(1, 8, 0, 3, D));
    CompactModel m = build_compact(inst);
    MilpSolution s = solve_compact(m);
    REQUIRE(s.milp.feasible);
    CHECK(s.objective == doctest::Approx(1000.0 * D));
    CHECK(s.x[m.cat.il(0)] == doctest::Approx(D));
}

TEST_CASE("single-delivery demand: oracle equals the enumerated optimum") {
    // demand exactly one type-1 visit's deliverable energy, penalty high enough
    // that serving beats paying
    Instance base = tiny();
    double budget1 = 90.0 - 2 * 38.19 * 0.25;
    Instance inst = tiny(8, {1, 1, 1}, demand_at(1, 8, 0, 3, budget1));
    inst.demands.penalty.assign(1, 10000.0);
    inst.big_m2 = 2 * budget1;

    // expected value from the independent enumerator: best single route covering D,
    // or penalty-only; two routes cost at least 2 x min invest and cannot win
    double D = budget1;
    double best = 10000.0 * D;
    for (int k = 0; k < 3; ++k) {
        for (const auto& st : testsup::enumerate_structures(inst, k)) {
            std::vector<std::vector<double>> w(st.shelters.size());
            for (size_t v = 0; v < st.shelters.size(); ++v)
                w[v].assign(inst.network.service_shelter[st.shelters[v]], 1.0);
            auto g = testsup::optimize_discharge(inst, st, w);
            if (g.empty()) continue;
            Route r = testsup::structure_route(inst, st, g);
            double delivered = r.total_discharge();
            double val = r.cost + 10000.0 * std::max(0.0, D - delivered);
            best = std::min(best, val);
        }
    }
    REQUIRE(best < 2 * 250000); // a two-bus plan can indeed never win

    CompactModel m = build_compact(inst);
    MilpSolution s = solve_compact(m);
    REQUIRE(s.milp.feasible);
    REQUIRE(s.proven);
    CHECK(s.objective == doctest::Approx(best).epsilon(1e-7));
    CHECK(s.objective == doctest::Approx(250000 + 0.25 * 2 * 38.19 * 0.25));

    auto routes = extract_routes(s.x, m, inst);
    REQUIRE(routes.size() == 1);
    CHECK(routes[0].esb_type == 0);
    auto viol = validate(routes[0], inst);
    CAPTURE(viol.empty() ? "" : viol[0]);
    CHECK(viol.empty());
    CHECK(routes[0].total_discharge() == doctest::Approx(budget1));

    // the LP relaxation is a valid lower bound
    auto relax = lp_solve(m.lp);
    REQUIRE(relax.status == LpStatus::Optimal);
    CHECK(relax.objective <= s.objective + 1e-6);
}

TEST_CASE("two buses extract as two clean routes with matching discharge") {
    // 6 slots: a bus can make exactly one visit, so covering two visits of type-3
    // budget needs two buses
    double budget3 = 450.0 - 2 * 76.38 * 0.25;
    Instance inst = tiny(6, {0, 0, 2}, demand_at(1, 6, 0, 2, 2 * budget3));
    inst.demands.penalty.assign(1, 10000.0);
    inst.big_m2 = 4 * budget3;
    CompactModel m = build_compact(inst);
    MilpSolution s = solve_compact(m);
    REQUIRE(s.milp.feasible);
    REQUIRE(s.proven);
    auto routes = extract_routes(s.x, m, inst);
    REQUIRE(routes.size() == 2);
    double total_g = 0.0;
    for (const auto& r : routes) {
        CHECK(validate(r, inst).empty());
        total_g += r.total_discharge();
    }
    double model_g = 0.0;
    for (int h = 0; h < m.cat.n_buses; ++h)
        for (int t = 0; t < m.cat.n_slots; ++t)
            if (int id = m.cat.ig(h, 0, t); id >= 0) model_g += s.x[id];
    CHECK(total_g == doctest::Approx(model_g));
    CHECK(total_g == doctest::Approx(2 * budget3));
}

TEST_CASE("adding the symmetry inequalities never changes the optimum") {
    for (unsigned seed : {1u, 2u, 3u, 4u, 5u}) {
        double frac = 0.6 + 0.15 * (seed % 4);
        double budget1 = 90.0 - 2 * 38.19 * 0.25;
        Instance inst = tiny(8, {2, 1, 0}, demand_at(1, 8, 0, 3, (1.0 + frac) * budget1));
        inst.demands.penalty.assign(1, 10000.0);
        inst.big_m2 = 2 * (1.0 + frac) * budget1;
        CompactOptions plain, sym;
        sym.symmetry_breaking = true;
        MilpSolution a = solve_compact(build_compact(inst, plain));
        MilpSolution b = solve_compact(build_compact(inst, sym));
        REQUIRE(a.milp.feasible);
        REQUIRE(b.milp.feasible);
        REQUIRE(a.proven);
        REQUIRE(b.proven);
        CHECK(a.objective == doctest::Approx(b.objective).epsilon(1e-9));
    }
}

TEST_CASE("one active state per slot in every feasible solution") {
    double budget1 = 90.0 - 2 * 38.19 * 0.25;
    Instance inst = tiny(8, {1, 0, 0}, demand_at(1, 8, 0, 3, 2 * budget1));
    inst.demands.penalty.assign(1, 10000.0);
    inst.big_m2 = 4 * budget1;
    CompactModel m = build_compact(inst);
    MilpSolution s = solve_compact(m);
    REQUIRE(s.milp.feasible);
    for (int h = 0; h < m.cat.n_buses; ++h)
        for (int t = 0; t < m.cat.n_slots; ++t) {
            double states = 0.0;
            for (int i = 0; i < m.cat.n_shelters; ++i) {
                for (int q = 0; q < m.cat.n_nodes; ++q)
                    if (int id = m.cat.ix(h, i, q, t); id >= 0) states += s.x[id];
                if (int id = m.cat.iw(h, i, t); id >= 0) states += s.x[id];
                if (int id = m.cat.ir(h, i, t); id >= 0) states += s.x[id];
                for (int j = 0; j < m.cat.n_stations; ++j)
                    if (int id = m.cat.iz(h, j, i, t); id >= 0) states += s.x[id];
            }
            CHECK(states <= 1.0 + 1e-6);
        }
    // SOC stays in range and discharges imply serving with at least G_min
    auto routes = extract_routes(s.x, m, inst);
    for (const auto& r : routes) {
        CHECK(validate(r, inst).empty());
        for (double v : r.soc_trace) {
            CHECK(v >= inst.types[r.esb_type].cap_min - 1e-6);
            CHECK(v <= inst.types[r.esb_type].cap_max + 1e-6);
        }
        for (const auto& e : r.discharge)
            CHECK(e.kwh >= inst.types[r.esb_type].discharge_min - 1e-6);
    }
}

TEST_CASE("lp text export writes family-tagged rows") {
    Instance inst = tiny();
    CompactModel m = build_compact(inst);
    export_lp(m, "compact_export_test.lp");
    std::ifstream in("compact_export_test.lp");
    REQUIRE(in.good());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("one_state[") != std::string::npos);
    CHECK(text.find("load[") != std::string::npos);
    CHECK(text.find("Generals") != std::string::npos);
    in.close();
    std::remove("compact_export_test.lp");
}
