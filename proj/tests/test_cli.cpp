#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "esbilr/sweep.hpp"
#include "test_support.hpp"

using namespace esbilr;

namespace {

RunSpec desk_spec(const std::string& method) {
    RunSpec s;
    s.method = method;
    s.gen_shelters = 2;
    s.gen_stations = 1;
    s.gen_slots = 12;
    s.seed = 11;
    s.gap_target = 0.0;
    return s;
}

} // namespace

TEST_CASE("run_solve produces a clean, self-consistent document") {
    for (const char* method : {"bnp-dp", "bnp-exact"}) {
        RunSpec spec = desk_spec(method);
        SolveOutcome o = run_solve(spec);
        CAPTURE(method);
        CAPTURE(o.error);
        REQUIRE(o.ok);
        Instance inst = materialize_instance(spec);
        ValidationReport rep = validate_solution(o.doc, inst);
        for (const auto& issue : rep.issues) CAPTURE(issue);
        CHECK(rep.clean);
        CHECK(o.doc.invest + o.doc.transport + o.doc.penalty + o.doc.shift ==
              doctest::Approx(o.doc.objective).epsilon(1e-9));
    }
}

TEST_CASE("compact method on a tiny spec agrees with bnp-exact") {
    RunSpec spec = desk_spec("compact");
    spec.gen_shelters = 1;
    spec.gen_slots = 10;
    SolveOutcome compact = run_solve(spec);
    REQUIRE(compact.ok);
    spec.method = "bnp-exact";
    SolveOutcome bnp = run_solve(spec);
    REQUIRE(bnp.ok);
    CHECK(compact.doc.objective == doctest::Approx(bnp.doc.objective).epsilon(1e-8));
    Instance inst = materialize_instance(spec);
    CHECK(validate_solution(compact.doc, inst).clean);
}

TEST_CASE("solution documents round-trip and validators catch tampering") {
    RunSpec spec = desk_spec("bnp-dp");
    SolveOutcome o = run_solve(spec);
    REQUIRE(o.ok);
    std::string path = "cli_solution_test.json";
    write_solution(o.doc, path);
    SolutionDocument back = load_solution(path);
    std::remove(path.c_str());
    CHECK(solution_to_json(back) == solution_to_json(o.doc));

    Instance inst = materialize_instance(spec);
    REQUIRE(validate_solution(back, inst).clean);

    SUBCASE("SOC tampering is flagged") {
        REQUIRE(!back.plan.empty());
        for (auto& v : back.plan[0].first.soc_trace) v = -5.0;
        ValidationReport rep = validate_solution(back, inst);
        CHECK_FALSE(rep.clean);
    }
    SUBCASE("hiding unmet demand is flagged") {
        SolutionDocument cut = o.doc;
        cut.plan.clear(); // nothing delivered, but unmet still claims coverage
        ValidationReport rep = validate_solution(cut, inst);
        if (inst.demands.total() > 0) {
            CHECK_FALSE(rep.clean);
            bool named = false;
            for (const auto& s : rep.issues)
                named = named || s.find("unaccounted unmet demand") != std::string::npos;
            CHECK(named);
        }
    }
}

TEST_CASE("deterministic mode yields byte-identical documents") {
    RunSpec spec = desk_spec("bnp-dp");
    SolveOutcome a = run_solve(spec);
    SolveOutcome b = run_solve(spec);
    REQUIRE(a.ok);
    REQUIRE(b.ok);
    CHECK(solution_to_json(a.doc) == solution_to_json(b.doc));
}

TEST_CASE("sweep rows are re-derivable from their specs") {
    RunSpec base = desk_spec("bnp-dp");
    base.gap_target = 0.01;
    std::vector<double> grid = {0.8, 1.0, 1.2};
    std::string csv = run_sweep(SweepAxis::Demand, base, grid, false);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line); // header
    CHECK(line.find("axis_value") == 0);
    int row = 0;
    while (std::getline(is, line)) {
        REQUIRE(line.find(",ok") != std::string::npos);
        SolveOutcome again = run_solve(spec_for_point(SweepAxis::Demand, base, grid[row]));
        REQUIRE(again.ok);
        std::string cell = line.substr(line.find(',') + 1);
        cell = cell.substr(0, cell.find(','));
        CHECK(std::stoll(cell) == (long long)std::llround(again.doc.objective));
        ++row;
    }
    CHECK(row == 3);
}

TEST_CASE("materialize applies every scenario knob") {
    RunSpec spec = desk_spec("bnp-dp");
    spec.gen_shelters = 4;
    SUBCASE("sparsity") {
        spec.sparsity = 4;
        Instance inst = materialize_instance(spec);
        CHECK_FALSE(inst.compatible(0, 1));
        CHECK(inst.compatible(1, 1));
    }
    SUBCASE("severity") {
        Instance normal = materialize_instance(spec);
        spec.severity = "adverse";
        Instance adverse = materialize_instance(spec);
        CHECK(adverse.travel(0, 0, 1) == 2 * normal.travel(0, 0, 1));
    }
    SUBCASE("demand scale") {
        Instance base = materialize_instance(spec);
        spec.demand_scale = 0.5;
        Instance scaled = materialize_instance(spec);
        CHECK(scaled.demands.total() == doctest::Approx(0.5 * base.demands.total()));
    }
    SUBCASE("availability and service override") {
        spec.availability = {-1, 2, 0};
        spec.service_override = 2;
        Instance inst = materialize_instance(spec);
        CHECK(inst.types[1].available_count == 2);
        CHECK(inst.types[2].available_count == 0);
        for (int v : inst.network.service_shelter) CHECK(v == 2);
    }
    SUBCASE("shift fee") {
        spec.shift_fee = 25.0;
        Instance inst = materialize_instance(spec);
        REQUIRE(inst.demands.has_shift_fee());
        CHECK(inst.demands.shift_fee[0][5] == 25.0);
    }
}
