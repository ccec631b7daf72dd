#include "doctest.h"

#include "esbilr/metrics.hpp"
#include "test_support.hpp"

using namespace esbilr;

TEST_CASE("effective usable capacity at the case-study radius") {
    Instance inst = case_study_instance(7, 10, 3, 48);
    const double t_avg = 0.47;
    CHECK(effective_usable_capacity(inst.types[0], t_avg) == doctest::Approx(54).epsilon(0.02));
    CHECK(effective_usable_capacity(inst.types[1], t_avg) == doctest::Approx(220).epsilon(0.005));
    CHECK(effective_usable_capacity(inst.types[2], t_avg) == doctest::Approx(378).epsilon(0.003));
    SUBCASE("zero travel leaves the full usable band") {
        CHECK(effective_usable_capacity(inst.types[2], 0.0) == doctest::Approx(450.0));
    }
    SUBCASE("unusable radius is flagged") {
        EsbType t = inst.types[0]; // 90 usable, 38.19 kWh/h
        CHECK(effective_usable_capacity(t, 2.0) < 0);
        CHECK_FALSE(capacity_cost(t, 2.0).has_value());
    }
}

TEST_CASE("capacity cost") {
    Instance inst = case_study_instance(7, 10, 3, 48);
    const double t_avg = 0.47;
    auto u1 = capacity_cost(inst.types[0], t_avg);
    auto u3 = capacity_cost(inst.types[2], t_avg);
    REQUIRE(u1.has_value());
    REQUIRE(u3.has_value());
    CHECK(*u1 == doctest::Approx(4630).epsilon(0.01));
    CHECK(*u3 == doctest::Approx(1190).epsilon(0.01));
    SUBCASE("linear in the investment cost") {
        EsbType d = inst.types[0];
        d.invest_cost *= 2;
        CHECK(*capacity_cost(d, t_avg) == doctest::Approx(2 * *u1));
    }
}

TEST_CASE("capacity utilization") {
    Instance inst = case_study_instance(7, 10, 3, 48);
    auto r = capacity_utilization(inst.types, {0.0, 0.1, 0.9}, 0.47, 1636.0);
    REQUIRE(r.has_value());
    CHECK(r->zeta_bar == doctest::Approx(362).epsilon(0.003));
    CHECK(r->ratio == doctest::Approx(4.5).epsilon(0.023));
    SUBCASE("degenerate mix reduces to a single type") {
        auto one = capacity_utilization(inst.types, {0.0, 0.0, 1.0}, 0.47, 378.0);
        REQUIRE(one.has_value());
        CHECK(one->ratio == doctest::Approx(378.0 /
                                            effective_usable_capacity(inst.types[2], 0.47)));
    }
    SUBCASE("zero increment gives zero utilization") {
        auto z = capacity_utilization(inst.types, {0.0, 0.1, 0.9}, 0.47, 0.0);
        REQUIRE(z.has_value());
        CHECK(z->ratio == 0.0);
    }
}

TEST_CASE("zeta is monotone in radius and consumption, cost in radius") {
    Instance inst = case_study_instance(7, 10, 3, 48);
    for (const auto& t : inst.types) {
        double prev = kInf;
        for (double ta : {0.0, 0.2, 0.4, 0.6}) {
            double z = effective_usable_capacity(t, ta);
            CHECK(z < prev);
            prev = z;
        }
        EsbType hungry = t;
        hungry.consumption_rate *= 1.3;
        CHECK(effective_usable_capacity(hungry, 0.4) < effective_usable_capacity(t, 0.4));
        auto c1 = capacity_cost(t, 0.1), c2 = capacity_cost(t, 0.5);
        if (c1 && c2) CHECK(*c2 > *c1);
    }
}

TEST_CASE("mean access time matches the four-shelter case value") {
    // the 4-shelter/1-station instance behind the published 0.47 h figure
    Instance inst = case_study_instance(7, 4, 1, 32);
    CHECK(mean_access_time_hours(inst, 0) == doctest::Approx(0.469).epsilon(0.01));
    CHECK(mean_access_time_hours(inst, 2) == doctest::Approx(0.469).epsilon(0.01));
}
