#include "combcavity/air_index.hpp"
#include "combcavity/errors.hpp"

#include <doctest.h>

using namespace combcav;

// Reference values from tests/oracles/ciddor_oracle.py (30-digit arithmetic).
TEST_CASE("standard air at 633 nm")
{
    CHECK(ciddor_index(standard_air(), 633e-9) - 1.0 == doctest::Approx(2.76530210435589e-4).epsilon(1e-10));
}

TEST_CASE("moist air at 633 nm")
{
    AirConditions air{20.0, 101325.0, 0.5, 450.0};
    CHECK(ciddor_index(air, 633e-9) == doctest::Approx(1.00027137274354).epsilon(1e-14));
}

TEST_CASE("laboratory air")
{
    const auto lab = laboratory_air();
    CHECK(ciddor_index(lab, 800e-9) - 1.0 == doctest::Approx(2.20729717767684e-4).epsilon(1e-10));
    CHECK(ciddor_index(lab, 980e-9) - 1.0 == doctest::Approx(2.20070704388604e-4).epsilon(1e-10));
    CHECK(index_change(lab, {750e-9, 850e-9}) == doctest::Approx(5.0014719473728e-7).epsilon(1e-8));
}

TEST_CASE("pressure dependence")
{
    AirConditions air{20.0, 0.0, 0.0, 400.0};
    for (auto [p, ref] : {std::pair{50000.0, 1.33376181148415e-4}, std::pair{80000.0, 2.13424404757142e-4},
                          std::pair{110000.0, 2.93489408549355e-4}})
    {
        air.pressure_pa = p;
        CHECK(ciddor_index(air, 800e-9) - 1.0 == doctest::Approx(ref).epsilon(1e-10));
    }
    air.pressure_pa = 0.0;
    CHECK(ciddor_index(air, 633e-9) == 1.0);
}

TEST_CASE("normal dispersion")
{
    const auto air = laboratory_air();
    double prev = ciddor_index(air, 400e-9);
    for (double w = 450e-9; w <= 1600e-9; w += 50e-9)
    {
        const double n = ciddor_index(air, w);
        CHECK(n < prev);
        prev = n;
    }
}

TEST_CASE("invalid conditions")
{
    AirConditions air = standard_air();
    air.relative_humidity = 1.5;
    CHECK_THROWS_AS(validate(air), ValidationError);
    CHECK_THROWS_AS(ciddor_index(standard_air(), 200e-9), ValidationError);
    air = standard_air();
    air.temperature_c = 150.0;
    CHECK_THROWS_AS(ciddor_index(air, 633e-9), ValidationError);
}
