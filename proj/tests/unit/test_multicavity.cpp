#include "combcavity/errors.hpp"
#include "combcavity/multicavity.hpp"

#include <doctest.h>

#include <sstream>

using namespace combcav;

namespace
{

const char* kPlan = R"([bank]
medium = vacuum

[cavity.blue]
band_nm = 880, 912
coating = lowdisp
m = 10
offset = 0
lock_center_nm = 906

[cavity.red]
band_nm = 904, 936
coating = lowdisp
m = 10
offset = 5
lock_center_nm = 910
weight = 0.8
)";

} // namespace

TEST_CASE("bank plan file")
{
    std::istringstream in(kPlan);
    const auto plan = load_bank_plan(in);
    REQUIRE(plan.entries.size() == 2);
    CHECK(plan.entries[0].name == "blue");
    CHECK(plan.entries[1].tooth_offset == 5);
    CHECK(plan.entries[1].weight == 0.8);
    CHECK(plan.entries[0].lock.filter_center == doctest::Approx(906e-9));
    CHECK(plan.entries[1].band.hi == doctest::Approx(936e-9));
    CHECK(std::holds_alternative<Vacuum>(plan.medium));
}

TEST_CASE("bank plan validation")
{
    std::istringstream in(kPlan);
    auto plan = load_bank_plan(in);
    auto bad = plan;
    bad.entries[1].tooth_offset = 10;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.entries[1].m_filter = 12;
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.entries[1].band = {950e-9, 980e-9};
    CHECK_THROWS_AS(validate(bad), ValidationError);
    bad = plan;
    bad.entries[0].weight = 1.5;
    CHECK_THROWS_AS(validate(bad), ValidationError);

    std::istringstream missing("[cavity.a]\nband_nm = 880, 912\nm = 10\n");
    CHECK_THROWS_AS(load_bank_plan(missing), ValidationError);
}

TEST_CASE("bank locks each cavity on its residue")
{
    std::istringstream in(kPlan);
    const auto plan = load_bank_plan(in);
    const auto comb = CombSpec::covering(1e9, 0.0, to_frequency(WavelengthBand{878e-9, 938e-9}));
    const auto result = plan_bank(comb, plan);
    REQUIRE(result.cavities.size() == 2);
    const auto r0 = result.cavities[0].spectrum.passed_residue;
    const auto r1 = result.cavities[1].spectrum.passed_residue;
    CHECK(((r1 - r0) % 10 + 10) % 10 == 5);
    for (std::size_t i = 1; i < result.merged.size(); ++i)
        CHECK(result.merged[i].frequency > result.merged[i - 1].frequency);
    const auto beats = overlap_beats(result, plan, 0, 1e9);
    CHECK(minimum_nonzero_beat(beats) == doctest::Approx(5e9));
}

TEST_CASE("minimum beat needs a nonzero entry")
{
    CHECK_THROWS_AS(minimum_nonzero_beat({}), Error);
    CHECK(minimum_nonzero_beat({0.0, 2e9, 3e9}) == 2e9);
}
