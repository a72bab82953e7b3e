#include "combcavity/comb_model.hpp"
#include "combcavity/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace combcav;

TEST_CASE("comb law")
{
    CombSpec c(1e9, 0.25e9, 374000, 376000);
    CHECK(mode_frequency(c, 375000) == 375000.25e9);
    CHECK(nearest_mode(c, 375000.7e9) == 375000);
    CHECK(nearest_mode(c, 1e20) == 376000);
    const auto modes = sample_comb(c, {374999.9e9, 375003e9});
    REQUIRE(modes.size() == 3);
    for (std::size_t i = 1; i < modes.size(); ++i)
        CHECK(modes[i].frequency - modes[i - 1].frequency == doctest::Approx(1e9));
}

TEST_CASE("covering spans the band")
{
    const FrequencyBand band{374.3e12, 376.1e12};
    const auto c = CombSpec::covering(1e9, 0.4e9, band);
    CHECK(mode_frequency(c, c.n_min()) <= band.lo);
    CHECK(mode_frequency(c, c.n_min() + 1) > band.lo);
    CHECK(mode_frequency(c, c.n_max()) >= band.hi);
    CHECK(mode_frequency(c, c.n_max() - 1) < band.hi);
}

TEST_CASE("translation keeps offset in range")
{
    CombSpec c(1e9, 0.8e9, 1000, 2000);
    const auto t = c.translated(0.5e9);
    CHECK(t.f_o() >= 0.0);
    CHECK(t.f_o() < 1e9);
    CHECK(t.f_o() == doctest::Approx(0.3e9));
    CHECK(mode_frequency(t, 1001) == doctest::Approx(mode_frequency(c, 1000) + 0.5e9));
    const auto back = c.translated(-1.3e9);
    CHECK(back.f_o() == doctest::Approx(0.5e9));
}

TEST_CASE("invalid combs")
{
    CHECK_THROWS_AS(CombSpec(0.0, 0.0, 1, 2), ValidationError);
    CHECK_THROWS_AS(CombSpec(1e9, 1e9, 1, 2), ValidationError);
    CHECK_THROWS_AS(CombSpec(1e9, 0.0, 5, 2), ValidationError);
}

TEST_CASE("envelope csv")
{
    std::istringstream in("wavelength_nm,power\n# comment\n700,1\n800,3\n900,1\n");
    const auto env = load_envelope(in);
    CHECK_FALSE(env.is_flat());
    CHECK(env.power(wavelength_to_frequency(800e-9)) == doctest::Approx(3.0));
    CHECK(env.power(wavelength_to_frequency(600e-9)) == 0.0);

    std::istringstream bad("wavelength_nm,power\n700,1\n650,2\n");
    CHECK_THROWS_AS(load_envelope(bad), ParseError);
    std::istringstream neg("wavelength_nm,power\n700,1\n750,-2\n");
    CHECK_THROWS_AS(load_envelope(neg), ValidationError);
}

TEST_CASE("gaussian line profile")
{
    CHECK(gaussian_line(0.0, 1e6) == 1.0);
    CHECK(gaussian_line(0.5e6, 1e6) == doctest::Approx(0.5));
}
