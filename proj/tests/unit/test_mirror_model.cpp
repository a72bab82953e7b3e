#include "combcavity/errors.hpp"
#include "combcavity/mirror_model.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace combcav;

namespace
{

double wrap(double a)
{
    return std::remainder(a, kTwoPi);
}

} // namespace

// Recursive Fresnel values from tests/oracles/stack_oracle.py.
TEST_CASE("stack reflection matches recursive fresnel")
{
    const auto design = quarter_wave_stack(2.3, 1.45, 5, 910e-9, 1.52, 1.0, true);
    REQUIRE(design.layers.size() == 11);
    struct Ref
    {
        double wl, r, phase;
    };
    for (const auto& ref : {Ref{800e-9, 0.928736435363959, 2.49323943854662},
                            Ref{910e-9, 0.988666137856085, -3.14159265358979},
                            Ref{1000e-9, 0.976514504861493, -2.78118865094515},
                            Ref{700e-9, 0.295830111923385, 2.24354265561013}})
    {
        const auto r = stack_reflection(design, ref.wl);
        CHECK(r.reflectivity == doctest::Approx(ref.r).epsilon(1e-12));
        CHECK(std::abs(wrap(r.phase - ref.phase)) < 1e-10);
        CHECK(std::norm(r.amplitude) == doctest::Approx(r.reflectivity));
    }
}

TEST_CASE("quarter-wave peak reflectivity")
{
    // Admittance Y = (nH/nL)^(2p) nH^2 / ns for a capped stack.
    const double nh = 2.1, nl = 1.45, ns = 1.5;
    const auto design = quarter_wave_stack(nh, nl, 4, 1000e-9, ns, 1.0, true);
    const double y = std::pow(nh / nl, 8) * nh * nh / ns;
    const double expected = std::pow((1.0 - y) / (1.0 + y), 2);
    CHECK(stack_reflection(design, 1000e-9).reflectivity == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("bare substrate")
{
    StackDesign bare{1.0, 1.5, {}};
    CHECK(stack_reflection(bare, 800e-9).reflectivity == doctest::Approx(0.04));
}

TEST_CASE("synthetic low-dispersion coating")
{
    const auto c = low_dispersion_coating();
    const double peak = wavelength_to_frequency(910e-9);
    CHECK(c->reflectivity(peak) == doctest::Approx(0.992).epsilon(1e-6));
    CHECK(c->wavelength_domain().lo == doctest::Approx(650e-9));
    CHECK(c->wavelength_domain().hi == doctest::Approx(1200e-9));
    CHECK_THROWS_AS(c->reflectivity(wavelength_to_frequency(500e-9)), DomainError);
}

TEST_CASE("constant coating is exact")
{
    const auto c = CoatingModel::constant(0.99, 0.25, {700e-9, 900e-9});
    for (double w = 700e-9; w <= 900e-9; w += 7e-9)
    {
        const double f = wavelength_to_frequency(w);
        CHECK(c.reflectivity(f) == 0.99);
        CHECK(c.phase(f) == 0.25);
        CHECK(c.phase_slope(f) == 0.0);
    }
}

TEST_CASE("coating csv round trip and unwrap")
{
    std::istringstream in("wavelength_nm,reflectivity,phase_rad\n700,0.9,3.0\n750,0.95,-3.0\n800,0.99,-2.9\n"
                          "850,0.95,-2.8\n900,0.9,-2.7\n");
    const auto c = load_coating(in);
    const auto& s = c.samples();
    REQUIRE(s.size() == 5);
    CHECK(s[1].phase - s[0].phase == doctest::Approx(kTwoPi - 6.0));
    std::stringstream io;
    write_coating(io, c);
    const auto again = load_coating(io);
    for (std::size_t i = 0; i < s.size(); ++i)
    {
        CHECK(again.samples()[i].wavelength == doctest::Approx(s[i].wavelength).epsilon(1e-15));
        CHECK(again.samples()[i].reflectivity == s[i].reflectivity);
        CHECK(again.samples()[i].phase == doctest::Approx(s[i].phase).epsilon(1e-15));
    }
}

TEST_CASE("coating validation")
{
    std::istringstream header("lambda,R,phi\n700,0.9,0\n");
    CHECK_THROWS_AS(load_coating(header), ParseError);
    std::istringstream r1("wavelength_nm,reflectivity,phase_rad\n700,0.9,0\n750,1.0,0\n800,0.9,0\n850,0.9,0\n");
    CHECK_THROWS_AS(load_coating(r1), ValidationError);
    std::istringstream few("wavelength_nm,reflectivity,phase_rad\n700,0.9,0\n750,0.9,0\n");
    CHECK_THROWS_AS(load_coating(few), ValidationError);
    try
    {
        std::istringstream ragged("wavelength_nm,reflectivity,phase_rad\n700,0.9,0\n750,0.9\n");
        load_coating(ragged);
        FAIL("expected ParseError");
    }
    catch (const ParseError& e)
    {
        CHECK(e.row() == 3);
    }
}

TEST_CASE("detrend removes a linear phase")
{
    std::vector<CoatingSample> s;
    for (int i = 0; i < 20; ++i)
    {
        const double w = (700.0 + 10.0 * i) * 1e-9;
        s.push_back({w, 0.99, 0.4 + 2e-14 * wavelength_to_frequency(w)});
    }
    const auto d = detrend_phase(CoatingModel(s));
    const double f = wavelength_to_frequency(777e-9);
    CHECK(d.phase_slope(f) == doctest::Approx(0.0).epsilon(1e-12));
    const auto flat = detrend_phase(CoatingModel::constant(0.9, 1.1, {700e-9, 800e-9}));
    CHECK(flat.phase(f * 0 + wavelength_to_frequency(750e-9)) == doctest::Approx(1.1));
}

TEST_CASE("phase tolerance")
{
    CHECK(phase_tolerance(0.99) == doctest::Approx(0.01 / std::sqrt(0.99)));
}
