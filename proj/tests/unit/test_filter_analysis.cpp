#include "combcavity/errors.hpp"
#include "combcavity/filter_analysis.hpp"

#include <doctest.h>

#include <cmath>

using namespace combcav;

namespace
{

constexpr double kFrep = 1e9;

struct Matched
{
    CavitySpec cavity;
    double resonance;
    FilteredSpectrum spectrum;
};

// Flat-phase cavity whose resonances sit on multiples of m f_rep, with the
// comb line delta below the resonance near 800 nm.
Matched matched(double r, int m, double delta, double linewidth = 0.0)
{
    auto coating = std::make_shared<const CoatingModel>(CoatingModel::constant(r, 0.0, {600e-9, 1100e-9}));
    CavitySpec cav{kSpeedOfLight / (2.0 * m * kFrep), coating};
    const double fsr = m * kFrep;
    const double res = std::round(wavelength_to_frequency(800e-9) / fsr) * fsr;
    const double f_o = std::fmod(std::fmod(-delta, kFrep) + kFrep, kFrep);
    const FrequencyBand band{res - 4.0 * fsr, res + 4.0 * fsr};
    const auto comb = CombSpec::covering(kFrep, f_o, band, Envelope::flat(), linewidth);
    return {cav, res, apply_cavity(comb, cav, band, m, res)};
}

} // namespace

TEST_CASE("closed-form bandwidth")
{
    // tests/oracles/stack_oracle.py
    CHECK(bandwidth_closed_form(20, 800e-9, 1e9, 0.992, 2.7e-7) == doctest::Approx(4.043056223735417e-07));
    CHECK_THROWS_AS(bandwidth_closed_form(20, 800e-9, 1e9, 0.992, 0.0), DomainError);
}

TEST_CASE("simulated suppression follows the closed form")
{
    for (int m : {5, 10, 20})
        for (double delta : {0.0, 3e6, -12e6, 40e6})
        {
            const auto mm = matched(0.99, m, delta);
            const auto s = heterodyne_suppression(mm.spectrum, mm.resonance);
            CHECK(s.nnr_db == doctest::Approx(suppression_closed_form(0.99, m, -1, delta, kFrep)).epsilon(1e-8));
            CHECK(s.nnl_db == doctest::Approx(suppression_closed_form(0.99, m, 1, delta, kFrep)).epsilon(1e-8));
        }
}

TEST_CASE("centred line has symmetric neighbours")
{
    const auto mm = matched(0.99, 10, 0.0);
    const auto s = heterodyne_suppression(mm.spectrum, mm.resonance);
    CHECK(s.nnl_db == doctest::Approx(s.nnr_db).epsilon(1e-9));
    CHECK(s.passed_transmission == doctest::Approx(1.0));
    CHECK(s.nnl_db < -30.0);
}

TEST_CASE("passed modes are one residue class")
{
    const auto mm = matched(0.99, 7, 0.0);
    const auto passed = mm.spectrum.passed();
    REQUIRE(passed.size() >= 2);
    for (std::size_t i = 1; i < passed.size(); ++i)
        CHECK(passed[i].index - passed[i - 1].index == 7);
    for (const auto& p : passed)
        CHECK(p.transmission() == doctest::Approx(1.0));
}

TEST_CASE("beat spectrum bounds")
{
    const auto mm = matched(0.95, 6, 5e6);
    const auto beats = rf_beat_spectrum(mm.spectrum, 18);
    REQUIRE(beats.size() == 18);
    for (const auto& b : beats)
        CHECK(b.power <= b.pairwise_bound * (1.0 + 1e-12));
    CHECK(beats[5].normalized == doctest::Approx(1.0));
    // first harmonic is carried by the two neighbours of each passed mode
    const double side = airy_transmission(0.95, kTwoPi / 6.0);
    CHECK(beats[0].normalized < 6.0 * side);
    CHECK(beats[0].normalized > side);
}

TEST_CASE("centroid shift")
{
    const auto mm = matched(0.99, 10, 0.0);
    CHECK(cog_shift(0.0, mm.cavity, mm.resonance, 5e6) == 0.0);
    CHECK(cog_shift(1e6, mm.cavity, mm.resonance, 0.0) == doctest::Approx(0.0).scale(1.0));
    const double a = cog_shift(1e6, mm.cavity, mm.resonance, 5e6);
    const double b = cog_shift(1e6, mm.cavity, mm.resonance, -5e6);
    CHECK(a == doctest::Approx(-b).epsilon(1e-3));
    CHECK(a > 0.0); // pulled toward the resonance above the line
}

TEST_CASE("usable bandwidth")
{
    const auto mm = matched(0.99, 10, 0.0);
    auto spec = mm.spectrum;
    spec.lock_wavelength = frequency_to_wavelength(mm.resonance);
    const auto band = usable_bandwidth(spec, 0.5);
    CHECK_FALSE(band.empty());
    CHECK(band.contains(spec.lock_wavelength));
    CHECK(usable_bandwidth(spec, 1.5).empty());
}

// Slopes from tests/oracles/cog_oracle.py (brute-force quadrature).
TEST_CASE("wide-line centroid slope")
{
    const auto mm = matched(0.99, 10, 0.0);
    const double fwhm = resonance_fwhm(mm.cavity, mm.resonance);
    for (auto [mult, ref] : {std::pair{10.0, 0.9109}, std::pair{20.0, 0.9542}})
    {
        const double h = 0.05 * fwhm;
        const double lw = mult * fwhm;
        const double slope =
            (cog_shift(lw, mm.cavity, mm.resonance, h) - cog_shift(lw, mm.cavity, mm.resonance, -h)) / (2.0 * h);
        CHECK(slope == doctest::Approx(ref).epsilon(2e-4));
    }
}
