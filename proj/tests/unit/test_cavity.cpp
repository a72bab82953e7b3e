#include "combcavity/cavity.hpp"
#include "combcavity/errors.hpp"

#include <doctest.h>

#include <cmath>

using namespace combcav;

namespace
{

std::shared_ptr<const CoatingModel> flat(double r)
{
    return std::make_shared<const CoatingModel>(CoatingModel::constant(r, 0.0, {600e-9, 1100e-9}));
}

} // namespace

TEST_CASE("airy form equals field modulus")
{
    for (double r : {0.0, 0.5, 0.9, 0.99, 0.999})
        for (double theta = -7.0; theta < 7.0; theta += 0.37)
        {
            const double t = airy_transmission(r, theta);
            const auto e = (1.0 - r) / (1.0 - r * std::exp(std::complex<double>(0.0, theta)));
            CHECK(t == doctest::Approx(std::norm(e)).epsilon(1e-12));
            CHECK(t <= 1.0 + 1e-15);
            CHECK(t >= 0.0);
        }
    CHECK(airy_transmission(0.99, 0.0) == 1.0);
}

TEST_CASE("gouy phase")
{
    CHECK(gouy_phase(0.1, kFlatMirror) == 0.0);
    CHECK(gouy_phase(0.5, 1.0) == doctest::Approx(2.0 * std::acos(0.5)));
    CHECK_THROWS_AS(gouy_phase(3.0, 1.0), ValidationError);
}

TEST_CASE("vacuum cavity resonances")
{
    const double len = 0.0075;
    CavitySpec cav{len, flat(0.99)};
    const double fsr = kSpeedOfLight / (2.0 * len);
    const double f = find_resonance(cav, 375e12);
    CHECK(std::remainder(f, fsr) == doctest::Approx(0.0).epsilon(1e-6).scale(fsr));
    CHECK(cavity_transmission(cav, f) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(local_fsr(cav, f) == doctest::Approx(fsr).epsilon(1e-9));
    const double expected_fwhm = fsr * 2.0 / kPi * std::asin((1.0 - 0.99) / (2.0 * std::sqrt(0.99)));
    CHECK(resonance_fwhm(cav, f) == doctest::Approx(expected_fwhm).epsilon(1e-6));
}

TEST_CASE("phase change is consistent with phase difference")
{
    CavitySpec cav{0.01, flat(0.99), 0.5, laboratory_air()};
    const double f0 = 375e12;
    for (double off : {-3e9, -1e6, 12.5, 4e9})
        CHECK(round_trip_phase_change(cav, f0, off) ==
              doctest::Approx(round_trip_phase(cav, f0 + off) - round_trip_phase(cav, f0)).epsilon(1e-6));
}

TEST_CASE("nominal length sets the resonance spacing")
{
    const double nu = wavelength_to_frequency(850e-9);
    const auto air = laboratory_air();
    const double n = ciddor_index(air, 850e-9);
    for (const Medium& medium : {Medium{Vacuum{}}, Medium{LinearDispersion{n, nu, 0.0}}})
    {
        const double len = nominal_length(1e9, 20, medium, low_dispersion_coating(), 850e-9);
        CavitySpec cav{len, low_dispersion_coating(), kFlatMirror, medium};
        CHECK(local_fsr(cav, nu) == doctest::Approx(20e9).epsilon(1e-9));
    }
    const double vac = nominal_length(1e9, 10, Vacuum{}, flat(0.99), 800e-9);
    CHECK(vac == doctest::Approx(kSpeedOfLight / 20e9).epsilon(1e-12));
}

TEST_CASE("air dispersion detunes the spacing by the group index")
{
    const double nu = wavelength_to_frequency(850e-9);
    const auto air = laboratory_air();
    const auto coating = flat(0.99);
    const double len = nominal_length(1e9, 20, Medium{air}, coating, 850e-9);
    CavitySpec cav{len, coating, kFlatMirror, air};
    const double h = 1e-9;
    const double n = ciddor_index(air, 850e-9);
    const double ng = n - 850e-9 * (ciddor_index(air, 850e-9 + h) - ciddor_index(air, 850e-9 - h)) / (2.0 * h);
    CHECK(local_fsr(cav, nu) == doctest::Approx(20e9 * n / ng).epsilon(1e-9));
}

TEST_CASE("lock lands on a transmitting length")
{
    const auto coating = flat(0.99);
    const double len = nominal_length(1e9, 10, Vacuum{}, coating, 800e-9);
    CavitySpec cav{len, coating};
    const auto comb = CombSpec::covering(1e9, 0.3e9, to_frequency(WavelengthBand{795e-9, 805e-9}));
    LockConfig lock{800e-9, 2e-9, 10};
    const auto r = lock_cavity(comb, cav, lock);
    CHECK(r.modes > 0);
    const auto locked = cav.with_length(r.length);
    const ModeIndex n = nearest_mode(comb, wavelength_to_frequency(800e-9));
    double best = 0.0;
    for (ModeIndex k = n - 5; k <= n + 5; ++k)
        best = std::max(best, cavity_transmission(locked, mode_frequency(comb, k)));
    CHECK(best > 0.999);
    CHECK(std::abs(r.length - len) <= r.halfwidth);
}

TEST_CASE("flat objective keeps the centre")
{
    const auto coating = flat(0.0);
    CavitySpec cav{0.015, coating};
    const auto comb = CombSpec::covering(1e9, 0.0, to_frequency(WavelengthBand{795e-9, 805e-9}));
    const auto r = lock_cavity(comb, cav, LockConfig{800e-9, 2e-9, 10}, 0.015);
    CHECK(r.length == 0.015);
}

TEST_CASE("comb step length")
{
    CavitySpec cav{0.015, flat(0.99)};
    CHECK(comb_step_length(cav, 1e9, 375e12) == doctest::Approx(0.015 * 1e9 / 375e12));
}

TEST_CASE("invalid cavities")
{
    CHECK_THROWS_AS(validate(CavitySpec{0.0, flat(0.9)}), ValidationError);
    CHECK_THROWS_AS(validate(CavitySpec{0.01, nullptr}), ValidationError);
    CHECK_THROWS_AS(validate(CavitySpec{0.01, flat(0.9), 0.001}), ValidationError);
    CHECK_THROWS_AS(validate(LockConfig{500e-9, 2e-9, 10}, *flat(0.9)), ValidationError);
    CHECK_THROWS_AS(validate(LockConfig{800e-9, 2e-9, 0}, *flat(0.9)), ValidationError);
}
