#include "combcavity/calibration.hpp"
#include "combcavity/errors.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

using namespace combcav;

namespace
{

const ConstrainedParams kTruth{2000.0, 15.0, 4.0 * std::log(2.0) / 16.0, 80.3, 100.0};

} // namespace

TEST_CASE("line index is centred")
{
    CHECK(line_index(0, 9) == -4.0);
    CHECK(line_index(4, 9) == 0.0);
    CHECK(line_index(1, 4) == -0.5);
}

TEST_CASE("noise-free fit recovers the truth")
{
    const auto pixels = constrained_model(kTruth, 9, 160);
    FitOptions opt;
    opt.init = ConstrainedParams{1800.0, 14.8, 0.15, 80.0, 90.0};
    const auto fit = fit_constrained(pixels, 9, opt);
    CHECK(fit.params.a == doctest::Approx(kTruth.a).epsilon(1e-8));
    CHECK(fit.params.b == doctest::Approx(kTruth.b).epsilon(1e-8));
    CHECK(fit.params.c == doctest::Approx(kTruth.c).epsilon(1e-8));
    CHECK(fit.params.d == doctest::Approx(kTruth.d).epsilon(1e-8));
    CHECK(fit.params.e == doctest::Approx(kTruth.e).epsilon(1e-8));
    CHECK(fit.residual_rms < 1e-6);
    CHECK(fit.dof == 160 - 5);
}

TEST_CASE("automatic start and per-line amplitudes")
{
    std::vector<double> amps{1500, 1800, 2100, 2000, 1900, 2200, 1700, 1600, 2050};
    const auto pixels = constrained_model(kTruth, 9, 160, amps);
    FitOptions opt;
    opt.per_line_amplitude = true;
    const auto fit = fit_constrained(pixels, 9, opt);
    REQUIRE(fit.amplitudes.size() == 9);
    for (std::size_t j = 0; j < 9; ++j)
        CHECK(fit.amplitudes[j] == doctest::Approx(amps[j]).epsilon(1e-7));
    CHECK(fit.params.d == doctest::Approx(kTruth.d).epsilon(1e-9));
    CHECK(fit.covariance.size() == 13);
}

TEST_CASE("per-line fit on isolated lines")
{
    const auto pixels = constrained_model(kTruth, 9, 160);
    const auto per = fit_per_line(pixels, 9);
    REQUIRE(per.lines.size() == 9);
    for (int j = 0; j < 9; ++j)
    {
        CHECK(per.lines[j].position == doctest::Approx(kTruth.b * line_index(j, 9) + kTruth.d).epsilon(1e-3));
        CHECK(per.lines[j].width == doctest::Approx(1.0 / std::sqrt(2.0 * kTruth.c)).epsilon(0.05));
        CHECK_FALSE(per.lines[j].blended);
    }
}

TEST_CASE("ccd rendering")
{
    SpectrographModel sm;
    sm.reference_frequency = 375e12;
    sm.photon_noise = false;
    const std::vector<SpectralLine> lines{{375e12 + 80.0 * sm.dispersion, 2.0}};
    const auto counts = render_ccd(lines, sm, 1);
    REQUIRE(counts.size() == 160);
    const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
    CHECK(total == doctest::Approx(2.0 * sm.exposure_scale).epsilon(1e-9));
    CHECK(std::max_element(counts.begin(), counts.end()) - counts.begin() == 80);
    CHECK(counts[79] < counts[80]);

    sm.photon_noise = true;
    CHECK(render_ccd(lines, sm, 7) == render_ccd(lines, sm, 7));
    CHECK(render_ccd(lines, sm, 7) != render_ccd(lines, sm, 8));
}

TEST_CASE("replicate seeds are distinct")
{
    std::set<std::uint64_t> seen;
    for (std::uint64_t k = 0; k < 1000; ++k)
        seen.insert(replicate_seed(42, k));
    CHECK(seen.size() == 1000);
    CHECK(replicate_seed(42, 3) == replicate_seed(42, 3));
}

TEST_CASE("velocity equivalent")
{
    CHECK(rv_equivalent(375e12 * 1e-8, 375e12) == doctest::Approx(kSpeedOfLight * 1e-8));
}

TEST_CASE("spectrograph validation")
{
    SpectrographModel sm;
    sm.pixels = 0;
    CHECK_THROWS_AS(validate(sm), ValidationError);
    sm = SpectrographModel{};
    sm.psf_sigma = -1.0;
    CHECK_THROWS_AS(validate(sm), ValidationError);
}
